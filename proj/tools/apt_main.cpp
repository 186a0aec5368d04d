// apt: command-line front end for the arbitrary-precision bit-plane GEMM.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "apt/bench.hpp"
#include "apt/bipolar.hpp"
#include "apt/engine.hpp"
#include "apt/matrix_io.hpp"
#include "apt/oracle.hpp"
#include "apt/tuner.hpp"
#include "apt/tuning_table.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

apt::TuningTable load_table_if_present(const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return {};
  return apt::load_tuning_table(path);
}

int cmd_convert(const std::string& in, const std::string& out, const std::string& to) {
  const apt::IntMatrix m = apt::read_apm(in);
  const apt::IntMatrix converted = to == "bipolar" ? apt::signed_to_bipolar(m) : apt::bipolar_to_signed(m);
  apt::write_apm(out, converted);
  std::cerr << "converted " << m.rows() << "x" << m.cols() << " " << m.bits() << "-bit "
            << apt::encoding_name(m.encoding()) << " -> " << to << '\n';
  return 0;
}

struct GemmArgs {
  std::string x, w, engine = "apt", config, table, out;
  int p = 0, q = 0;
};

int cmd_gemm(const GemmArgs& a, int workers) {
  const apt::IntMatrix x = apt::read_apm(a.x);
  const apt::IntMatrix w = apt::read_apm(a.w);
  if (x.bits() != a.p) {
    throw apt::Error(apt::ErrorCode::RangeViolation, a.x + ": holds " + std::to_string(x.bits()) +
                                                         "-bit data, --p is " + std::to_string(a.p));
  }
  if (w.bits() != a.q) {
    throw apt::Error(apt::ErrorCode::RangeViolation, a.w + ": holds " + std::to_string(w.bits()) +
                                                         "-bit data, --q is " + std::to_string(a.q));
  }

  apt::Matrix<std::int64_t> y;
  if (a.engine == "oracle") {
    y = apt::oracle_matmul(x, w);
  } else {
    apt::KernelConfig cfg;
    std::string source;
    if (!a.config.empty()) {
      cfg = apt::parse_config(a.config);
      source = "command line";
    } else if (!a.table.empty()) {
      const auto hit = apt::lookup(x.rows(), w.rows(), x.cols(), a.p, a.q, apt::load_tuning_table(a.table));
      cfg = hit.entry.config;
      source = std::string(hit.exact ? "table (exact " : "table (nearest ") +
               std::to_string(hit.key.m) + "/" + std::to_string(hit.key.n) + "/" +
               std::to_string(hit.key.k) + ")";
    } else {
      cfg = apt::default_config(a.p, a.q);
      source = "default";
    }
    std::cerr << "config: " << apt::format_config(cfg) << " [" << source << "]\n";
    apt::GemmOptions opts;
    opts.workers = workers;
    y = apt::gemm_ap_wide(apt::GemmProblem{&x, &w, cfg}, opts);
  }

  if (a.out.empty()) {
    apt::write_result(std::cout, y);
  } else {
    std::ofstream os(a.out, std::ios::trunc);
    if (!os) throw apt::Error(apt::ErrorCode::IoError, "cannot create " + a.out);
    apt::write_result(os, y);
  }
  return 0;
}

struct TuneArgs {
  std::size_t m = 0, n = 0, k = 0;
  int p = 0, q = 0, trials = 3;
  std::string table;
  std::size_t budget = apt::SearchLimits{}.scratch_budget;
};

int cmd_tune(const TuneArgs& a, int workers) {
  apt::TuningTable table = load_table_if_present(a.table);
  apt::TuneOptions opts;
  opts.trials = a.trials;
  opts.workers = workers;
  opts.limits.scratch_budget = a.budget;
  opts.progress = [](std::size_t done, std::size_t total) {
    if (done == total || done % 100 == 0) std::cerr << "\rmeasured " << done << "/" << total << std::flush;
  };
  const auto rep = apt::tune(a.m, a.n, a.k, a.p, a.q, table, opts);
  std::cerr << '\n';
  apt::save_tuning_table(a.table, table);
  std::cout << "best:    " << apt::format_config(rep.best) << "  " << rep.best_throughput * 1e-9
            << " Gops/s\n"
            << "default: " << apt::format_config(rep.default_cfg) << "  "
            << rep.default_throughput * 1e-9 << " Gops/s\n"
            << "candidates: " << rep.measurements.size() << ", table: " << a.table << '\n';
  return 0;
}

struct BenchArgs {
  std::string suite, precisions, table, report, shapes;
  bool large = false, verify = false, no_tune = false;
  int trials = 5;
};

int cmd_bench(const BenchArgs& a, int workers) {
  const apt::Suite suite = apt::parse_suite(a.suite);
  std::vector<apt::Shape> custom;
  if (suite == apt::Suite::Custom) {
    std::string_view list = a.shapes;
    if (list.empty()) throw UsageError("--suite custom needs --shapes");
    while (!list.empty()) {
      const auto comma = list.find(',');
      custom.push_back(apt::parse_shape(list.substr(0, comma)));
      list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    }
  }
  apt::TuningTable table = load_table_if_present(a.table);
  apt::BenchOptions opts;
  opts.trials = a.trials;
  opts.workers = workers;
  opts.large = a.large;
  opts.verify = a.verify;
  opts.tune_missing = !a.no_tune;
  const auto rep = apt::run_suite(suite, custom, apt::parse_precisions(a.precisions), table, opts);
  apt::print_report(std::cout, rep);
  if (!a.table.empty()) apt::save_tuning_table(a.table, table);
  if (!a.report.empty()) {
    std::ofstream os(a.report, std::ios::trunc);
    if (!os) throw apt::Error(apt::ErrorCode::IoError, "cannot create " + a.report);
    apt::write_report_lines(os, rep);
  }
  if (rep.verify_failed) {
    std::cerr << "error: engine output differs from the oracle\n";
    return kExitVerify;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arbitrary-precision bit-plane integer GEMM"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (default: logical CPU count)")
      ->check(CLI::NonNegativeNumber);

  std::string conv_in, conv_out, conv_to;
  auto* convert = app.add_subcommand("convert", "Convert an .apm matrix between signed and bipolar");
  convert->add_option("--in", conv_in, "Input .apm file")->required();
  convert->add_option("--out", conv_out, "Output .apm file")->required();
  convert->add_option("--to", conv_to, "Target encoding")->required()->check(CLI::IsMember({"bipolar", "signed"}));

  GemmArgs ga;
  auto* gemm = app.add_subcommand("gemm", "Multiply X (M x K) by W (N x K) transposed");
  gemm->add_option("--x", ga.x, "Activation .apm (bipolar)")->required();
  gemm->add_option("--w", ga.w, "Weight .apm (bipolar, N x K)")->required();
  gemm->add_option("--p", ga.p, "Activation bits")->required()->check(CLI::Range(1, 8));
  gemm->add_option("--q", ga.q, "Weight bits")->required()->check(CLI::Range(1, 8));
  gemm->add_option("--engine", ga.engine, "apt or oracle")->check(CLI::IsMember({"apt", "oracle"}));
  auto* cfg_opt = gemm->add_option("--config", ga.config, "Kernel config as key=value,...");
  gemm->add_option("--table", ga.table, "Tuning table to look the config up in")->excludes(cfg_opt);
  gemm->add_option("--out", ga.out, "Result file (text); stdout when omitted");

  TuneArgs ta;
  auto* tune = app.add_subcommand("tune", "Search kernel configs for one shape and record the best");
  tune->add_option("--m", ta.m)->required()->check(CLI::PositiveNumber);
  tune->add_option("--n", ta.n)->required()->check(CLI::PositiveNumber);
  tune->add_option("--k", ta.k)->required()->check(CLI::PositiveNumber);
  tune->add_option("--p", ta.p)->required()->check(CLI::Range(1, 8));
  tune->add_option("--q", ta.q)->required()->check(CLI::Range(1, 8));
  tune->add_option("--table", ta.table, "Tuning table file (created if missing)")->required();
  tune->add_option("--trials", ta.trials, "Timed runs per config")->check(CLI::Range(3, 1000));
  tune->add_option("--budget", ta.budget, "Scratch bytes per worker")->check(CLI::PositiveNumber);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time the engine against the int32 baseline");
  bench->add_option("--suite", ba.suite, "general, prefill, decode or custom")->required()
      ->check(CLI::IsMember({"general", "prefill", "decode", "custom"}));
  bench->add_option("--precisions", ba.precisions, "Comma list of p:q or WqAp")->required();
  bench->add_option("--shapes", ba.shapes, "Comma list of M/N/K for --suite custom");
  bench->add_option("--table", ba.table, "Tuning table (read, and updated with new tunings)");
  bench->add_option("--report", ba.report, "Machine-readable report file");
  bench->add_option("--trials", ba.trials, "Timed runs per measurement")->check(CLI::Range(1, 1000));
  bench->add_flag("--large", ba.large, "Include the 14k shapes");
  bench->add_flag("--verify", ba.verify, "Check every row against the oracle first");
  bench->add_flag("--no-tune", ba.no_tune, "Use nearest table entry or the default config instead of tuning");

  std::size_t d_rows = 0, d_cols = 0, d_tokens = 16;
  int d_p = 0, d_q = 0;
  std::uint64_t d_seed = 42;
  auto* demo = app.add_subcommand("demo", "Quantized layer: signed vs bipolar dequantization");
  demo->add_option("--rows", d_rows, "Output features")->required()->check(CLI::PositiveNumber);
  demo->add_option("--cols", d_cols, "Input features")->required()->check(CLI::PositiveNumber);
  demo->add_option("--p", d_p, "Activation bits")->required()->check(CLI::Range(1, 8));
  demo->add_option("--q", d_q, "Weight bits")->required()->check(CLI::Range(1, 8));
  demo->add_option("--seed", d_seed, "RNG seed")->required();
  demo->add_option("--tokens", d_tokens, "Activation rows")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*convert) return cmd_convert(conv_in, conv_out, conv_to);
    if (*gemm) return cmd_gemm(ga, workers);
    if (*tune) return cmd_tune(ta, workers);
    if (*bench) return cmd_bench(ba, workers);
    if (*demo) {
      const auto rep = apt::demo_quant_layer(d_rows, d_cols, d_p, d_q, d_seed, d_tokens);
      apt::print_demo(std::cout, rep);
      if (!rep.paths_identical) {
        std::cerr << "error: signed and bipolar paths disagree\n";
        return kExitVerify;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const apt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
