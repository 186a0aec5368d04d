#include "apt/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "apt/bipolar.hpp"
#include "apt/bitplane.hpp"
#include "apt/engine.hpp"
#include "apt/oracle.hpp"
#include "exact_sum.hpp"
#include "workload.hpp"

namespace apt {

Suite parse_suite(std::string_view name) {
  if (name == "general") return Suite::General;
  if (name == "prefill") return Suite::Prefill;
  if (name == "decode") return Suite::Decode;
  if (name == "custom") return Suite::Custom;
  throw Error(ErrorCode::ParseError, "unknown suite '" + std::string(name) + "'");
}

const char* suite_name(Suite s) {
  switch (s) {
    case Suite::General: return "general";
    case Suite::Prefill: return "prefill";
    case Suite::Decode: return "decode";
    case Suite::Custom: return "custom";
  }
  return "?";
}

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
    throw Error(ErrorCode::ParseError, "bad dimension '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<Precision> parse_precisions(std::string_view list) {
  std::vector<Precision> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const std::string_view item = list.substr(0, comma);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
    Precision pr;
    if (const auto colon = item.find(':'); colon != std::string_view::npos) {
      pr.p = parse_int(item.substr(0, colon), "precision");
      pr.q = parse_int(item.substr(colon + 1), "precision");
    } else if (item.size() >= 4 && (item[0] == 'W' || item[0] == 'w') && item.find_first_of("Aa") != std::string_view::npos) {
      const auto a = item.find_first_of("Aa");
      pr.q = parse_int(item.substr(1, a - 1), "precision");
      pr.p = parse_int(item.substr(a + 1), "precision");
    } else {
      throw Error(ErrorCode::ParseError, "precision '" + std::string(item) + "' is neither p:q nor WqAp");
    }
    if (pr.p < 1 || pr.p > kMaxBits || pr.q < 1 || pr.q > kMaxBits) {
      throw Error(ErrorCode::RangeViolation, "precision '" + std::string(item) + "' outside [1, 8]");
    }
    out.push_back(pr);
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty precision list");
  return out;
}

Shape parse_shape(std::string_view text) {
  const auto a = text.find('/');
  const auto b = a == std::string_view::npos ? a : text.find('/', a + 1);
  if (b == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "shape '" + std::string(text) + "' is not M/N/K");
  }
  return {parse_size(text.substr(0, a)), parse_size(text.substr(a + 1, b - a - 1)),
          parse_size(text.substr(b + 1))};
}

std::string format_shape(const Shape& s) {
  return std::to_string(s.m) + "/" + std::to_string(s.n) + "/" + std::to_string(s.k);
}

std::vector<Shape> suite_shapes(Suite suite, bool large) {
  constexpr std::size_t k1 = 1024, k2 = 2048, k4 = 4096, k14 = 14336;
  std::vector<Shape> all;
  switch (suite) {
    case Suite::General: all = {{64, k1, k1}, {64, k2, k2}, {64, k4, k4}}; break;
    case Suite::Prefill: all = {{64, k1, k4}, {64, k14, k4}, {64, k4, k14}}; break;
    case Suite::Decode: all = {{1, k1, k4}, {1, k14, k4}, {1, k4, k14}}; break;
    case Suite::Custom: break;
  }
  if (!large) {
    std::erase_if(all, [](const Shape& s) { return s.n >= k14 || s.k >= k14; });
  }
  return all;
}

Matrix<std::int32_t> baseline_int32(const std::vector<std::int32_t>& x,
                                    const std::vector<std::int32_t>& w, std::size_t m,
                                    std::size_t n, std::size_t k) {
  Matrix<std::int32_t> y(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      std::int32_t acc = 0;
      for (std::size_t i = 0; i < k; ++i) acc += x[r * k + i] * w[c * k + i];
      y(r, c) = acc;
    }
  }
  return y;
}

namespace {

template <typename F>
double median_seconds(int trials, F&& fn) {
  std::vector<double> samples(static_cast<std::size_t>(std::max(trials, 1)));
  for (auto& s : samples) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return detail::median(std::move(samples));
}

std::vector<std::int32_t> widen(const IntMatrix& m) {
  return std::vector<std::int32_t>(m.data().begin(), m.data().end());
}

}  // namespace

BenchReport run_suite(Suite suite, const std::vector<Shape>& custom,
                      const std::vector<Precision>& precisions, TuningTable& table,
                      const BenchOptions& opts) {
  const std::vector<Shape> shapes = suite == Suite::Custom ? custom : suite_shapes(suite, opts.large);
  BenchReport report;
  report.workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();

  for (const Shape& shape : shapes) {
    for (const Precision& pr : precisions) {
      BenchRow row;
      row.suite = suite_name(suite);
      row.shape = shape;
      row.precision = pr;

      const ProblemKey key{shape.m, shape.n, shape.k, pr.p, pr.q};
      if (const TuningEntry* hit = table.find(key)) {
        row.config = hit->config;
        row.config_source = "table";
      } else if (opts.tune_missing) {
        TuneOptions topts = opts.tune;
        topts.workers = opts.workers;
        row.config = tune(shape.m, shape.n, shape.k, pr.p, pr.q, table, topts).best;
        row.config_source = "tuned";
      } else if (!table.empty()) {
        row.config = lookup(shape.m, shape.n, shape.k, pr.p, pr.q, table).entry.config;
        row.config_source = "nearest";
      } else {
        row.config = default_config(pr.p, pr.q, opts.tune.limits);
        row.config_source = "default";
      }

      std::mt19937_64 rng(opts.seed);
      const IntMatrix x = detail::random_bipolar(shape.m, shape.k, pr.p, rng);
      const IntMatrix w = detail::random_bipolar(shape.n, shape.k, pr.q, rng);
      const PackedPlanes w_packed = decompose_pack(w);
      GemmOptions gopts;
      gopts.workers = opts.workers;

      if (opts.verify) {
        const auto got = gemm_packed_wide(decompose_pack(x), w_packed, row.config, gopts);
        row.verified = got == oracle_matmul(x, w);
        if (!row.verified) report.verify_failed = true;
      }

      const bool narrow = fits_int32(shape.k, pr.p, pr.q);
      auto engine = [&] {
        const PackedPlanes xp = decompose_pack(x);
        if (narrow) {
          (void)gemm_packed(xp, w_packed, row.config, gopts);
        } else {
          (void)gemm_packed_wide(xp, w_packed, row.config, gopts);
        }
      };
      engine();
      const double engine_s = median_seconds(opts.trials, engine);

      const auto xi = widen(x);
      const auto wi = widen(w);
      const double base_s = median_seconds(opts.trials, [&] {
        auto y = baseline_int32(xi, wi, shape.m, shape.n, shape.k);
        asm volatile("" : : "r"(y.data.data()) : "memory");
      });

      row.engine_us = engine_s * 1e6;
      row.baseline_us = base_s * 1e6;
      row.speedup = base_s / engine_s;
      row.gops = 2.0 * static_cast<double>(shape.m) * static_cast<double>(shape.n) *
                 static_cast<double>(shape.k) / engine_s * 1e-9;
      report.rows.push_back(row);
    }
  }
  return report;
}

void print_report(std::ostream& os, const BenchReport& report) {
  os << "workers: " << report.workers << '\n';
  os << std::left << std::setw(9) << "suite" << std::setw(17) << "M/N/K" << std::setw(6) << "WA"
     << std::right << std::setw(13) << "engine_us" << std::setw(14) << "int32_us" << std::setw(10)
     << "speedup" << std::setw(10) << "Gops/s" << "  " << std::left << std::setw(9) << "config"
     << "verified\n";
  for (const auto& r : report.rows) {
    std::ostringstream wa;
    wa << 'W' << r.precision.q << 'A' << r.precision.p;
    os << std::left << std::setw(9) << r.suite << std::setw(17) << format_shape(r.shape)
       << std::setw(6) << wa.str() << std::right << std::fixed << std::setprecision(1)
       << std::setw(13) << r.engine_us << std::setw(14) << r.baseline_us << std::setprecision(2)
       << std::setw(10) << r.speedup << std::setw(10) << r.gops << "  " << std::left
       << std::setw(9) << r.config_source << (r.verified ? "yes" : "-") << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

void write_report_lines(std::ostream& os, const BenchReport& report) {
  for (const auto& r : report.rows) {
    os << r.suite << ' ' << format_shape(r.shape) << ' ' << r.precision.p << ' ' << r.precision.q
       << ' ' << r.engine_us << ' ' << r.baseline_us << ' ' << r.speedup << ' ' << r.gops << '\n';
  }
}

namespace {

struct Quantized {
  IntMatrix codes;
  QuantParams params;
};

// Min-max quantizer onto signed n-bit codes: the code range [-2^(n-1),
// 2^(n-1)-1] spans [min, max] of each channel.
Quantized quantize_min_max(const std::vector<double>& v, std::size_t rows, std::size_t cols,
                           int bits, bool per_row) {
  const std::size_t channels = per_row ? rows : 1;
  const std::size_t span = per_row ? cols : rows * cols;
  const int lo = -(1 << (bits - 1));
  const int hi = (1 << (bits - 1)) - 1;
  std::vector<double> scales(channels), zeros(channels);
  std::vector<Cell> codes(rows * cols);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(ch * span);
    const auto [mn, mx] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(span));
    const double s = *mx > *mn ? (*mx - *mn) / ((1 << bits) - 1) : 1.0;
    const double z = *mn - s * lo;
    scales[ch] = s;
    zeros[ch] = z;
    for (std::size_t i = ch * span; i < (ch + 1) * span; ++i) {
      const double code = std::nearbyint((v[i] - z) / s);
      codes[i] = static_cast<Cell>(std::clamp(static_cast<int>(code), lo, hi));
    }
  }
  QuantParams params = per_row ? QuantParams::per_channel(std::move(scales), std::move(zeros))
                               : QuantParams::per_tensor(scales[0], zeros[0]);
  return {IntMatrix(rows, cols, bits, Encoding::SignedInt, std::move(codes)), std::move(params)};
}

std::vector<std::int64_t> row_sums(const IntMatrix& m) {
  std::vector<std::int64_t> s(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (Cell v : m.row(r)) s[r] += v;
  }
  return s;
}

// y[t][o] = sum_k (sx*x + zx)(sw*w + zw), expanded over the integer product
// and the row sums, evaluated exactly and rounded once.
Matrix<double> dequantize_output(const Matrix<std::int64_t>& acc, const IntMatrix& x,
                                 const QuantParams& xp, const IntMatrix& w,
                                 const QuantParams& wp) {
  const auto sx = row_sums(x);
  const auto sw = row_sums(w);
  const auto k = static_cast<std::int64_t>(x.cols());
  const double xs = xp.scale[0];
  const double xz[2] = {xp.zero[0], xp.zero_tail[0]};
  Matrix<double> y(acc.rows, acc.cols);
  detail::ExactSum sum;
  for (std::size_t t = 0; t < acc.rows; ++t) {
    for (std::size_t o = 0; o < acc.cols; ++o) {
      const double ws = wp.scale[o];
      const double wz[2] = {wp.zero[o], wp.zero_tail[o]};
      sum.clear();
      sum.add_product(xs, ws, acc(t, o));
      for (int a = 0; a < 2; ++a) {
        sum.add_product(xs, wz[a], sx[t]);
        sum.add_product(ws, xz[a], sw[o]);
        for (int b = 0; b < 2; ++b) sum.add_product(xz[a], wz[b], k);
      }
      y(t, o) = sum.round();
    }
  }
  return y;
}

}  // namespace

DemoReport demo_quant_layer(std::size_t rows, std::size_t cols, int p, int q, std::uint64_t seed,
                            std::size_t tokens) {
  if (p < 1 || p > kMaxBits || q < 1 || q > kMaxBits) {
    throw Error(ErrorCode::RangeViolation, "bit widths must lie in [1, 8]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xf(tokens * cols), wf(rows * cols);
  for (auto& v : xf) v = normal(rng);
  for (auto& v : wf) v = normal(rng);

  const Quantized xq = quantize_min_max(xf, tokens, cols, p, false);
  const Quantized wq = quantize_min_max(wf, rows, cols, q, true);

  // signed-INT path: conventional integer product
  const Matrix<double> y_signed =
      dequantize_output(oracle_matmul(xq.codes, wq.codes), xq.codes, xq.params, wq.codes, wq.params);

  // bipolar path: sign-bit flip, rewritten params, bit-plane engine
  const IntMatrix xb = signed_to_bipolar(xq.codes);
  const IntMatrix wb = signed_to_bipolar(wq.codes);
  const QuantParams xpb = rewrite_quant_params(xq.params);
  const QuantParams wpb = rewrite_quant_params(wq.params);
  const GemmProblem problem{&xb, &wb, default_config(p, q)};
  const Matrix<double> y_bipolar =
      dequantize_output(gemm_ap_wide(problem), xb, xpb, wb, wpb);

  DemoReport rep;
  rep.tokens = tokens;
  rep.rows = rows;
  rep.cols = cols;
  rep.p = p;
  rep.q = q;
  double ref_max = 0.0;
  for (std::size_t t = 0; t < tokens; ++t) {
    for (std::size_t o = 0; o < rows; ++o) {
      double ref = 0.0;
      for (std::size_t i = 0; i < cols; ++i) ref += xf[t * cols + i] * wf[o * cols + i];
      ref_max = std::max(ref_max, std::abs(ref));
      rep.max_abs_error = std::max(rep.max_abs_error, std::abs(y_bipolar(t, o) - ref));
      if (std::bit_cast<std::uint64_t>(y_signed(t, o)) != std::bit_cast<std::uint64_t>(y_bipolar(t, o))) {
        ++rep.path_mismatches;
      }
    }
  }
  rep.max_rel_error = ref_max > 0 ? rep.max_abs_error / ref_max : 0.0;
  rep.paths_identical = rep.path_mismatches == 0;
  return rep;
}

void print_demo(std::ostream& os, const DemoReport& r) {
  os << "layer: " << r.tokens << " tokens x " << r.cols << " in -> " << r.rows << " out, W" << r.q
     << "A" << r.p << '\n'
     << "max abs error vs float: " << r.max_abs_error << '\n'
     << "max rel error vs float: " << r.max_rel_error << '\n'
     << "signed vs bipolar dequantized outputs: "
     << (r.paths_identical ? "bit-identical" : std::to_string(r.path_mismatches) + " mismatches")
     << '\n';
}

}  // namespace apt
