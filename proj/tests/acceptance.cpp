// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [--workers N] [--only LIST]

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <thread>

#include "apt/bench.hpp"
#include "apt/bipolar.hpp"
#include "apt/bitplane.hpp"
#include "apt/engine.hpp"
#include "apt/oracle.hpp"
#include "apt/tuner.hpp"
#include "test_util.hpp"

namespace {

using namespace apt;
using Clock = std::chrono::steady_clock;

int g_workers = 4;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

template <typename F>
double median_us(int runs, F&& f) {
  std::vector<double> t(static_cast<std::size_t>(runs));
  for (auto& v : t) {
    const auto t0 = Clock::now();
    f();
    v = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  }
  std::sort(t.begin(), t.end());
  return runs % 2 ? t[t.size() / 2] : 0.5 * (t[t.size() / 2 - 1] + t[t.size() / 2]);
}

GemmOptions opts() {
  GemmOptions o;
  o.workers = g_workers;
  return o;
}

Outcome oracle_equivalence() {
  std::mt19937_64 g(1001);
  for (int i = 0; i < 1000; ++i) {
    const int p = static_cast<int>(testing::uniform(1, 8, g));
    const int q = static_cast<int>(testing::uniform(1, 8, g));
    const auto x = testing::random_bipolar(testing::uniform(1, 300, g), testing::uniform(1, 300, g), p, g);
    const auto w = testing::random_bipolar(testing::uniform(1, 300, g), x.cols(), q, g);
    const auto cfg = testing::random_config(p, q, kWordBits, g);
    if (gemm_ap_wide({&x, &w, cfg}, opts()) != oracle_matmul(x, w)) {
      return fail("instance " + std::to_string(i) + " differs, config " + format_config(cfg));
    }
  }
  return {true, "1000 instances bit-exact"};
}

Outcome bipolar_bijection() {
  int patterns = 0;
  for (int n = 1; n <= 8; ++n) {
    std::vector<Cell> vals;
    for (unsigned pat = 0; pat < (1u << n); ++pat) {
      // two's complement reading of the pattern, then the flipped pattern read as bipolar
      const int x = (pat >> (n - 1)) & 1u ? static_cast<int>(pat) - (1 << n) : static_cast<int>(pat);
      const unsigned flipped = pat ^ (1u << (n - 1));
      int v = 0;
      for (int i = 0; i < n; ++i) v += ((flipped >> i) & 1u ? 1 : -1) * (1 << i);
      if (v != 2 * x + 1) return fail("n=" + std::to_string(n) + " pattern " + std::to_string(pat));
      vals.push_back(static_cast<Cell>(x));
      ++patterns;
    }
    const IntMatrix s(1, vals.size(), n, Encoding::SignedInt, vals);
    const IntMatrix b = signed_to_bipolar(s);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (b.data()[i] != 2 * vals[i] + 1) return fail("library map differs at n=" + std::to_string(n));
    }
    if (bipolar_to_signed(b) != s) return fail("roundtrip differs at n=" + std::to_string(n));
  }
  if (patterns != 510) return fail("enumerated " + std::to_string(patterns) + " patterns");
  return {true, "510 patterns"};
}

Outcome dequant_invariance() {
  std::mt19937_64 g(3003);
  std::uniform_real_distribution<double> mant(0.5, 1.0);
  auto rnd = [&](int lo, int hi) { return std::ldexp(mant(g), static_cast<int>(testing::uniform(0, hi - lo, g)) + lo); };
  std::size_t checked = 0, naive_mismatch = 0;
  for (int t = 0; t < 10000; ++t) {
    const double s = rnd(-24, 4);
    const double z = testing::uniform(0, 1, g) ? rnd(-24, 8) : -rnd(-24, 8);
    const auto pr = QuantParams::per_tensor(s, z);
    const auto rw = rewrite_quant_params(pr);
    for (int n = 1; n <= 8; ++n) {
      for (int x = -(1 << (n - 1)); x < (1 << (n - 1)); ++x) {
        const double a = dequantize(pr, 0, x);
        const double b = dequantize(rw, 0, 2 * x + 1);
        if (std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b)) {
          return fail("s=" + std::to_string(s) + " z=" + std::to_string(z) + " x=" + std::to_string(x));
        }
        // for the record: plain double evaluation of both sides
        naive_mismatch += (s * x + z) != ((s / 2) * (2 * x + 1) + (z - s / 2));
        ++checked;
      }
    }
  }
  std::string demo;
  for (auto [p, q] : {std::pair{8, 8}, {4, 4}, {2, 1}, {1, 1}, {3, 7}}) {
    const auto r = demo_quant_layer(64, 256, p, q, 42);
    if (!r.paths_identical) {
      return fail("demo p=" + std::to_string(p) + " q=" + std::to_string(q) + ": " +
                  std::to_string(r.path_mismatches) + " outputs differ");
    }
    if (p == 8) demo = ", demo W8A8 rel err " + std::to_string(r.max_rel_error);
  }
  return {true, std::to_string(checked) + " codes identical (naive double evaluation would differ in " +
                    std::to_string(naive_mismatch) + ")" + demo};
}

Outcome recovery_identity() {
  std::mt19937_64 g(4004);
  for (int t = 0; t < 200; ++t) {
    const int p = static_cast<int>(testing::uniform(1, 4, g));
    const int q = static_cast<int>(testing::uniform(1, 4, g));
    const auto x = testing::random_bipolar(testing::uniform(1, 40, g), testing::uniform(1, 200, g), p, g);
    const auto w = testing::random_bipolar(testing::uniform(1, 40, g), x.cols(), q, g);
    const auto planes = oracle_planes(x, w);
    Matrix<std::int64_t> sum(x.rows(), w.rows());
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j)
        for (std::size_t e = 0; e < sum.data.size(); ++e)
          sum.data[e] += planes[static_cast<std::size_t>(i * q + j)].data[e] * (std::int64_t{1} << (i + j));
    if (sum != oracle_matmul(x, w)) return fail("instance " + std::to_string(t));
  }
  return {true, "200 instances"};
}

Outcome config_invariance() {
  std::mt19937_64 g(5005);
  for (int t = 0; t < 50; ++t) {
    const int p = static_cast<int>(testing::uniform(1, 8, g));
    const int q = static_cast<int>(testing::uniform(1, 8, g));
    const auto x = testing::random_bipolar(testing::uniform(1, 300, g), testing::uniform(1, 1200, g), p, g);
    const auto w = testing::random_bipolar(testing::uniform(1, 300, g), x.cols(), q, g);
    const auto a = testing::random_config(p, q, kWordBits, g);
    auto b = testing::random_config(p, q, kWordBits, g);
    while (b == a) b = testing::random_config(p, q, kWordBits, g);
    if (gemm_ap_wide({&x, &w, a}, opts()) != gemm_ap_wide({&x, &w, b}, opts())) {
      return fail(format_config(a) + " vs " + format_config(b));
    }
  }
  return {true, "50 problems, two configs each"};
}

TuningTable g_table;  // shared by the tuner and speedup criteria

Outcome tuner_soundness() {
  struct Key {
    std::size_t m, n, k;
    int p, q;
  };
  std::string detail;
  for (const Key& key : {Key{64, 1024, 1024, 2, 1}, Key{8, 200, 700, 3, 5}}) {
    TuneOptions o;
    o.trials = 3;
    o.workers = g_workers;
    const auto t0 = Clock::now();
    const auto rep = tune(key.m, key.n, key.k, key.p, key.q, g_table, o);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    for (const auto& m : rep.measurements) {
      if (config_violation(m.config, key.p, key.q) || testing::footprint(m.config, key.p, key.q) > o.limits.scratch_budget) {
        return fail("measured config invalid: " + format_config(m.config));
      }
    }
    if (config_violation(rep.best, key.p, key.q)) return fail("tuned config violates constraint");
    if (testing::footprint(rep.best, key.p, key.q) > o.limits.scratch_budget) return fail("tuned config over budget");
    if (!(rep.best_throughput >= rep.default_throughput)) return fail("tuned below default");
    const auto* stored = g_table.find({key.m, key.n, key.k, key.p, key.q});
    if (!stored || stored->config != rep.best) return fail("table entry missing or different");
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s%zu/%zu/%zu (%d,%d): %zu configs in %.1fs, tuned %.2f vs default %.2f Gops/s",
                  detail.empty() ? "" : "; ", key.m, key.n, key.k, key.p, key.q, rep.measurements.size(), secs,
                  rep.best_throughput * 1e-9, rep.default_throughput * 1e-9);
    detail += buf;
  }
  return {true, detail};
}

Outcome desk_speedup() {
  if (!g_table.find({64, 1024, 1024, 2, 1})) {
    TuneOptions o;
    o.workers = g_workers;
    tune(64, 1024, 1024, 2, 1, g_table, o);
  }
  BenchOptions b;
  b.trials = 5;
  b.workers = g_workers;
  b.verify = true;
  const auto rep = run_suite(Suite::Custom, {{64, 1024, 1024}}, {{2, 1}}, g_table, b);
  const auto& row = rep.rows.at(0);
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "engine %.0f us vs int32 baseline %.0f us, speedup %.2fx, %d workers on %u hardware threads",
                row.engine_us, row.baseline_us, row.speedup, rep.workers, std::thread::hardware_concurrency());
  if (!row.verified) return fail(std::string("engine output wrong; ") + buf);
  if (row.speedup < 2.0) return fail(buf);
  return {true, buf};
}

Outcome gemv_cost() {
  std::mt19937_64 g(8008);
  const auto x1 = testing::random_bipolar(1, 4096, 2, g);
  const auto x8 = testing::random_bipolar(8, 4096, 2, g);
  const auto w = testing::random_bipolar(1024, 4096, 2, g);
  const KernelConfig cfg = default_config(2, 2);
  const auto y = gemv_ap({&x1, &w, cfg}, opts());
  const auto ref = oracle_matmul(x1, w);
  if (std::vector<std::int64_t>(y.data.begin(), y.data.end()) != ref.data) return fail("GEMV differs from oracle");
  const auto p1 = decompose_pack(x1), p8 = decompose_pack(x8), pw = decompose_pack(w);
  (void)gemm_packed(p1, pw, cfg, opts());
  (void)gemm_packed(p8, pw, cfg, opts());
  // interleave the two measurements so drift hits both alike
  std::vector<double> t1, t8;
  for (int r = 0; r < 11; ++r) {
    t1.push_back(median_us(3, [&] { (void)gemm_packed(p1, pw, cfg, opts()); }));
    t8.push_back(median_us(3, [&] { (void)gemm_packed(p8, pw, cfg, opts()); }));
  }
  std::sort(t1.begin(), t1.end());
  std::sort(t8.begin(), t8.end());
  const double m1 = t1[5], m8 = t8[5];
  char buf[160];
  std::snprintf(buf, sizeof buf, "1/1024/4096 %.0f us <= 8/1024/4096 %.0f us (%s)", m1, m8,
                format_config(cfg).c_str());
  if (m1 > m8) return fail(buf);
  return {true, buf};
}

Outcome packing_roundtrip() {
  std::mt19937_64 g(9009);
  for (int t = 0; t < 500; ++t) {
    const auto rows = testing::uniform(1, 64, g), cols = testing::uniform(1, 700, g);
    const int n = static_cast<int>(testing::uniform(1, 8, g));
    const auto m = testing::random_bipolar(rows, cols, n, g);
    for (bool tr : {false, true}) {
      const auto pk = decompose_pack(m, tr);
      const Word mask = pk.pad_mask();
      for (int i = 0; i < n; ++i)
        for (std::size_t r = 0; r < pk.rows(); ++r)
          if (pk.row(i, r)[pk.words_per_row() - 1] & mask) return fail("pad bits set, shape " + std::to_string(t));
      if (!tr && unpack(pk) != m) return fail("roundtrip differs, shape " + std::to_string(t));
    }
  }
  return {true, "500 shapes, pad bits zero in both orientations"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) g_workers = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::string(",") + argv[++i] + ",";
  }
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle equivalence", oracle_equivalence},
      {"bipolar bijection and affine law", bipolar_bijection},
      {"dequantization invariance", dequant_invariance},
      {"recovery identity", recovery_identity},
      {"config invariance", config_invariance},
      {"tuner soundness and dominance", tuner_soundness},
      {"desk-scale speedup >= 2x", desk_speedup},
      {"GEMV correctness and cost", gemv_cost},
      {"packing roundtrip and pad hygiene", packing_roundtrip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    if (!only.empty() && only.find("," + std::to_string(i + 1) + ",") == std::string::npos) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s %zu %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
