#include "apt/tuner.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <random>

#include "apt/bitplane.hpp"
#include "apt/engine.hpp"
#include "workload.hpp"

namespace apt {

namespace {

std::size_t cap_for(std::size_t extent, std::size_t floor) {
  return std::max(floor, std::bit_ceil(std::max<std::size_t>(extent, 1)));
}

}  // namespace

std::vector<KernelConfig> enumerate_configs(std::size_t m, std::size_t n, std::size_t k, int p,
                                            int q, const SearchLimits& limits) {
  if (p < 1 || p > kMaxBits || q < 1 || q > kMaxBits) {
    throw Error(ErrorCode::RangeViolation, "bit widths must lie in [1, 8]");
  }
  const std::size_t m_cap = cap_for(m, kBlockRowChoices[0]);
  const std::size_t n_cap = cap_for(n, kBlockRowChoices[0]);
  const std::size_t k_cap = cap_for(k, kBlockDepthChoices[0]);

  std::vector<KernelConfig> out;
  for (std::size_t b_m : kBlockRowChoices) {
    if (b_m > m_cap) continue;
    for (std::size_t b_n : kBlockRowChoices) {
      if (b_n > n_cap) continue;
      for (std::size_t b_k : kBlockDepthChoices) {
        if (b_k > k_cap) continue;
        for (std::size_t frag : kFragmentDimChoices) {
          const std::size_t rows = static_cast<std::size_t>(p) * b_m;
          const std::size_t cols = static_cast<std::size_t>(q) * b_n;
          if (rows % frag != 0 || cols % frag != 0) continue;
          const std::size_t grid_rows = rows / frag;
          const std::size_t grid_cols = cols / frag;
          for (std::size_t w_k : kFragmentDepthChoices) {
            if (w_k % kWordBits != 0 || b_k % w_k != 0) continue;
            for (std::size_t w_b : kWorkerChoices) {
              if (w_b > limits.max_workers) continue;
              for (std::size_t t_r = 1; t_r <= grid_rows; ++t_r) {
                if (grid_rows % t_r != 0) continue;
                const std::size_t worker_rows = grid_rows / t_r;
                if (w_b % worker_rows != 0) continue;
                const std::size_t worker_cols = w_b / worker_rows;
                if (grid_cols % worker_cols != 0) continue;
                const KernelConfig c{b_m, b_n, b_k, t_r, grid_cols / worker_cols, w_b, frag, frag, w_k};
                if (scratch_footprint(c, p, q) > limits.scratch_budget) continue;
                out.push_back(c);
              }
            }
          }
        }
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::NoFeasibleConfig,
                "scratch budget " + std::to_string(limits.scratch_budget) + " bytes excludes every config");
  }
  return out;
}

KernelConfig default_config(int p, int q, const SearchLimits& limits) {
  for (std::size_t b : {64, 32, 16, 8}) {
    KernelConfig c{b, b, 256, 0, 0, 1, 8, 8, 128};
    c.t_r = static_cast<std::size_t>(p) * b / c.w_m;
    c.t_c = static_cast<std::size_t>(q) * b / c.w_n;
    if (!config_violation(c, p, q) && scratch_footprint(c, p, q) <= limits.scratch_budget) return c;
  }
  throw Error(ErrorCode::NoFeasibleConfig, "default config does not fit the scratch budget");
}

TuneReport tune(std::size_t m, std::size_t n, std::size_t k, int p, int q, TuningTable& table,
                const TuneOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorCode::RangeViolation, "trials must be positive");
  std::vector<KernelConfig> candidates = enumerate_configs(m, n, k, p, q, opts.limits);
  const KernelConfig fallback = default_config(p, q, opts.limits);
  if (std::find(candidates.begin(), candidates.end(), fallback) == candidates.end()) {
    candidates.push_back(fallback);
  }

  std::mt19937_64 rng(opts.seed);
  const PackedPlanes x = decompose_pack(detail::random_bipolar(m, k, p, rng));
  const PackedPlanes w = decompose_pack(detail::random_bipolar(n, k, q, rng));
  const double ops = 2.0 * static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(k);
  const bool narrow = fits_int32(k, p, q);
  GemmOptions gemm_opts;
  gemm_opts.workers = opts.workers;

  TuneReport report;
  report.measurements.reserve(candidates.size());
  std::vector<double> samples(static_cast<std::size_t>(opts.trials));
  for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
    const KernelConfig& cfg = candidates[idx];
    auto run = [&] {
      if (narrow) {
        (void)gemm_packed(x, w, cfg, gemm_opts);
      } else {
        (void)gemm_packed_wide(x, w, cfg, gemm_opts);
      }
    };
    run();  // warm-up
    for (auto& s : samples) {
      const auto t0 = std::chrono::steady_clock::now();
      run();
      s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    const double median = detail::median(samples);
    Measurement meas{cfg, ops / std::max(median, 1e-12), median};
    if (cfg == fallback) {
      report.default_cfg = cfg;
      report.default_throughput = meas.throughput;
    }
    report.measurements.push_back(meas);
    if (opts.progress) opts.progress(idx + 1, candidates.size());
  }

  const auto best = std::max_element(
      report.measurements.begin(), report.measurements.end(),
      [](const Measurement& a, const Measurement& b) { return a.throughput < b.throughput; });
  report.best = best->config;
  report.best_throughput = best->throughput;
  table.insert(ProblemKey{m, n, k, p, q}, TuningEntry{report.best, report.best_throughput});
  return report;
}

double key_distance(const ProblemKey& a, const ProblemKey& b) {
  auto lg = [](std::size_t v) { return std::log2(static_cast<double>(std::max<std::size_t>(v, 1))); };
  return std::abs(lg(a.m) - lg(b.m)) + std::abs(lg(a.n) - lg(b.n)) + std::abs(lg(a.k) - lg(b.k));
}

namespace {

// Re-fits a config measured for other bit widths to (p, q): block and
// fragment dims are kept where possible, the worker tiling is rebuilt.
KernelConfig adapt_config(KernelConfig c, int p, int q) {
  if (!config_violation(c, p, q)) return c;
  for (std::size_t frag : {c.w_m, std::size_t{8}, std::size_t{4}}) {
    KernelConfig a = c;
    a.w_m = a.w_n = frag;
    a.w_b = 1;
    if ((p * a.b_m) % frag != 0 || (q * a.b_n) % frag != 0) continue;
    a.t_r = p * a.b_m / frag;
    a.t_c = q * a.b_n / frag;
    if (!config_violation(a, p, q)) return a;
  }
  return default_config(p, q);
}

}  // namespace

LookupResult lookup(std::size_t m, std::size_t n, std::size_t k, int p, int q,
                    const TuningTable& table) {
  if (table.empty()) throw Error(ErrorCode::EmptyTable, "tuning table has no entries");
  const ProblemKey query{m, n, k, p, q};
  if (const TuningEntry* hit = table.find(query)) return {query, *hit, true};

  const bool any_same_bits =
      std::any_of(table.entries().begin(), table.entries().end(),
                  [&](const auto& kv) { return kv.first.p == p && kv.first.q == q; });
  const std::pair<const ProblemKey, TuningEntry>* best = nullptr;
  double best_d = 0.0;
  for (const auto& kv : table.entries()) {
    if (any_same_bits && (kv.first.p != p || kv.first.q != q)) continue;
    const double d = key_distance(query, kv.first);
    // entries iterate in ascending key order, so strict comparisons keep the smaller key on ties
    if (best == nullptr || d < best_d ||
        (d == best_d && kv.second.throughput > best->second.throughput)) {
      best = &kv;
      best_d = d;
    }
  }
  LookupResult r{best->first, best->second, false};
  r.entry.config = adapt_config(r.entry.config, p, q);
  return r;
}

}  // namespace apt
