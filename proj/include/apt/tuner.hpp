#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "apt/tuning_table.hpp"
#include "apt/types.hpp"

namespace apt {

struct SearchLimits {
  std::size_t scratch_budget = 128 * 1024;  // bytes per worker
  std::size_t max_workers = 8;               // ceiling on w_b
};

// Search lattice. t_r and t_c are derived from the fragment grid.
inline constexpr std::size_t kBlockRowChoices[] = {8, 16, 32, 64, 128};
inline constexpr std::size_t kBlockDepthChoices[] = {128, 256, 512, 1024};
inline constexpr std::size_t kFragmentDimChoices[] = {4, 8, 16};
inline constexpr std::size_t kFragmentDepthChoices[] = {64, 128, 256};
inline constexpr std::size_t kWorkerChoices[] = {1, 2, 4, 8};

/// Every lattice config that satisfies the hyperparameter constraint for
/// (p, q) and fits the scratch budget. Block dims are capped at the next power
/// of two of the problem extent (but never below the smallest lattice value),
/// so small problems do not sweep oversized blocks.
std::vector<KernelConfig> enumerate_configs(std::size_t m, std::size_t n, std::size_t k, int p,
                                            int q, const SearchLimits& limits = {});

/// Fixed fallback: 8x8x128 fragments, one worker tile per block, b_k = 256 and
/// the largest square block from {64, 32, 16, 8} within the budget.
KernelConfig default_config(int p, int q, const SearchLimits& limits = {});

struct Measurement {
  KernelConfig config;
  double throughput = 0.0;  // ops/s, 2*M*N*K / median latency
  double median_seconds = 0.0;
};

struct TuneOptions {
  int trials = 3;
  int workers = 0;  // engine threads, 0: OpenMP default
  std::uint64_t seed = 42;
  SearchLimits limits;
  // called after each measured config; for progress output
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct TuneReport {
  KernelConfig best;
  double best_throughput = 0.0;
  KernelConfig default_cfg;
  double default_throughput = 0.0;
  std::vector<Measurement> measurements;
};

/// Benchmarks every enumerated config (plus the default config) on fixed-seed
/// random operands, stores the argmax in the table and returns it.
TuneReport tune(std::size_t m, std::size_t n, std::size_t k, int p, int q, TuningTable& table,
                const TuneOptions& opts = {});

// L1 distance between keys in log2 space over (m, n, k).
double key_distance(const ProblemKey& a, const ProblemKey& b);

struct LookupResult {
  ProblemKey key;  // matched table key
  TuningEntry entry;
  bool exact = false;
};

/// Exact hit, else the nearest key with the same (p, q), else the nearest key
/// overall. Ties go to higher throughput, then the smaller key.
LookupResult lookup(std::size_t m, std::size_t n, std::size_t k, int p, int q,
                    const TuningTable& table);

}  // namespace apt
