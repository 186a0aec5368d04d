#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "apt/tuner.hpp"
#include "apt/tuning_table.hpp"
#include "apt/types.hpp"

namespace apt {

enum class Suite { General, Prefill, Decode, Custom };

struct Shape {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
};

// p: activation bits, q: weight bits. "W1A2" is q = 1, p = 2.
struct Precision {
  int p = 0;
  int q = 0;
};

Suite parse_suite(std::string_view name);
const char* suite_name(Suite s);

// Accepts "p:q" or "WqAp"; lists are comma separated.
std::vector<Precision> parse_precisions(std::string_view list);
// "M/N/K"
Shape parse_shape(std::string_view text);
std::string format_shape(const Shape& s);

// Workload shapes per suite; shapes with a 14336 extent only when `large`.
std::vector<Shape> suite_shapes(Suite suite, bool large);

/// Plain single-threaded int32 triple loop over unpacked element values,
/// W stored N x K like the engine's weights.
Matrix<std::int32_t> baseline_int32(const std::vector<std::int32_t>& x,
                                    const std::vector<std::int32_t>& w, std::size_t m,
                                    std::size_t n, std::size_t k);

struct BenchOptions {
  int trials = 5;
  int workers = 0;
  bool large = false;
  bool verify = false;
  bool tune_missing = true;  // tune absent keys; otherwise approximate lookup or default
  std::uint64_t seed = 42;
  TuneOptions tune;
};

struct BenchRow {
  std::string suite;
  Shape shape;
  Precision precision;
  KernelConfig config;
  std::string config_source;  // "table", "nearest", "tuned" or "default"
  double engine_us = 0.0;
  double baseline_us = 0.0;
  double speedup = 0.0;
  double gops = 0.0;
  bool verified = false;  // checked against the oracle
};

struct BenchReport {
  int workers = 0;
  std::vector<BenchRow> rows;
  bool verify_failed = false;
};

/// Times the engine (activation packing included, weights packed once) and the
/// int32 baseline on the same fixed-seed operands for every (shape, precision).
BenchReport run_suite(Suite suite, const std::vector<Shape>& custom,
                      const std::vector<Precision>& precisions, TuningTable& table,
                      const BenchOptions& opts);

void print_report(std::ostream& os, const BenchReport& report);
// One "suite shape p q engine_us baseline_us speedup gops" line per row.
void write_report_lines(std::ostream& os, const BenchReport& report);

struct DemoReport {
  std::size_t tokens = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  int p = 0;
  int q = 0;
  double max_abs_error = 0.0;  // vs double precision float matmul
  double max_rel_error = 0.0;  // max_abs_error / max |reference|
  std::size_t path_mismatches = 0;
  bool paths_identical = false;
};

/// Quantizes random float activations (tokens x cols, per-tensor, p bits) and
/// weights (rows x cols, per-row, q bits) with a min-max quantizer, then
/// dequantizes the layer output twice: from the signed-INT product and from
/// the bipolar engine product with rewritten parameters. The epilogue is
/// evaluated exactly and rounded once, so both paths must agree bit for bit.
DemoReport demo_quant_layer(std::size_t rows, std::size_t cols, int p, int q, std::uint64_t seed,
                            std::size_t tokens = 16);

void print_demo(std::ostream& os, const DemoReport& report);

}  // namespace apt
