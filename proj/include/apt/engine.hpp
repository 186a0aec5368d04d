#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apt/bitplane.hpp"
#include "apt/common.hpp"
#include "apt/types.hpp"

namespace apt {

// Staging counters, summed over all blocks of one call.
struct EngineStats {
  std::uint64_t blocks = 0;
  std::uint64_t depth_steps = 0;
  std::uint64_t staged_weight_words = 0;
  std::uint64_t staged_activation_words = 0;

  EngineStats& operator+=(const EngineStats& o) {
    blocks += o.blocks;
    depth_steps += o.depth_steps;
    staged_weight_words += o.staged_weight_words;
    staged_activation_words += o.staged_activation_words;
    return *this;
  }
};

struct GemmOptions {
  int workers = 0;  // 0: OpenMP default
  EngineStats* stats = nullptr;
};

/// Y = X * W^T for bipolar X (M x K, p bits) and W (N x K, q bits).
struct GemmProblem {
  const IntMatrix* x = nullptr;
  const IntMatrix* w = nullptr;
  KernelConfig config;
};

// True when every output of a K-deep p x q-bit product fits in int32.
bool fits_int32(std::size_t k, int p, int q);

Matrix<std::int32_t> gemm_ap(const GemmProblem& problem, const GemmOptions& opts = {});
Matrix<std::int64_t> gemm_ap_wide(const GemmProblem& problem, const GemmOptions& opts = {});

// M == 1 path; same result as row 0 of gemm_ap.
Matrix<std::int32_t> gemv_ap(const GemmProblem& problem, const GemmOptions& opts = {});

// Operands already decomposed; both must share the reduction length (cols).
Matrix<std::int32_t> gemm_packed(const PackedPlanes& x, const PackedPlanes& w,
                                 const KernelConfig& config, const GemmOptions& opts = {});
Matrix<std::int64_t> gemm_packed_wide(const PackedPlanes& x, const PackedPlanes& w,
                                      const KernelConfig& config, const GemmOptions& opts = {});

/// Block-local working memory owned by one worker.
///
/// Two staging slots alternate between depth steps. The intermediate tile holds
/// every plane pair: pair (i, j) sits in row band i, column band j. Rows and
/// columns past the matrix edge are never allocated; a block with fewer live
/// rows (the M = 1 case) uses proportionally less of each buffer.
class BlockScratch {
 public:
  BlockScratch(const KernelConfig& config, int p, int q, std::size_t m, std::size_t n);

  std::vector<Word> activation[2];
  std::vector<Word> weight[2];
  std::vector<std::int32_t> intermediate;
  std::vector<std::int64_t> output;
};

struct BlockCoord {
  std::size_t row = 0;  // block index along M
  std::size_t col = 0;  // block index along N
};

struct TileShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Computes one output block into scratch.output (row-major, tile.cols wide)
/// and returns the live extent of the tile.
TileShape run_block(BlockCoord block, const PackedPlanes& x, const PackedPlanes& w,
                    const KernelConfig& config, BlockScratch& scratch, EngineStats* stats = nullptr);

/// Shift-and-add recovery: out[r][c] = sum over (i, j) of
/// (inter[i*rows + r][j*cols + c] - pad) * 2^(i+j). `inter` has leading
/// dimension ld; `out` is rows x cols.
void recover_tile(std::span<const std::int32_t> inter, std::size_t ld, std::size_t rows,
                  std::size_t cols, int p, int q, std::int32_t pad, std::span<std::int64_t> out);

// Convenience form over a (p*rows) x (q*cols) intermediate matrix.
Matrix<std::int64_t> recover_tile(const Matrix<std::int32_t>& inter, int p, int q);

}  // namespace apt
