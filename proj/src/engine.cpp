#include "apt/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <limits>

#include "apt/microkernel.hpp"

namespace apt {

bool fits_int32(std::size_t k, int p, int q) {
  const unsigned __int128 bound =
      static_cast<unsigned __int128>(k) * ((1u << p) - 1) * ((1u << q) - 1);
  return bound < (static_cast<unsigned __int128>(1) << 31);
}

BlockScratch::BlockScratch(const KernelConfig& config, int p, int q, std::size_t m, std::size_t n) {
  const std::size_t rows = std::min(config.b_m, m);
  const std::size_t cols = std::min(config.b_n, n);
  const std::size_t k_words = config.b_k / kWordBits;
  for (int s = 0; s < 2; ++s) {
    activation[s].assign(static_cast<std::size_t>(p) * rows * k_words, 0);
    weight[s].assign(static_cast<std::size_t>(q) * cols * k_words, 0);
  }
  intermediate.assign(static_cast<std::size_t>(p) * rows * q * cols, 0);
  output.assign(rows * cols, 0);
}

namespace {

// Copies k-words [word0, word0 + k_words) of `count` rows starting at `row0`
// from every plane into dst, plane after plane. Words past the row end are
// zero filled. Returns the number of words written.
std::size_t stage(const PackedPlanes& src, std::size_t row0, std::size_t count, std::size_t word0,
                  std::size_t k_words, Word* dst) {
  const std::size_t avail = word0 < src.words_per_row() ? src.words_per_row() - word0 : 0;
  const std::size_t copy = std::min(k_words, avail);
  for (int plane = 0; plane < src.bits(); ++plane) {
    for (std::size_t r = 0; r < count; ++r) {
      Word* out = dst + (static_cast<std::size_t>(plane) * count + r) * k_words;
      if (copy) std::memcpy(out, src.row(plane, row0 + r) + word0, copy * sizeof(Word));
      if (copy < k_words) std::memset(out + copy, 0, (k_words - copy) * sizeof(Word));
    }
  }
  return static_cast<std::size_t>(src.bits()) * count * k_words;
}

}  // namespace

void recover_tile(std::span<const std::int32_t> inter, std::size_t ld, std::size_t rows,
                  std::size_t cols, int p, int q, std::int32_t pad, std::span<std::int64_t> out) {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(rows * cols), 0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      const std::int64_t weight = std::int64_t{1} << (i + j);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::int32_t* src = inter.data() + (i * rows + r) * ld + j * cols;
        std::int64_t* dst = out.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += (std::int64_t{src[c]} - pad) * weight;
      }
    }
  }
}

Matrix<std::int64_t> recover_tile(const Matrix<std::int32_t>& inter, int p, int q) {
  if (inter.rows % p != 0 || inter.cols % q != 0) {
    throw Error(ErrorCode::ShapeMismatch, "intermediate tile is not p x q bands");
  }
  Matrix<std::int64_t> out(inter.rows / p, inter.cols / q);
  recover_tile(inter.data, inter.cols, out.rows, out.cols, p, q, 0, out.data);
  return out;
}

TileShape run_block(BlockCoord block, const PackedPlanes& x, const PackedPlanes& w,
                    const KernelConfig& cfg, BlockScratch& scratch, EngineStats* stats) {
  const int p = x.bits();
  const int q = w.bits();
  const std::size_t m0 = block.row * cfg.b_m;
  const std::size_t n0 = block.col * cfg.b_n;
  const std::size_t rows = std::min(cfg.b_m, x.rows() - m0);
  const std::size_t cols = std::min(cfg.b_n, w.rows() - n0);
  const std::size_t k = x.cols();
  const std::size_t step_words = cfg.b_k / kWordBits;
  const std::size_t frag_words = cfg.w_k / kWordBits;
  const std::size_t slices = cfg.b_k / cfg.w_k;
  const std::size_t steps = std::max<std::size_t>(1, ceil_div(k, cfg.b_k));

  // intermediate tile: (p * rows) x (q * cols), compact bands
  const std::size_t inter_rows = static_cast<std::size_t>(p) * rows;
  const std::size_t inter_cols = static_cast<std::size_t>(q) * cols;
  const std::size_t ld = inter_cols;
  std::int32_t* inter = scratch.intermediate.data();
  std::fill_n(inter, inter_rows * inter_cols, 0);

  // fragment grid of the nominal block, split into w_b worker tiles of t_r x t_c
  const std::size_t grid_cols = static_cast<std::size_t>(q) * cfg.b_n / cfg.w_n;
  const std::size_t tiles_across = grid_cols / cfg.t_c;

  EngineStats local;
  local.blocks = 1;
  local.depth_steps = steps;

  auto stage_step = [&](std::size_t t, int slot) {
    const std::size_t word0 = t * step_words;
    local.staged_activation_words +=
        stage(x, m0, rows, word0, step_words, scratch.activation[slot].data());
    local.staged_weight_words += stage(w, n0, cols, word0, step_words, scratch.weight[slot].data());
  };

  stage_step(0, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    const int slot = static_cast<int>(t & 1);
    if (t + 1 < steps) stage_step(t + 1, slot ^ 1);
    const Word* act = scratch.activation[slot].data();
    const Word* wgt = scratch.weight[slot].data();

    for (std::size_t tile = 0; tile < cfg.w_b; ++tile) {
      const std::size_t tile_row = tile / tiles_across;
      const std::size_t tile_col = tile % tiles_across;
      // one weight fragment column against every activation fragment in the tile
      for (std::size_t tc = 0; tc < cfg.t_c; ++tc) {
        const std::size_t col0 = (tile_col * cfg.t_c + tc) * cfg.w_n;
        if (col0 >= inter_cols) continue;
        const std::size_t ncols = std::min(cfg.w_n, inter_cols - col0);
        for (std::size_t tr = 0; tr < cfg.t_r; ++tr) {
          const std::size_t row0 = (tile_row * cfg.t_r + tr) * cfg.w_m;
          if (row0 >= inter_rows) continue;
          const std::size_t nrows = std::min(cfg.w_m, inter_rows - row0);
          for (std::size_t s = 0; s < slices; ++s) {
            mma_tile(act + row0 * step_words + s * frag_words, step_words, nrows,
                     wgt + col0 * step_words + s * frag_words, step_words, ncols, frag_words,
                     inter + row0 * ld + col0, ld);
          }
        }
      }
    }
  }

  // every zero-padded k position contributed +1 to each accumulator
  const auto pad = static_cast<std::int32_t>(steps * cfg.b_k - k);
  recover_tile(std::span<const std::int32_t>(inter, inter_rows * inter_cols), ld, rows, cols, p, q,
               pad, scratch.output);
  if (stats) *stats += local;
  return {rows, cols};
}

namespace {

void check_operands(const PackedPlanes& x, const PackedPlanes& w, const KernelConfig& cfg) {
  if (x.cols() != w.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "reduction lengths differ: " + std::to_string(x.cols()) +
                                              " vs " + std::to_string(w.cols()));
  }
  require_valid(cfg, x.bits(), w.bits());
  const std::size_t k_phys = std::max<std::size_t>(1, ceil_div(x.cols(), cfg.b_k)) * cfg.b_k;
  if (k_phys > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw Error(ErrorCode::OverflowRisk, "K too deep for 32-bit plane accumulators");
  }
}

template <typename Out>
Matrix<Out> gemm_impl(const PackedPlanes& x, const PackedPlanes& w, const KernelConfig& cfg,
                      const GemmOptions& opts) {
  check_operands(x, w, cfg);
  const std::size_t m = x.rows();
  const std::size_t n = w.rows();
  Matrix<Out> y(m, n);
  if (m == 0 || n == 0) return y;

  const std::size_t grid_cols = ceil_div(n, cfg.b_n);
  const std::size_t blocks = ceil_div(m, cfg.b_m) * grid_cols;
  int workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), blocks));

  EngineStats total;
  std::atomic<bool> narrowed_out{false};

#pragma omp parallel num_threads(workers)
  {
    BlockScratch scratch(cfg, x.bits(), w.bits(), m, n);
    EngineStats local;
    // blocks are handed out row-major from a shared counter
#pragma omp for schedule(dynamic, 1) nowait
    for (std::size_t b = 0; b < blocks; ++b) {
      const BlockCoord coord{b / grid_cols, b % grid_cols};
      const TileShape tile = run_block(coord, x, w, cfg, scratch, opts.stats ? &local : nullptr);
      const std::size_t m0 = coord.row * cfg.b_m;
      const std::size_t n0 = coord.col * cfg.b_n;
      for (std::size_t r = 0; r < tile.rows; ++r) {
        const std::int64_t* src = scratch.output.data() + r * tile.cols;
        Out* dst = y.data.data() + (m0 + r) * n + n0;
        for (std::size_t c = 0; c < tile.cols; ++c) {
          if constexpr (sizeof(Out) < sizeof(std::int64_t)) {
            if (src[c] < std::numeric_limits<Out>::min() || src[c] > std::numeric_limits<Out>::max()) {
              narrowed_out.store(true, std::memory_order_relaxed);
            }
          }
          dst[c] = static_cast<Out>(src[c]);
        }
      }
    }
    if (opts.stats) {
#pragma omp critical(apt_engine_stats)
      total += local;
    }
  }

  if (narrowed_out.load()) throw Error(ErrorCode::OverflowRisk, "result exceeds 32 bits");
  if (opts.stats) *opts.stats += total;
  return y;
}

struct PackedPair {
  PackedPlanes x;
  PackedPlanes w;
};

PackedPair pack_problem(const GemmProblem& problem) {
  if (problem.x == nullptr || problem.w == nullptr) {
    throw Error(ErrorCode::ShapeMismatch, "problem is missing an operand");
  }
  const IntMatrix& x = *problem.x;
  const IntMatrix& w = *problem.w;
  if (x.encoding() != Encoding::BipolarInt || w.encoding() != Encoding::BipolarInt) {
    throw Error(ErrorCode::EncodingMismatch, "the engine multiplies bipolar operands");
  }
  if (x.cols() != w.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "X is " + std::to_string(x.rows()) + "x" +
                                              std::to_string(x.cols()) + ", W is " +
                                              std::to_string(w.rows()) + "x" +
                                              std::to_string(w.cols()));
  }
  require_valid(problem.config, x.bits(), w.bits());
  return {decompose_pack(x), decompose_pack(w)};
}

}  // namespace

Matrix<std::int32_t> gemm_packed(const PackedPlanes& x, const PackedPlanes& w,
                                 const KernelConfig& config, const GemmOptions& opts) {
  if (!fits_int32(x.cols(), x.bits(), w.bits())) {
    throw Error(ErrorCode::OverflowRisk, "K=" + std::to_string(x.cols()) + " p=" +
                                             std::to_string(x.bits()) + " q=" +
                                             std::to_string(w.bits()) + " may exceed 32 bits");
  }
  return gemm_impl<std::int32_t>(x, w, config, opts);
}

Matrix<std::int64_t> gemm_packed_wide(const PackedPlanes& x, const PackedPlanes& w,
                                      const KernelConfig& config, const GemmOptions& opts) {
  return gemm_impl<std::int64_t>(x, w, config, opts);
}

Matrix<std::int32_t> gemm_ap(const GemmProblem& problem, const GemmOptions& opts) {
  const auto ops = pack_problem(problem);
  return gemm_packed(ops.x, ops.w, problem.config, opts);
}

Matrix<std::int64_t> gemm_ap_wide(const GemmProblem& problem, const GemmOptions& opts) {
  const auto ops = pack_problem(problem);
  return gemm_packed_wide(ops.x, ops.w, problem.config, opts);
}

Matrix<std::int32_t> gemv_ap(const GemmProblem& problem, const GemmOptions& opts) {
  if (problem.x == nullptr || problem.x->rows() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "gemv needs a single activation row");
  }
  return gemm_ap(problem, opts);
}

}  // namespace apt
