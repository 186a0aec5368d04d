#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apt/common.hpp"

namespace apt {

// SWAR population count, no hardware support assumed.
constexpr int popcount_portable(Word x) {
  if constexpr (sizeof(Word) == 8) {
    std::uint64_t v = x;
    v = v - ((v >> 1) & 0x5555555555555555ULL);
    v = (v & 0x3333333333333333ULL) + ((v >> 2) & 0x3333333333333333ULL);
    v = (v + (v >> 4)) & 0x0f0f0f0f0f0f0f0fULL;
    return static_cast<int>((v * 0x0101010101010101ULL) >> 56);
  } else {
    std::uint32_t v = x;
    v = v - ((v >> 1) & 0x55555555u);
    v = (v & 0x33333333u) + ((v >> 2) & 0x33333333u);
    v = (v + (v >> 4)) & 0x0f0f0f0fu;
    return static_cast<int>((v * 0x01010101u) >> 24);
  }
}

// Lowers to the POPCNT instruction where the target has one.
inline int popcount_native(Word x) { return std::popcount(x); }

/// Bipolar dot product of two packed +-1 vectors:
/// k_bits - 2 * popcount(a XOR b). Bits past k_bits must be zero in both; any
/// zero padding inside k_bits counts as +1 per position and is the caller's to
/// subtract.
std::int32_t dot1(std::span<const Word> a, std::span<const Word> b, std::size_t k_bits);

// Rows of packed bits: row r starts at data + r * stride.
struct TileView {
  const Word* data = nullptr;
  std::size_t rows = 0;
  std::size_t stride = 0;
};

/// W_M x W_N tile of 32-bit accumulators, the unit the microkernel updates.
struct Fragment {
  std::size_t m_dim = 8;
  std::size_t n_dim = 8;
  std::size_t k_dim = 128;
  std::vector<std::int32_t> acc;

  Fragment() : acc(m_dim * n_dim, 0) {}
  Fragment(std::size_t m, std::size_t n, std::size_t k) : m_dim(m), n_dim(n), k_dim(k), acc(m * n, 0) {}

  std::int32_t at(std::size_t u, std::size_t v) const { return acc[u * n_dim + v]; }
};

/// acc[u][v] += dot1(a[u], b[v], k_dim) over the first k_dim bits of each row.
void fragment_mma(const TileView& a, const TileView& b, Fragment& frag);

/// Raw kernel used by the engine: acc[u*ldc + v] += sum over k_words of
/// (64 or 32) - 2*popcount(a[u] ^ b[v]) for u < rows, v < cols.
void mma_tile(const Word* a, std::size_t lda, std::size_t rows, const Word* b, std::size_t ldb,
              std::size_t cols, std::size_t k_words, std::int32_t* acc, std::size_t ldc);

}  // namespace apt
