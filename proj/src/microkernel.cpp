#include "apt/microkernel.hpp"

namespace apt {

std::int32_t dot1(std::span<const Word> a, std::span<const Word> b, std::size_t k_bits) {
  const std::size_t words = ceil_div(k_bits, kWordBits);
  std::int32_t mismatches = 0;
  for (std::size_t w = 0; w < words; ++w) mismatches += popcount_native(a[w] ^ b[w]);
  return static_cast<std::int32_t>(k_bits) - 2 * mismatches;
}

namespace {

// One activation row against four weight rows per pass keeps four running
// popcounts in registers and reuses each loaded activation word four times.
template <std::size_t KW>
void mma_fixed(const Word* a, std::size_t lda, std::size_t rows, const Word* b, std::size_t ldb,
               std::size_t cols, std::int32_t* acc, std::size_t ldc) {
  constexpr std::int32_t kBits = static_cast<std::int32_t>(KW * kWordBits);
  for (std::size_t u = 0; u < rows; ++u) {
    const Word* ar = a + u * lda;
    Word av[KW];
    for (std::size_t w = 0; w < KW; ++w) av[w] = ar[w];
    std::int32_t* out = acc + u * ldc;
    std::size_t v = 0;
    for (; v + 4 <= cols; v += 4) {
      const Word* b0 = b + v * ldb;
      const Word* b1 = b0 + ldb;
      const Word* b2 = b1 + ldb;
      const Word* b3 = b2 + ldb;
      int c0 = 0, c1 = 0, c2 = 0, c3 = 0;
      for (std::size_t w = 0; w < KW; ++w) {
        c0 += popcount_native(av[w] ^ b0[w]);
        c1 += popcount_native(av[w] ^ b1[w]);
        c2 += popcount_native(av[w] ^ b2[w]);
        c3 += popcount_native(av[w] ^ b3[w]);
      }
      out[v] += kBits - 2 * c0;
      out[v + 1] += kBits - 2 * c1;
      out[v + 2] += kBits - 2 * c2;
      out[v + 3] += kBits - 2 * c3;
    }
    for (; v < cols; ++v) {
      const Word* br = b + v * ldb;
      int c = 0;
      for (std::size_t w = 0; w < KW; ++w) c += popcount_native(av[w] ^ br[w]);
      out[v] += kBits - 2 * c;
    }
  }
}

void mma_generic(const Word* a, std::size_t lda, std::size_t rows, const Word* b, std::size_t ldb,
                 std::size_t cols, std::size_t k_words, std::int32_t* acc, std::size_t ldc) {
  const auto bits = static_cast<std::int32_t>(k_words * kWordBits);
  for (std::size_t u = 0; u < rows; ++u) {
    for (std::size_t v = 0; v < cols; ++v) {
      int c = 0;
      for (std::size_t w = 0; w < k_words; ++w) c += popcount_native(a[u * lda + w] ^ b[v * ldb + w]);
      acc[u * ldc + v] += bits - 2 * c;
    }
  }
}

}  // namespace

void mma_tile(const Word* a, std::size_t lda, std::size_t rows, const Word* b, std::size_t ldb,
              std::size_t cols, std::size_t k_words, std::int32_t* acc, std::size_t ldc) {
  switch (k_words) {
    case 1: return mma_fixed<1>(a, lda, rows, b, ldb, cols, acc, ldc);
    case 2: return mma_fixed<2>(a, lda, rows, b, ldb, cols, acc, ldc);
    case 4: return mma_fixed<4>(a, lda, rows, b, ldb, cols, acc, ldc);
    case 8: return mma_fixed<8>(a, lda, rows, b, ldb, cols, acc, ldc);
    default: return mma_generic(a, lda, rows, b, ldb, cols, k_words, acc, ldc);
  }
}

void fragment_mma(const TileView& a, const TileView& b, Fragment& frag) {
  if (frag.k_dim % kWordBits != 0) {
    throw Error(ErrorCode::ConfigInvalid, "fragment depth must be a multiple of the word width");
  }
  if (a.rows > frag.m_dim || b.rows > frag.n_dim || frag.acc.size() != frag.m_dim * frag.n_dim) {
    throw Error(ErrorCode::ShapeMismatch, "tile larger than fragment");
  }
  mma_tile(a.data, a.stride, a.rows, b.data, b.stride, b.rows, frag.k_dim / kWordBits,
           frag.acc.data(), frag.n_dim);
}

}  // namespace apt
