#include "apt/bitplane.hpp"

#include <algorithm>

#include "apt/bipolar.hpp"

namespace apt {

PackedPlanes decompose_pack(const IntMatrix& m, bool transpose) {
  require_valid(m);
  if (m.encoding() != Encoding::BipolarInt) {
    throw Error(ErrorCode::EncodingMismatch, "bit-plane packing needs a bipolar matrix");
  }
  const int n = m.bits();
  const std::size_t rows = transpose ? m.cols() : m.rows();
  const std::size_t cols = transpose ? m.rows() : m.cols();
  PackedPlanes out(rows, cols, n);
  if (rows == 0 || cols == 0) return out;

  const std::size_t words_per_row = out.words_per_row();
  const auto src = m.data();
  // element (r, c) of the packed view
  auto element = [&](std::size_t r, std::size_t c) {
    return transpose ? src[c * m.cols() + r] : src[r * m.cols() + c];
  };

  // rows are independent; each writes its own words in every plane
#pragma omp parallel for schedule(static) if (rows * cols > (1u << 18))
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t w = 0; w < words_per_row; ++w) {
      Word acc[kMaxBits] = {};
      const std::size_t c0 = w * kWordBits;
      const std::size_t c1 = std::min(cols, c0 + kWordBits);
      for (std::size_t c = c0; c < c1; ++c) {
        const unsigned pattern = bipolar_pattern(element(r, c), n);
        const unsigned shift = static_cast<unsigned>(c - c0);
        for (int i = 0; i < n; ++i) acc[i] |= static_cast<Word>((pattern >> i) & 1u) << shift;
      }
      for (int i = 0; i < n; ++i) out.row(i, r)[w] = acc[i];
    }
  }
  return out;
}

IntMatrix unpack(const PackedPlanes& p) {
  const int n = p.bits();
  std::vector<Cell> data(p.rows() * p.cols());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      unsigned pattern = 0;
      for (int i = 0; i < n; ++i) pattern |= static_cast<unsigned>(p.bit(i, r, c)) << i;
      data[r * p.cols() + c] = static_cast<Cell>(bipolar_value(pattern, n));
    }
  }
  return IntMatrix(p.rows(), p.cols(), n, Encoding::BipolarInt, std::move(data));
}

}  // namespace apt
