#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apt/common.hpp"
#include "apt/types.hpp"

namespace apt {

/// n bit-planes of a bipolar matrix packed into words and concatenated into a
/// single buffer. Plane i holds bit i of every element; within a row, element
/// c sits at bit (c % kWordBits) of word (c / kWordBits). Padding bits past
/// `cols` are zero.
class PackedPlanes {
 public:
  PackedPlanes() = default;
  PackedPlanes(std::size_t rows, std::size_t cols, int bits)
      : rows_(rows),
        cols_(cols),
        bits_(bits),
        words_per_row_(ceil_div(cols, kWordBits)),
        words_(static_cast<std::size_t>(bits) * rows * words_per_row_, Word{0}) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int bits() const noexcept { return bits_; }
  std::size_t words_per_row() const noexcept { return words_per_row_; }
  std::size_t plane_words() const noexcept { return rows_ * words_per_row_; }

  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> words() noexcept { return words_; }

  const Word* row(int plane, std::size_t r) const {
    return words_.data() + static_cast<std::size_t>(plane) * plane_words() + r * words_per_row_;
  }
  Word* row(int plane, std::size_t r) {
    return words_.data() + static_cast<std::size_t>(plane) * plane_words() + r * words_per_row_;
  }

  bool bit(int plane, std::size_t r, std::size_t c) const {
    return (row(plane, r)[c / kWordBits] >> (c % kWordBits)) & 1u;
  }

  // Mask of the bits of a row's last word that lie past `cols`.
  Word pad_mask() const noexcept {
    const std::size_t used = cols_ % kWordBits;
    return used == 0 ? Word{0} : static_cast<Word>(~Word{0} << used);
  }

  friend bool operator==(const PackedPlanes&, const PackedPlanes&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int bits_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<Word> words_;
};

/// Decomposes a bipolar matrix into packed bit-planes. With `transpose` set the
/// matrix is packed as its transpose, so a K x N operand comes out N rows of K
/// bits and both operands share a word-contiguous reduction axis.
PackedPlanes decompose_pack(const IntMatrix& m, bool transpose = false);

/// Inverse of decompose_pack(m, false).
IntMatrix unpack(const PackedPlanes& p);

}  // namespace apt
