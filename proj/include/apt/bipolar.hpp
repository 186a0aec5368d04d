#pragma once

#include <cstddef>
#include <cstdint>

#include "apt/types.hpp"

namespace apt {

// Value of an n-bit bipolar pattern: sum over i of (2*bit_i - 1) * 2^i.
// Always odd, in [-(2^n - 1), 2^n - 1].
constexpr int bipolar_value(unsigned pattern, int bits) {
  return 2 * static_cast<int>(pattern & ((1u << bits) - 1)) - ((1 << bits) - 1);
}

// Inverse of bipolar_value for odd values in range.
constexpr unsigned bipolar_pattern(int value, int bits) {
  return static_cast<unsigned>((value + (1 << bits) - 1) / 2);
}

// Two's complement value of an n-bit pattern. For n = 1 this gives bit 0 -> 0,
// bit 1 -> -1.
constexpr int twos_complement_value(unsigned pattern, int bits) {
  const unsigned mask = (1u << bits) - 1;
  const unsigned sign = 1u << (bits - 1);
  pattern &= mask;
  return (pattern & sign) ? static_cast<int>(pattern) - (1 << bits) : static_cast<int>(pattern);
}

constexpr unsigned signed_pattern(int value, int bits) {
  return static_cast<unsigned>(value) & ((1u << bits) - 1);
}

constexpr unsigned flip_msb(unsigned pattern, int bits) { return pattern ^ (1u << (bits - 1)); }

/// Reinterprets a signed matrix as bipolar by flipping the most significant of
/// the n bits of every element. Element values map x -> 2x + 1.
IntMatrix signed_to_bipolar(const IntMatrix& m);

/// Exact inverse of signed_to_bipolar.
IntMatrix bipolar_to_signed(const IntMatrix& m);

/// Rewrites quantization parameters for bipolar codes:
/// scale' = s/2 and zero' = z - s/2, so that s*x + z == scale'*(2x+1) + zero'.
///
/// Halving is exact. The subtraction is not always representable, so its
/// rounding error is kept in zero_tail and zero + zero_tail == z - s/2 exactly.
QuantParams rewrite_quant_params(const QuantParams& p);

/// Correctly rounded value of scale*code + zero + zero_tail for one channel.
/// Two parameter sets that describe the same real affine map give
/// bit-identical results.
double dequantize(const QuantParams& p, std::size_t channel, int code);

}  // namespace apt
