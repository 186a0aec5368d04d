#include "apt/bipolar.hpp"

#include <cmath>
#include <vector>

#include "exact_sum.hpp"

namespace apt {

IntMatrix signed_to_bipolar(const IntMatrix& m) {
  require_valid(m);
  if (m.encoding() != Encoding::SignedInt) {
    throw Error(ErrorCode::EncodingMismatch, "signed_to_bipolar expects a signed matrix");
  }
  const int n = m.bits();
  std::vector<Cell> out(m.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Cell>(bipolar_value(flip_msb(signed_pattern(m.data()[i], n), n), n));
  }
  return IntMatrix(m.rows(), m.cols(), n, Encoding::BipolarInt, std::move(out));
}

IntMatrix bipolar_to_signed(const IntMatrix& m) {
  require_valid(m);
  if (m.encoding() != Encoding::BipolarInt) {
    throw Error(ErrorCode::EncodingMismatch, "bipolar_to_signed expects a bipolar matrix");
  }
  const int n = m.bits();
  std::vector<Cell> out(m.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Cell>(
        twos_complement_value(flip_msb(bipolar_pattern(m.data()[i], n), n), n));
  }
  return IntMatrix(m.rows(), m.cols(), n, Encoding::SignedInt, std::move(out));
}

QuantParams rewrite_quant_params(const QuantParams& p) {
  require_valid(p);
  QuantParams out = p;
  for (std::size_t c = 0; c < p.channels(); ++c) {
    const double half = p.scale[c] / 2;
    if (half * 2 != p.scale[c]) {
      throw Error(ErrorCode::RangeViolation, "scale too small to halve exactly");
    }
    if (p.zero_tail[c] != 0.0) {
      throw Error(ErrorCode::EncodingMismatch, "parameters were already rewritten");
    }
    // two-sum: hi + lo == zero - half exactly
    const double a = p.zero[c];
    const double b = -half;
    const double hi = a + b;
    const double bv = hi - a;
    const double lo = (a - (hi - bv)) + (b - bv);
    out.scale[c] = half;
    out.zero[c] = hi;
    out.zero_tail[c] = lo;
  }
  return out;
}

double dequantize(const QuantParams& p, std::size_t channel, int code) {
  const double s = p.scale[channel];
  const double z = p.zero[channel];
  const double tail = p.zero_tail[channel];
  if (tail == 0.0) return std::fma(s, static_cast<double>(code), z);
  thread_local detail::ExactSum sum;
  sum.clear();
  sum.add_product(s, 1.0, code);
  sum.add(z);
  sum.add(tail);
  return sum.round();
}

}  // namespace apt
