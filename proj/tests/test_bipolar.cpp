#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>

#include <boost/multiprecision/cpp_int.hpp>

#include "apt/bipolar.hpp"
#include "test_util.hpp"

namespace apt {
namespace {

using boost::multiprecision::cpp_int;

// Term-by-term bipolar valuation of a bit string written MSB first.
int eval_bits(const char* bits) {
  const int n = static_cast<int>(std::strlen(bits));
  int v = 0;
  for (int i = 0; i < n; ++i) v += (bits[n - 1 - i] == '1' ? 1 : -1) * (1 << i);
  return v;
}

TEST(Bipolar, ValueExamples) {
  EXPECT_EQ(bipolar_value(0b11, 2), 3);
  EXPECT_EQ(bipolar_value(0b00, 2), -3);
  EXPECT_EQ(bipolar_value(0b101, 3), 3);
  EXPECT_EQ(eval_bits("101"), 3);
}

TEST(Bipolar, ValueMatchesDefinitionExhaustive) {
  for (int n = 1; n <= 8; ++n) {
    for (unsigned pat = 0; pat < (1u << n); ++pat) {
      int v = 0;
      for (int i = 0; i < n; ++i) v += (2 * static_cast<int>((pat >> i) & 1u) - 1) * (1 << i);
      ASSERT_EQ(bipolar_value(pat, n), v);
      ASSERT_EQ(bipolar_pattern(v, n), pat);
      ASSERT_TRUE(representable(v, n, Encoding::BipolarInt));
    }
  }
}

TEST(Bipolar, ConversionExamples) {
  IntMatrix m(1, 2, 2, Encoding::SignedInt, {1, -2});
  const auto b = signed_to_bipolar(m);
  EXPECT_EQ(b.encoding(), Encoding::BipolarInt);
  EXPECT_EQ(b.at(0, 0), 3);
  EXPECT_EQ(b.at(0, 1), -3);
  EXPECT_EQ(bipolar_to_signed(b), m);
}

TEST(Bipolar, FourBitPatternsAffine) {
  for (unsigned pat = 0; pat < 16; ++pat) {
    const int x = pat & 8 ? static_cast<int>(pat) - 16 : static_cast<int>(pat);
    IntMatrix m(1, 1, 4, Encoding::SignedInt, {static_cast<Cell>(x)});
    EXPECT_EQ(signed_to_bipolar(m).at(0, 0), 2 * x + 1);
  }
}

TEST(Bipolar, OneBitConvention) {
  // one-bit two's complement holds {0, -1}; they map to +1 and -1
  IntMatrix m(1, 2, 1, Encoding::SignedInt, {0, -1});
  const auto b = signed_to_bipolar(m);
  EXPECT_EQ(b.at(0, 0), 1);
  EXPECT_EQ(b.at(0, 1), -1);
}

TEST(Bipolar, RandomRoundtrip) {
  for (int n = 1; n <= 8; ++n) {
    const auto m = testing::random_signed(13, 11, n);
    const auto b = signed_to_bipolar(m);
    EXPECT_EQ(bipolar_to_signed(b), m);
    for (std::size_t i = 0; i < m.data().size(); ++i) EXPECT_EQ(b.data()[i], 2 * m.data()[i] + 1);
  }
}

TEST(Bipolar, WrongEncodingRejected) {
  const auto s = testing::random_signed(2, 2, 3);
  const auto b = testing::random_bipolar(2, 2, 3);
  try {
    signed_to_bipolar(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EncodingMismatch);
  }
  EXPECT_THROW(bipolar_to_signed(s), Error);
  IntMatrix bad(1, 1, 2, Encoding::SignedInt, {5});
  EXPECT_THROW(signed_to_bipolar(bad), Error);
}

TEST(Rewrite, Examples) {
  auto r = rewrite_quant_params(QuantParams::per_tensor(1.0, 0.0));
  EXPECT_EQ(r.scale[0], 0.5);
  EXPECT_EQ(r.zero[0], -0.5);
  EXPECT_EQ(r.zero_tail[0], 0.0);
  r = rewrite_quant_params(QuantParams::per_tensor(0.25, 3.0));
  EXPECT_EQ(r.scale[0], 0.125);
  EXPECT_EQ(r.zero[0], 2.875);
  EXPECT_EQ(r.zero_tail[0], 0.0);
}

TEST(Rewrite, TwiceRejected) {
  auto r = rewrite_quant_params(QuantParams::per_tensor(1.0, 1e17));
  ASSERT_NE(r.zero_tail[0], 0.0);  // 1e17 - 0.5 is not a double
  EXPECT_THROW(rewrite_quant_params(r), Error);
}

// Exact value of a finite double as mantissa * 2^exp.
struct Exact {
  cpp_int mant;
  int exp;
};

Exact exact(double d) {
  int e = 0;
  const double f = std::frexp(d, &e);
  const auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
  return {cpp_int(m), e - 53};
}

// Correctly rounded (ties to even) double of sum(mant * 2^exp). Normal range only.
double round_exact(const std::vector<Exact>& terms) {
  int lo = terms[0].exp;
  for (const auto& t : terms) lo = std::min(lo, t.exp);
  cpp_int total = 0;
  for (const auto& t : terms) total += t.mant << (t.exp - lo);
  if (total == 0) return 0.0;
  const bool neg = total < 0;
  cpp_int mag = neg ? cpp_int(-total) : total;
  const int len = static_cast<int>(boost::multiprecision::msb(mag)) + 1;
  int shift = len - 53;
  if (shift > 0) {
    const cpp_int rem = mag & ((cpp_int(1) << shift) - 1);
    const cpp_int half = cpp_int(1) << (shift - 1);
    mag >>= shift;
    if (rem > half || (rem == half && (mag & 1) != 0)) mag += 1;
  } else {
    shift = 0;
  }
  const double r = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(mag)), lo + shift);
  return neg ? -r : r;
}

double reference(const QuantParams& p, int code) {
  std::vector<Exact> t;
  Exact s = exact(p.scale[0]);
  s.mant *= code;
  t.push_back(s);
  if (p.zero[0] != 0.0) t.push_back(exact(p.zero[0]));
  if (p.zero_tail[0] != 0.0) t.push_back(exact(p.zero_tail[0]));
  return round_exact(t);
}

double random_double(std::mt19937_64& g, int min_exp, int max_exp) {
  std::uniform_real_distribution<double> mant(0.5, 1.0);
  const int e = static_cast<int>(testing::uniform(0, max_exp - min_exp, g)) + min_exp;
  const double v = std::ldexp(mant(g), e);
  return testing::uniform(0, 1, g) ? v : -v;
}

TEST(Dequantize, MatchesExactArithmetic) {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const double s = std::abs(random_double(g, -40, 10));
    const double z = random_double(g, -40, 10);
    const auto p = QuantParams::per_tensor(s, z);
    const auto r = rewrite_quant_params(p);
    const int n = static_cast<int>(testing::uniform(1, 8, g));
    const int x = static_cast<int>(testing::uniform(0, (1u << n) - 1, g)) - (1 << (n - 1));
    ASSERT_EQ(std::bit_cast<std::uint64_t>(dequantize(p, 0, x)),
              std::bit_cast<std::uint64_t>(reference(p, x)));
    ASSERT_EQ(std::bit_cast<std::uint64_t>(dequantize(r, 0, 2 * x + 1)),
              std::bit_cast<std::uint64_t>(reference(r, 2 * x + 1)));
  }
}

TEST(Dequantize, InvariantUnderRewrite) {
  std::mt19937_64 g(11);
  std::size_t tails = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double s = std::abs(random_double(g, -20, 4));
    const double z = random_double(g, -20, 8);
    const auto p = QuantParams::per_tensor(s, z);
    const auto r = rewrite_quant_params(p);
    tails += r.zero_tail[0] != 0.0;
    for (int n = 1; n <= 8; ++n) {
      for (int x = -(1 << (n - 1)); x < (1 << (n - 1)); ++x) {
        ASSERT_EQ(std::bit_cast<std::uint64_t>(dequantize(p, 0, x)),
                  std::bit_cast<std::uint64_t>(dequantize(r, 0, 2 * x + 1)))
            << "s=" << s << " z=" << z << " x=" << x;
      }
    }
  }
  // the tail is what keeps the map exact; random inputs do exercise it
  EXPECT_GT(tails, 0u);
}

TEST(Dequantize, PerChannel) {
  const auto p = QuantParams::per_channel({0.5, 0.75}, {1.0, -2.0});
  const auto r = rewrite_quant_params(p);
  EXPECT_EQ(p.channel_for_row(1), 1u);
  EXPECT_EQ(dequantize(p, 1, 3), 0.75 * 3 - 2.0);
  EXPECT_EQ(dequantize(r, 1, 7), 0.75 * 3 - 2.0);
  EXPECT_EQ(dequantize(r, 0, -1), 0.5 * -1 + 1.0);
}

}  // namespace
}  // namespace apt
