#pragma once

#include <cstdint>
#include <vector>

#include <mpfr.h>

namespace apt::detail {

// Accumulates products of doubles and integers without rounding and rounds
// the total once to the nearest double.
class ExactSum {
 public:
  ExactSum() = default;
  ExactSum(const ExactSum&) = delete;
  ExactSum& operator=(const ExactSum&) = delete;
  ~ExactSum() {
    for (auto& t : terms_) mpfr_clear(t.v);
  }

  void clear() { used_ = 0; }

  void add(double a) { mpfr_set_d(next().v, a, MPFR_RNDN); }

  // a * b * c is exact at 53 + 53 + 64 bits.
  void add_product(double a, double b = 1.0, std::int64_t c = 1) {
    mpfr_ptr t = next().v;
    mpfr_set_d(t, a, MPFR_RNDN);
    mpfr_mul_d(t, t, b, MPFR_RNDN);
    mpfr_mul_si(t, t, static_cast<long>(c), MPFR_RNDN);
  }

  double round() {
    if (used_ == 0) return 0.0;
    std::vector<mpfr_ptr> ptrs(used_);
    for (std::size_t i = 0; i < used_; ++i) ptrs[i] = terms_[i].v;
    mpfr_t out;
    mpfr_init2(out, 53);
    mpfr_sum(out, ptrs.data(), used_, MPFR_RNDN);
    const double d = mpfr_get_d(out, MPFR_RNDN);
    mpfr_clear(out);
    return d;
  }

 private:
  struct Term {
    mpfr_t v;
  };

  Term& next() {
    if (used_ == terms_.size()) {
      terms_.emplace_back();
      mpfr_init2(terms_.back().v, kPrecision);
    }
    return terms_[used_++];
  }

  static constexpr mpfr_prec_t kPrecision = 192;
  std::vector<Term> terms_;
  std::size_t used_ = 0;
};

}  // namespace apt::detail
