#include "apt/oracle.hpp"

#include "apt/bipolar.hpp"

namespace apt {

namespace {

void check_pair(const IntMatrix& x, const IntMatrix& w) {
  require_valid(x);
  require_valid(w);
  if (x.cols() != w.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "inner dimensions " + std::to_string(x.cols()) +
                                              " and " + std::to_string(w.cols()) + " differ");
  }
  if (x.encoding() != w.encoding()) {
    throw Error(ErrorCode::EncodingMismatch, "operands use different encodings");
  }
}

}  // namespace

Matrix<std::int64_t> oracle_matmul(const IntMatrix& x, const IntMatrix& w) {
  check_pair(x, w);
  Matrix<std::int64_t> y(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < w.rows(); ++c) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < x.cols(); ++k) acc += std::int64_t{x.at(r, k)} * w.at(c, k);
      y(r, c) = acc;
    }
  }
  return y;
}

std::vector<Matrix<std::int64_t>> oracle_planes(const IntMatrix& x, const IntMatrix& w) {
  check_pair(x, w);
  if (x.encoding() != Encoding::BipolarInt) {
    throw Error(ErrorCode::EncodingMismatch, "plane products are defined for bipolar operands");
  }
  const int p = x.bits();
  const int q = w.bits();
  std::vector<Matrix<std::int64_t>> planes;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      Matrix<std::int64_t> y(x.rows(), w.rows());
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < w.rows(); ++c) {
          std::int64_t acc = 0;
          for (std::size_t k = 0; k < x.cols(); ++k) {
            const int a = (bipolar_pattern(x.at(r, k), p) >> i) & 1 ? 1 : -1;
            const int b = (bipolar_pattern(w.at(c, k), q) >> j) & 1 ? 1 : -1;
            acc += a * b;
          }
          y(r, c) = acc;
        }
      }
      planes.push_back(std::move(y));
    }
  }
  return planes;
}

}  // namespace apt
