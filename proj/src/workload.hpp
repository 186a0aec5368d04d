#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "apt/bipolar.hpp"
#include "apt/types.hpp"

namespace apt::detail {

inline IntMatrix random_bipolar(std::size_t rows, std::size_t cols, int bits, std::mt19937_64& rng) {
  std::uniform_int_distribution<unsigned> pattern(0, (1u << bits) - 1);
  std::vector<Cell> data(rows * cols);
  for (auto& v : data) v = static_cast<Cell>(bipolar_value(pattern(rng), bits));
  return IntMatrix(rows, cols, bits, Encoding::BipolarInt, std::move(data));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace apt::detail
