#pragma once

#include <cstdint>
#include <vector>

#include "apt/common.hpp"
#include "apt/types.hpp"

namespace apt {

// Textbook triple loop: Y[r][c] = sum_k X[r][k] * W[c][k] over element values.
// Both operands must share an encoding and the inner dimension. No tiling, no
// packing.
Matrix<std::int64_t> oracle_matmul(const IntMatrix& x, const IntMatrix& w);

// Per plane pair +-1 products for bipolar operands. Entry i * q + j holds
// Y(i,j)[r][c] = sum_k (2*bit_i(X[r][k]) - 1) * (2*bit_j(W[c][k]) - 1).
std::vector<Matrix<std::int64_t>> oracle_planes(const IntMatrix& x, const IntMatrix& w);

}  // namespace apt
