#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "apt/types.hpp"

namespace apt {

// .apm layout (all integers little-endian):
//   "APM1" | u8 encoding | u8 bits | u16 reserved=0 | u64 rows | u64 cols | rows*cols i8 cells
// SignedInt cells hold the two's complement value. BipolarInt cells hold the
// n-bit pattern (bit i set <=> bit i contributes +2^i), which fits one byte for
// every n <= 8 even though the values span [-255, 255].
inline constexpr std::size_t kApmHeaderBytes = 24;

std::vector<std::uint8_t> serialize_matrix(const IntMatrix& m);
IntMatrix deserialize_matrix(std::span<const std::uint8_t> bytes);

IntMatrix read_apm(const std::string& path);
void write_apm(const std::string& path, const IntMatrix& m);

// Plain text result matrix: "rows cols" then one line per row.
void write_result(std::ostream& os, const Matrix<std::int64_t>& m);

}  // namespace apt
