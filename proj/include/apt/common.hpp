#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef APT_WORD_BITS
#define APT_WORD_BITS 64
#endif

namespace apt {

#if APT_WORD_BITS == 64
using Word = std::uint64_t;
#elif APT_WORD_BITS == 32
using Word = std::uint32_t;
#else
#error "APT_WORD_BITS must be 32 or 64"
#endif

inline constexpr std::size_t kWordBits = APT_WORD_BITS;
inline constexpr int kMaxBits = 8;

enum class ErrorCode {
  RangeViolation,
  ShapeMismatch,
  EncodingMismatch,
  BadMagic,
  BadVersion,
  BadHeader,
  TruncatedStream,
  ParseError,
  OverflowRisk,
  ConfigInvalid,
  NoFeasibleConfig,
  EmptyTable,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the error-code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Dense row-major result matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

constexpr std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace apt
