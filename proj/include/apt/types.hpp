#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apt/common.hpp"

namespace apt {

enum class Encoding : std::uint8_t { SignedInt = 0, BipolarInt = 1 };

const char* encoding_name(Encoding e);

using Cell = std::int16_t;

struct ValueRange {
  int lo;
  int hi;
};

// SignedInt: [-2^(n-1), 2^(n-1)-1]. BipolarInt: odd values in [-(2^n-1), 2^n-1].
ValueRange value_range(int bits, Encoding enc);
bool representable(int value, int bits, Encoding enc);

/// Dense integer matrix with a declared bit width, one cell per element.
///
/// Cells hold element *values* (not bit patterns). Cells are 16-bit because
/// 8-bit bipolar values span [-255, 255]. Construction does not validate; use
/// validate_matrix() or require_valid() at operation boundaries.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols, int bits, Encoding encoding,
            std::vector<Cell> data)
      : rows_(rows), cols_(cols), bits_(bits), encoding_(encoding), data_(std::move(data)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int bits() const noexcept { return bits_; }
  Encoding encoding() const noexcept { return encoding_; }
  std::span<const Cell> data() const noexcept { return data_; }
  Cell at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const Cell> row(std::size_t r) const {
    return std::span<const Cell>(data_).subspan(r * cols_, cols_);
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int bits_ = 1;
  Encoding encoding_ = Encoding::SignedInt;
  std::vector<Cell> data_;
};

std::optional<Error> validate_matrix(const IntMatrix& m);
void require_valid(const IntMatrix& m);

enum class Granularity : std::uint8_t { PerTensor, PerChannel };

/// Affine quantization parameters, value = scale * code + zero.
///
/// Per-channel parameters index rows of the quantized matrix. `zero_tail`
/// carries the exact low-order part of the zero point left over after a
/// rewrite (see rewrite_quant_params); it is 0 for freshly built parameters.
struct QuantParams {
  Granularity granularity = Granularity::PerTensor;
  std::vector<double> scale{1.0};
  std::vector<double> zero{0.0};
  std::vector<double> zero_tail{0.0};

  static QuantParams per_tensor(double scale, double zero);
  static QuantParams per_channel(std::vector<double> scales, std::vector<double> zeros);

  std::size_t channels() const noexcept { return scale.size(); }
  std::size_t channel_for_row(std::size_t row) const noexcept {
    return granularity == Granularity::PerTensor ? 0 : row;
  }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

void require_valid(const QuantParams& p);

/// Kernel hyperparameters: block dims (b_*), tiles per worker (t_r x t_c),
/// workers per block (w_b) and microkernel fragment dims (w_m, w_n, w_k).
/// b_m counts activation rows, b_n weight rows, b_k and w_k are in bits.
struct KernelConfig {
  std::size_t b_m = 0;
  std::size_t b_n = 0;
  std::size_t b_k = 0;
  std::size_t t_r = 0;
  std::size_t t_c = 0;
  std::size_t w_b = 0;
  std::size_t w_m = 0;
  std::size_t w_n = 0;
  std::size_t w_k = 0;

  auto operator<=>(const KernelConfig&) const = default;
};

// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> config_violation(const KernelConfig& c, int p, int q);
void require_valid(const KernelConfig& c, int p, int q);

// Bytes of block-local scratch: double-buffered staging, the p*b_m x q*b_n
// 32-bit intermediate tile and the b_m x b_n 64-bit output tile.
std::size_t scratch_footprint(const KernelConfig& c, int p, int q);

// Comma separated key=value list using the field names above.
KernelConfig parse_config(std::string_view text);
std::string format_config(const KernelConfig& c);

}  // namespace apt
