#include "apt/types.hpp"

#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>

namespace apt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EncodingMismatch: return "EncodingMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::OverflowRisk: return "OverflowRisk";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NoFeasibleConfig: return "NoFeasibleConfig";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

const char* encoding_name(Encoding e) {
  return e == Encoding::SignedInt ? "signed" : "bipolar";
}

ValueRange value_range(int bits, Encoding enc) {
  if (enc == Encoding::SignedInt) return {-(1 << (bits - 1)), (1 << (bits - 1)) - 1};
  return {-((1 << bits) - 1), (1 << bits) - 1};
}

bool representable(int value, int bits, Encoding enc) {
  if (bits < 1 || bits > kMaxBits) return false;
  const auto r = value_range(bits, enc);
  if (value < r.lo || value > r.hi) return false;
  return enc == Encoding::SignedInt || (value & 1) != 0;
}

std::optional<Error> validate_matrix(const IntMatrix& m) {
  if (m.bits() < 1 || m.bits() > kMaxBits) {
    return Error(ErrorCode::RangeViolation,
                 "bit width " + std::to_string(m.bits()) + " outside [1, 8]");
  }
  if (m.encoding() != Encoding::SignedInt && m.encoding() != Encoding::BipolarInt) {
    return Error(ErrorCode::RangeViolation, "unknown encoding");
  }
  // rows * cols must not wrap before it is compared with the data length
  if (m.cols() != 0 && m.rows() > m.data().size() / m.cols() + 1) {
    return Error(ErrorCode::ShapeMismatch, "shape too large for data");
  }
  if (m.rows() * m.cols() != m.data().size()) {
    return Error(ErrorCode::ShapeMismatch,
                 "data length " + std::to_string(m.data().size()) + " != " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const int v = m.at(r, c);
      if (!representable(v, m.bits(), m.encoding())) {
        return Error(ErrorCode::RangeViolation,
                     "row " + std::to_string(r) + " col " + std::to_string(c) + " value " +
                         std::to_string(v) + " not a " + std::to_string(m.bits()) + "-bit " +
                         encoding_name(m.encoding()) + " value");
      }
    }
  }
  return std::nullopt;
}

void require_valid(const IntMatrix& m) {
  if (auto err = validate_matrix(m)) throw *err;
}

QuantParams QuantParams::per_tensor(double scale, double zero) {
  QuantParams p;
  p.granularity = Granularity::PerTensor;
  p.scale = {scale};
  p.zero = {zero};
  p.zero_tail = {0.0};
  return p;
}

QuantParams QuantParams::per_channel(std::vector<double> scales, std::vector<double> zeros) {
  QuantParams p;
  p.granularity = Granularity::PerChannel;
  p.zero_tail.assign(scales.size(), 0.0);
  p.scale = std::move(scales);
  p.zero = std::move(zeros);
  return p;
}

void require_valid(const QuantParams& p) {
  if (p.scale.empty() || p.scale.size() != p.zero.size() ||
      p.scale.size() != p.zero_tail.size()) {
    throw Error(ErrorCode::ShapeMismatch, "quant params arrays disagree in length");
  }
  if (p.granularity == Granularity::PerTensor && p.scale.size() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "per-tensor params must hold one channel");
  }
  for (std::size_t i = 0; i < p.scale.size(); ++i) {
    if (!(p.scale[i] > 0.0) || !std::isfinite(p.scale[i])) {
      throw Error(ErrorCode::RangeViolation, "scale must be finite and > 0");
    }
    if (!std::isfinite(p.zero[i]) || !std::isfinite(p.zero_tail[i])) {
      throw Error(ErrorCode::RangeViolation, "zero must be finite");
    }
  }
}

std::optional<std::string> config_violation(const KernelConfig& c, int p, int q) {
  if (p < 1 || p > kMaxBits || q < 1 || q > kMaxBits) return "bit widths outside [1, 8]";
  if (c.b_m == 0 || c.b_n == 0 || c.b_k == 0 || c.t_r == 0 || c.t_c == 0 || c.w_b == 0 ||
      c.w_m == 0 || c.w_n == 0 || c.w_k == 0) {
    return "all fields must be positive";
  }
  if (c.w_k % kWordBits != 0) return "w_k must be a multiple of the word width";
  if (c.b_k % c.w_k != 0) return "b_k must be a multiple of w_k";
  const std::size_t rows = static_cast<std::size_t>(p) * c.b_m;
  const std::size_t cols = static_cast<std::size_t>(q) * c.b_n;
  if (rows % c.w_m != 0) return "p*b_m must be divisible by w_m";
  if (cols % c.w_n != 0) return "q*b_n must be divisible by w_n";
  const std::size_t frag_rows = rows / c.w_m;
  const std::size_t frag_cols = cols / c.w_n;
  if (frag_rows * frag_cols != c.w_b * c.t_r * c.t_c) {
    return "(q*b_n * p*b_m)/(w_m*w_n) must equal w_b*t_r*t_c";
  }
  if (frag_rows % c.t_r != 0 || frag_cols % c.t_c != 0) {
    return "worker tiles must evenly cover the fragment grid";
  }
  return std::nullopt;
}

void require_valid(const KernelConfig& c, int p, int q) {
  if (auto why = config_violation(c, p, q)) {
    throw Error(ErrorCode::ConfigInvalid, format_config(c) + ": " + *why);
  }
}

std::size_t scratch_footprint(const KernelConfig& c, int p, int q) {
  const std::size_t pm = static_cast<std::size_t>(p) * c.b_m;
  const std::size_t qn = static_cast<std::size_t>(q) * c.b_n;
  return 2 * (pm + qn) * c.b_k / 8 + 4 * pm * qn + 8 * c.b_m * c.b_n;
}

namespace {

constexpr std::string_view kFieldNames[] = {"b_m", "b_n", "b_k", "t_r", "t_c",
                                            "w_b", "w_m", "w_n", "w_k"};

std::size_t& field_at(KernelConfig& c, std::size_t index) {
  std::size_t* fields[] = {&c.b_m, &c.b_n, &c.b_k, &c.t_r, &c.t_c,
                           &c.w_b, &c.w_m, &c.w_n, &c.w_k};
  return *fields[index];
}

}  // namespace

KernelConfig parse_config(std::string_view text) {
  KernelConfig c;
  unsigned seen = 0;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "config item '" + std::string(item) + "' lacks '='");
    }
    const auto key = item.substr(0, eq);
    const auto val = item.substr(eq + 1);
    std::size_t index = 0;
    while (index < std::size(kFieldNames) && kFieldNames[index] != key) ++index;
    if (index == std::size(kFieldNames)) {
      throw Error(ErrorCode::ParseError, "unknown config field '" + std::string(key) + "'");
    }
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), field_at(c, index));
    if (ec != std::errc{} || ptr != val.data() + val.size()) {
      throw Error(ErrorCode::ParseError, "bad value for '" + std::string(key) + "'");
    }
    seen |= 1u << index;
  }
  if (seen != 0x1ffu) throw Error(ErrorCode::ParseError, "config must set all nine fields");
  return c;
}

std::string format_config(const KernelConfig& c) {
  std::ostringstream os;
  os << "b_m=" << c.b_m << ",b_n=" << c.b_n << ",b_k=" << c.b_k << ",t_r=" << c.t_r
     << ",t_c=" << c.t_c << ",w_b=" << c.w_b << ",w_m=" << c.w_m << ",w_n=" << c.w_n
     << ",w_k=" << c.w_k;
  return os.str();
}

}  // namespace apt
