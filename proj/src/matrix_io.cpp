#include "apt/matrix_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>

#include "apt/bipolar.hpp"

namespace apt {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[offset + i]} << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_matrix(const IntMatrix& m) {
  require_valid(m);
  std::vector<std::uint8_t> out;
  out.reserve(kApmHeaderBytes + m.data().size());
  for (char ch : {'A', 'P', 'M', '1'}) out.push_back(static_cast<std::uint8_t>(ch));
  out.push_back(static_cast<std::uint8_t>(m.encoding()));
  out.push_back(static_cast<std::uint8_t>(m.bits()));
  put_le(out, 0, 2);
  put_le(out, m.rows(), 8);
  put_le(out, m.cols(), 8);
  for (Cell v : m.data()) {
    const int cell = m.encoding() == Encoding::SignedInt
                         ? int{v}
                         : static_cast<int>(bipolar_pattern(v, m.bits()));
    out.push_back(static_cast<std::uint8_t>(cell));
  }
  return out;
}

IntMatrix deserialize_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedStream, "stream shorter than magic");
  if (std::memcmp(bytes.data(), "APM", 3) != 0) throw Error(ErrorCode::BadMagic, "not an .apm stream");
  if (bytes[3] != '1') {
    throw Error(ErrorCode::BadVersion, std::string("unsupported version '") +
                                           static_cast<char>(bytes[3]) + "'");
  }
  if (bytes.size() < kApmHeaderBytes) throw Error(ErrorCode::TruncatedStream, "header cut short");
  const std::uint8_t enc = bytes[4];
  const int bits = bytes[5];
  if (get_le(bytes, 6, 2) != 0) throw Error(ErrorCode::BadVersion, "reserved field is nonzero");
  if (enc > 1) throw Error(ErrorCode::BadHeader, "encoding byte " + std::to_string(enc));
  if (bits < 1 || bits > kMaxBits) throw Error(ErrorCode::BadHeader, "bit width " + std::to_string(bits));
  const std::uint64_t rows = get_le(bytes, 8, 8);
  const std::uint64_t cols = get_le(bytes, 16, 8);
  const std::size_t body = bytes.size() - kApmHeaderBytes;
  if (cols != 0 && rows > body / cols) {
    throw Error(ErrorCode::TruncatedStream, "expected " + std::to_string(rows) + "x" +
                                                std::to_string(cols) + " cells, stream holds " +
                                                std::to_string(body));
  }
  const std::size_t count = rows * cols;
  if (body > count) throw Error(ErrorCode::BadHeader, "trailing bytes after cell data");

  const auto encoding = static_cast<Encoding>(enc);
  std::vector<Cell> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t raw = bytes[kApmHeaderBytes + i];
    if (encoding == Encoding::SignedInt) {
      data[i] = static_cast<std::int8_t>(raw);
    } else {
      if (raw >> bits) {
        throw Error(ErrorCode::RangeViolation, "cell " + std::to_string(i) + " pattern exceeds " +
                                                   std::to_string(bits) + " bits");
      }
      data[i] = static_cast<Cell>(bipolar_value(raw, bits));
    }
  }
  IntMatrix m(rows, cols, bits, encoding, std::move(data));
  require_valid(m);
  return m;
}

IntMatrix read_apm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return deserialize_matrix(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail());
  }
}

void write_apm(const std::string& path, const IntMatrix& m) {
  const auto bytes = serialize_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

void write_result(std::ostream& os, const Matrix<std::int64_t>& m) {
  os << m.rows << ' ' << m.cols << '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) os << ' ';
      os << m(r, c);
    }
    os << '\n';
  }
}

}  // namespace apt
