#pragma once

// Payload encodings for every protocol message. All integers and floats are
// little-endian; vectors are length-prefixed with a u32 count of f64 values.
//
//   id            u16 length, bytes
//   vector        u32 dim, dim x f64
//   share         id, u8 encoding (0 = f64, 1 = quantized), then
//                   f64:       vector
//                   quantized: u32 dim, u8 width, f64 step, dim x int(width)
//   matrix        u32 k, u32 d, k*d x f64 (row-major)
//   replies       u32 count, count x (id, vector)
//   accept-bit    id, u8
//   accepted-set  u32 count, count x id
//   partial-sum   vector

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secagg/linalg.hpp"

namespace secagg::wire {

using Bytes = std::vector<std::uint8_t>;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v);
  void signed_int(std::int64_t v, int width);
  void id(std::string_view s);
  void vector(const RealVector& v);

  Bytes take() && { return std::move(bytes_); }

 private:
  void put(std::uint64_t v, int width);
  Bytes bytes_;
};

// Throws protocol-abort on truncated or malformed input.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64();
  std::int64_t signed_int(int width);
  std::string id();
  RealVector vector();

  bool done() const noexcept { return pos_ == bytes_.size(); }
  void expect_done() const;

 private:
  std::uint64_t get(int width);
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Smallest of {1, 2, 4, 8} bytes holding every level in [-max_level, max_level].
int level_width(std::int64_t max_level) noexcept;

struct QuantizedShare {
  std::vector<std::int64_t> levels;
  double step = 1.0;
  int width = 8;
};

struct SharePayload {
  std::string client_id;
  RealVector share;  // dequantized when the payload was quantized
  bool quantized = false;
};

Bytes encode_share(std::string_view client_id, const RealVector& share);
Bytes encode_quantized_share(std::string_view client_id, const QuantizedShare& share);
SharePayload decode_share(std::span<const std::uint8_t> bytes);

Bytes encode_matrix(const ProjectionMatrix& w);
ProjectionMatrix decode_matrix(std::span<const std::uint8_t> bytes, ProjectionProvenance provenance);

using IdVector = std::pair<std::string, RealVector>;
Bytes encode_replies(std::span<const IdVector> replies);
std::vector<IdVector> decode_replies(std::span<const std::uint8_t> bytes);

Bytes encode_accept(std::string_view client_id, bool accept);
std::pair<std::string, bool> decode_accept(std::span<const std::uint8_t> bytes);

Bytes encode_id_set(std::span<const std::string> ids);
std::vector<std::string> decode_id_set(std::span<const std::uint8_t> bytes);

Bytes encode_vector(const RealVector& v);
RealVector decode_vector(std::span<const std::uint8_t> bytes);

// Exact encoded sizes, used for communication accounting.
namespace size {
constexpr std::size_t id(std::size_t id_len) { return 2 + id_len; }
constexpr std::size_t vector(std::size_t dim) { return 4 + 8 * dim; }
constexpr std::size_t share(std::size_t id_len, std::size_t dim) { return id(id_len) + 1 + vector(dim); }
constexpr std::size_t quantized_share(std::size_t id_len, std::size_t dim, int width) {
  return id(id_len) + 1 + 4 + 1 + 8 + dim * static_cast<std::size_t>(width);
}
constexpr std::size_t matrix(std::size_t k, std::size_t d) { return 8 + 8 * k * d; }
constexpr std::size_t accept(std::size_t id_len) { return id(id_len) + 1; }
}  // namespace size

}  // namespace secagg::wire
