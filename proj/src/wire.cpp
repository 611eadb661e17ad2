#include "secagg/wire.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "secagg/error.hpp"

namespace secagg::wire {

namespace {

constexpr std::uint8_t kEncodingF64 = 0;
constexpr std::uint8_t kEncodingQuantized = 1;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::protocol_abort, "malformed payload: " + what);
}

}  // namespace

void Writer::put(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

void Writer::signed_int(std::int64_t v, int width) {
  put(static_cast<std::uint64_t>(v), width);
}

void Writer::id(std::string_view s) {
  require(s.size() <= std::numeric_limits<std::uint16_t>::max(), ErrorCode::invalid_parameter,
          "identifier longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void Writer::vector(const RealVector& v) {
  u32(static_cast<std::uint32_t>(v.dim()));
  for (double x : v) f64(x);
}

std::uint64_t Reader::get(int width) {
  if (bytes_.size() - pos_ < static_cast<std::size_t>(width)) malformed("truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += width;
  return v;
}

double Reader::f64() { return std::bit_cast<double>(get(8)); }

std::int64_t Reader::signed_int(int width) {
  std::uint64_t raw = get(width);
  if (width < 8) {
    const std::uint64_t sign = 1ULL << (8 * width - 1);
    if (raw & sign) raw |= ~((sign << 1) - 1);
  }
  return static_cast<std::int64_t>(raw);
}

std::string Reader::id() {
  const std::size_t len = u16();
  if (bytes_.size() - pos_ < len) malformed("truncated identifier");
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
  pos_ += len;
  return s;
}

RealVector Reader::vector() {
  const std::size_t dim = u32();
  if ((bytes_.size() - pos_) / 8 < dim) malformed("vector length exceeds payload");
  RealVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = f64();
  return v;
}

void Reader::expect_done() const {
  if (!done()) malformed("trailing bytes");
}

int level_width(std::int64_t max_level) noexcept {
  if (max_level <= std::numeric_limits<std::int8_t>::max()) return 1;
  if (max_level <= std::numeric_limits<std::int16_t>::max()) return 2;
  if (max_level <= std::numeric_limits<std::int32_t>::max()) return 4;
  return 8;
}

Bytes encode_share(std::string_view client_id, const RealVector& share) {
  Writer w;
  w.id(client_id);
  w.u8(kEncodingF64);
  w.vector(share);
  return std::move(w).take();
}

Bytes encode_quantized_share(std::string_view client_id, const QuantizedShare& share) {
  Writer w;
  w.id(client_id);
  w.u8(kEncodingQuantized);
  w.u32(static_cast<std::uint32_t>(share.levels.size()));
  w.u8(static_cast<std::uint8_t>(share.width));
  w.f64(share.step);
  for (std::int64_t level : share.levels) w.signed_int(level, share.width);
  return std::move(w).take();
}

SharePayload decode_share(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  SharePayload out;
  out.client_id = r.id();
  const std::uint8_t encoding = r.u8();
  if (encoding == kEncodingF64) {
    out.share = r.vector();
  } else if (encoding == kEncodingQuantized) {
    const std::size_t dim = r.u32();
    const int width = r.u8();
    if (width != 1 && width != 2 && width != 4 && width != 8) malformed("bad level width");
    const double step = r.f64();
    out.share = RealVector(dim);
    for (std::size_t i = 0; i < dim; ++i) out.share[i] = static_cast<double>(r.signed_int(width)) * step;
    out.quantized = true;
  } else {
    malformed("unknown share encoding");
  }
  r.expect_done();
  if (!out.share.all_finite()) malformed("non-finite share");
  return out;
}

Bytes encode_matrix(const ProjectionMatrix& m) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double x : m.entries()) w.f64(x);
  return std::move(w).take();
}

ProjectionMatrix decode_matrix(std::span<const std::uint8_t> bytes,
                               ProjectionProvenance provenance) {
  Reader r(bytes);
  const std::size_t rows = r.u32();
  const std::size_t cols = r.u32();
  if (rows == 0 || cols == 0 || (bytes.size() - 8) / 8 / rows < cols) malformed("matrix shape");
  std::vector<double> entries(rows * cols);
  for (double& x : entries) x = r.f64();
  r.expect_done();
  return ProjectionMatrix(rows, cols, std::move(entries), provenance);
}

Bytes encode_replies(std::span<const IdVector> replies) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(replies.size()));
  for (const auto& [id, y] : replies) {
    w.id(id);
    w.vector(y);
  }
  return std::move(w).take();
}

std::vector<IdVector> decode_replies(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::size_t count = r.u32();
  std::vector<IdVector> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string id = r.id();
    out.emplace_back(std::move(id), r.vector());
  }
  r.expect_done();
  return out;
}

Bytes encode_accept(std::string_view client_id, bool accept) {
  Writer w;
  w.id(client_id);
  w.u8(accept ? 1 : 0);
  return std::move(w).take();
}

std::pair<std::string, bool> decode_accept(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  std::string id = r.id();
  const std::uint8_t bit = r.u8();
  if (bit > 1) malformed("accept bit");
  r.expect_done();
  return {std::move(id), bit == 1};
}

Bytes encode_id_set(std::span<const std::string> ids) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) w.id(id);
  return std::move(w).take();
}

std::vector<std::string> decode_id_set(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::size_t count = r.u32();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(r.id());
  r.expect_done();
  return out;
}

Bytes encode_vector(const RealVector& v) {
  Writer w;
  w.vector(v);
  return std::move(w).take();
}

RealVector decode_vector(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  RealVector v = r.vector();
  r.expect_done();
  return v;
}

}  // namespace secagg::wire
