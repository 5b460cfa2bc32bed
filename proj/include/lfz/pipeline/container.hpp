#pragma once

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lfz/core/light_field.hpp"
#include "lfz/jpeg/config.hpp"
#include "lfz/nets/archive.hpp"

namespace lfz {

/// Compressed light field: the JPEG-coded center view plus the light-field
/// dimensions needed to rebuild the other views.
///
/// Layout (little-endian):
///   "LFZ1" | u8 version | u16 U | u16 V | u16 H | u16 W | u8 quality |
///   u32 payload_len | payload | u32 crc32(payload)
///
/// Depth-Net input is padded with zeros at the bottom and right up to the next
/// multiple of 16; the disparity is cropped back from the top-left corner.
struct LfzContainer {
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kHeaderSize = 4 + 1 + 4 * 2 + 1 + 4;

  std::uint8_t version = kVersion;
  AngularSize angular{};
  SpatialSize spatial{};
  std::uint8_t quality = 50;
  jpeg::JpegBytes payload;

  friend bool operator==(const LfzContainer&, const LfzContainer&) = default;
};

inline std::uint32_t crc32_of(const std::vector<std::uint8_t>& data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

namespace detail {
inline void put_u16(std::vector<std::uint8_t>& out, std::size_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

inline void validate_dims(AngularSize a, SpatialSize s) {
  if (a.u == 0 || a.v == 0 || a.u % 2 == 0 || a.v % 2 == 0)
    throw DataError("LFZ angular dimensions must be odd and positive");
  if (s.height == 0 || s.width == 0) throw DataError("LFZ spatial dimensions must be positive");
  if (a.u > 0xFFFF || a.v > 0xFFFF || s.height > 0xFFFF || s.width > 0xFFFF)
    throw DataError("LFZ dimensions exceed 65535");
}
}  // namespace detail

inline std::vector<std::uint8_t> serialize(const LfzContainer& c) {
  detail::validate_dims(c.angular, c.spatial);
  if (c.payload.size() > 0xFFFFFFFFull) throw DataError("LFZ payload too large");
  std::vector<std::uint8_t> out{'L', 'F', 'Z', '1', c.version};
  out.reserve(LfzContainer::kHeaderSize + c.payload.size() + 4);
  detail::put_u16(out, c.angular.u);
  detail::put_u16(out, c.angular.v);
  detail::put_u16(out, c.spatial.height);
  detail::put_u16(out, c.spatial.width);
  out.push_back(c.quality);
  nets::bytes::put_u32(out, static_cast<std::uint32_t>(c.payload.size()));
  out.insert(out.end(), c.payload.begin(), c.payload.end());
  nets::bytes::put_u32(out, crc32_of(c.payload));
  return out;
}

inline LfzContainer parse_container(const std::vector<std::uint8_t>& data) {
  nets::bytes::Reader r(data, "LFZ container");
  const auto magic = r.take(4);
  if (!(magic[0] == 'L' && magic[1] == 'F' && magic[2] == 'Z' && magic[3] == '1'))
    throw DataError("not an LFZ container (bad magic)");
  LfzContainer c;
  c.version = r.u8();
  if (c.version != LfzContainer::kVersion)
    throw DataError("unsupported LFZ version " + std::to_string(c.version));
  c.angular.u = r.u16();
  c.angular.v = r.u16();
  c.spatial.height = r.u16();
  c.spatial.width = r.u16();
  c.quality = r.u8();
  detail::validate_dims(c.angular, c.spatial);
  const std::uint32_t len = r.u32();
  if (len > r.remaining()) throw DataError("LFZ payload length exceeds file size");
  const auto payload = r.take(len);
  c.payload.assign(payload.begin(), payload.end());
  const std::uint32_t crc = r.u32();
  if (r.remaining() != 0) throw DataError("trailing bytes after LFZ container");
  if (crc != crc32_of(c.payload)) throw DataError("LFZ CRC mismatch: payload is corrupt");
  return c;
}

inline void save_container(const LfzContainer& c, const std::filesystem::path& path) {
  nets::bytes::write_file(path, serialize(c));
}

inline LfzContainer load_container(const std::filesystem::path& path) {
  return parse_container(nets::bytes::read_file(path));
}

}  // namespace lfz
