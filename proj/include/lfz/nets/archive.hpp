#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lfz/core/error.hpp"
#include "lfz/nets/layers.hpp"

namespace lfz::nets {

namespace bytes {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

/// Bounds-checked little-endian reader.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string what) : data_(data), what_(std::move(what)) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > data_.size() - pos_) throw DataError("truncated " + what_);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto s = take(2);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32() {
    auto s = take(4);
    return std::uint32_t(s[0]) | std::uint32_t(s[1]) << 8 | std::uint32_t(s[2]) << 16 | std::uint32_t(s[3]) << 24;
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | std::uint64_t(u32()) << 32;
  }
  float f32() { return std::bit_cast<float>(u32()); }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace bytes

struct ArchiveTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

/// Named float32 tensors in the LFW1 layout:
///   "LFW1" | u32 count | count x (u32 name_len | name | u32 rank | rank x u32 dim | f32 payload)
/// All integers and floats little-endian.
class WeightArchive {
 public:
  static constexpr char kMagic[4] = {'L', 'F', 'W', '1'};

  void add(ArchiveTensor t) {
    std::size_t n = 1;
    for (auto d : t.dims) n *= d;
    if (n != t.data.size()) throw DataError("tensor '" + t.name + "' payload does not match its dims");
    if (find(t.name)) throw DataError("duplicate tensor name '" + t.name + "'");
    tensors_.push_back(std::move(t));
  }

  const ArchiveTensor* find(const std::string& name) const {
    for (const auto& t : tensors_)
      if (t.name == name) return &t;
    return nullptr;
  }

  const ArchiveTensor& get(const std::string& name) const {
    if (const ArchiveTensor* t = find(name)) return *t;
    throw DataError("weight archive is missing tensor '" + name + "'");
  }

  const std::vector<ArchiveTensor>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    bytes::put_u32(out, static_cast<std::uint32_t>(tensors_.size()));
    for (const auto& t : tensors_) {
      bytes::put_u32(out, static_cast<std::uint32_t>(t.name.size()));
      out.insert(out.end(), t.name.begin(), t.name.end());
      bytes::put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
      for (auto d : t.dims) bytes::put_u32(out, d);
      for (float v : t.data) bytes::put_f32(out, v);
    }
    return out;
  }

  /// Parses an archive from the front of `data`; `consumed` receives its length.
  static WeightArchive parse(std::span<const std::uint8_t> data, std::size_t* consumed = nullptr) {
    bytes::Reader r(data, "weight archive");
    auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError("not a weight archive (bad magic)");
    WeightArchive a;
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      ArchiveTensor t;
      const std::uint32_t len = r.u32();
      auto name = r.take(len);
      t.name.assign(name.begin(), name.end());
      const std::uint32_t rank = r.u32();
      if (rank > 8) throw DataError("tensor '" + t.name + "' has implausible rank " + std::to_string(rank));
      std::uint64_t n = 1;
      for (std::uint32_t k = 0; k < rank; ++k) {
        t.dims.push_back(r.u32());
        n *= t.dims.back();
      }
      if (n * 4 > r.remaining()) throw DataError("truncated weight archive (payload of '" + t.name + "')");
      t.data.resize(n);
      for (auto& v : t.data) v = r.f32();
      a.add(std::move(t));
    }
    if (consumed) *consumed = r.position();
    return a;
  }

  void save(const std::filesystem::path& path) const { bytes::write_file(path, serialize()); }
  static WeightArchive load(const std::filesystem::path& path) { return parse(bytes::read_file(path)); }

 private:
  std::vector<ArchiveTensor> tensors_;
};

template <class T>
void store(WeightArchive& a, const std::vector<NamedVar<T>>& entries) {
  for (const auto& e : entries) {
    ArchiveTensor t{e.name, {}, {}};
    for (auto d : e.var.shape()) t.dims.push_back(static_cast<std::uint32_t>(d));
    t.data.assign(e.var.value().data().begin(), e.var.value().data().end());
    a.add(std::move(t));
  }
}

template <class T>
void restore(const WeightArchive& a, std::vector<NamedVar<T>>& entries) {
  for (auto& e : entries) {
    const ArchiveTensor& t = a.get(e.name);
    bool same = t.dims.size() == e.var.shape().size();
    for (std::size_t k = 0; same && k < t.dims.size(); ++k) same = t.dims[k] == e.var.shape()[k];
    if (!same) throw DataError("tensor '" + e.name + "' has dims that do not match the network");
    auto& dst = e.var.mutable_value();
    for (std::size_t i = 0; i < t.data.size(); ++i) dst[i] = static_cast<T>(t.data[i]);
  }
}

}  // namespace lfz::nets
