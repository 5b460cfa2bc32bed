#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lfz/core/image.hpp"
#include "lfz/jpeg/config.hpp"
#include "lfz/jpeg/tables.hpp"

namespace lfz::jpeg {

namespace detail {

inline int round_half_away(double v) { return static_cast<int>(std::lround(v)); }

struct HuffmanCode {
  std::uint16_t code = 0;
  std::uint8_t length = 0;
};

/// Canonical code assignment (Annex C), indexed by symbol value.
inline std::array<HuffmanCode, 256> build_codes(const HuffmanSpec& spec) {
  std::array<HuffmanCode, 256> table{};
  std::uint16_t code = 0;
  int k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.counts[len - 1]; ++i)
      table[spec.values[k++]] = {code++, static_cast<std::uint8_t>(len)};
    code <<= 1;
  }
  return table;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t bits, int count) {
    acc_ = (acc_ << count) | (bits & ((1u << count) - 1u));
    used_ += count;
    while (used_ >= 8) {
      const auto byte = static_cast<std::uint8_t>(acc_ >> (used_ - 8));
      out_.push_back(byte);
      if (byte == 0xFF) out_.push_back(0x00);
      used_ -= 8;
    }
    acc_ &= (1u << used_) - 1u;
  }

  // Pads the final partial byte with one-bits.
  void flush() {
    if (used_ > 0) put(0x7F, 8 - used_);
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint32_t acc_ = 0;
  int used_ = 0;
};

/// Magnitude category and the appended bits for a DC difference or AC value.
inline void put_value(BitWriter& bw, int value, int category) {
  if (category == 0) return;
  const int bits = value < 0 ? value + (1 << category) - 1 : value;
  bw.put(static_cast<std::uint32_t>(bits), category);
}

inline int magnitude_category(int v) {
  int a = v < 0 ? -v : v;
  int n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

/// Separable orthonormal 8x8 forward DCT-II on level-shifted samples.
class ForwardDct {
 public:
  ForwardDct() {
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
      for (int x = 0; x < 8; ++x)
        basis_[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
  }

  void apply(const double in[64], double out[64]) const {
    double tmp[64];
    for (int y = 0; y < 8; ++y)
      for (int u = 0; u < 8; ++u) {
        double s = 0;
        for (int x = 0; x < 8; ++x) s += basis_[u][x] * in[y * 8 + x];
        tmp[y * 8 + u] = s;
      }
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u) {
        double s = 0;
        for (int y = 0; y < 8; ++y) s += basis_[v][y] * tmp[y * 8 + u];
        out[v * 8 + u] = s;
      }
  }

 private:
  double basis_[8][8];
};

struct Plane {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> samples;
  int at_clamped(std::size_t y, std::size_t x) const {
    return samples[std::min(y, height - 1) * width + std::min(x, width - 1)];
  }
};

inline void write_marker(std::vector<std::uint8_t>& out, std::uint8_t m) {
  out.push_back(0xFF);
  out.push_back(m);
}

inline void write_u16(std::vector<std::uint8_t>& out, unsigned v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

}  // namespace detail

/// Baseline sequential JPEG encoder (JFIF, YCbCr, standard Huffman tables).
///
/// Samples are quantized to 8 bits with round-half-away-from-zero, converted
/// with the full-range JFIF transform, optionally 2x2-averaged for chroma,
/// transformed with an exact floating-point DCT and quantized with rounding.
/// The output is a pure function of (image, config).
inline JpegBytes encode(const Image& img, const JpegConfig& cfg) {
  using namespace detail;
  cfg.validate();
  if (img.empty()) throw DataError("cannot encode an empty image");
  if (img.width() > 0xFFFF || img.height() > 0xFFFF)
    throw DataError("JPEG dimensions exceed 65535");

  const std::size_t w = img.width(), h = img.height();
  const bool sub = cfg.chroma_subsampling == ChromaSubsampling::s420;

  // Colour conversion on 8-bit samples.
  std::array<Plane, 3> full;
  for (auto& p : full) p = {w, h, std::vector<int>(w * h)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double r = to_u8(img.at(y, x, 0));
      const double g = to_u8(img.at(y, x, 1));
      const double b = to_u8(img.at(y, x, 2));
      const double yy = 0.299 * r + 0.587 * g + 0.114 * b;
      const double cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
      const double cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
      full[0].samples[y * w + x] = std::clamp(round_half_away(yy), 0, 255);
      full[1].samples[y * w + x] = std::clamp(round_half_away(cb), 0, 255);
      full[2].samples[y * w + x] = std::clamp(round_half_away(cr), 0, 255);
    }

  std::array<Plane, 3> planes{full[0], full[1], full[2]};
  if (sub) {
    for (int c = 1; c < 3; ++c) {
      Plane p{(w + 1) / 2, (h + 1) / 2, {}};
      p.samples.resize(p.width * p.height);
      for (std::size_t y = 0; y < p.height; ++y)
        for (std::size_t x = 0; x < p.width; ++x) {
          const int s = full[c].at_clamped(2 * y, 2 * x) + full[c].at_clamped(2 * y, 2 * x + 1) +
                        full[c].at_clamped(2 * y + 1, 2 * x) +
                        full[c].at_clamped(2 * y + 1, 2 * x + 1);
          p.samples[y * p.width + x] = (s + 2) / 4;
        }
      planes[c] = std::move(p);
    }
  }

  const auto qluma = scaled_quant_table(kBaseLuminanceQuant, cfg.quality);
  const auto qchroma = scaled_quant_table(kBaseChrominanceQuant, cfg.quality);

  JpegBytes out;
  out.reserve(w * h / 4 + 1024);
  write_marker(out, 0xD8);  // SOI

  // APP0 JFIF 1.01, no density, no thumbnail.
  write_marker(out, 0xE0);
  write_u16(out, 16);
  for (char ch : {'J', 'F', 'I', 'F', '\0'}) out.push_back(static_cast<std::uint8_t>(ch));
  for (std::uint8_t b : {1, 1, 0, 0, 1, 0, 1, 0, 0}) out.push_back(b);

  write_marker(out, 0xDB);  // DQT
  write_u16(out, 2 + 2 * 65);
  for (int t = 0; t < 2; ++t) {
    out.push_back(static_cast<std::uint8_t>(t));
    const auto& q = t == 0 ? qluma : qchroma;
    for (int i = 0; i < 64; ++i) out.push_back(static_cast<std::uint8_t>(q[kZigzagToNatural[i]]));
  }

  write_marker(out, 0xC0);  // SOF0
  write_u16(out, 8 + 3 * 3);
  out.push_back(8);
  write_u16(out, static_cast<unsigned>(h));
  write_u16(out, static_cast<unsigned>(w));
  out.push_back(3);
  const std::uint8_t luma_sampling = sub ? 0x22 : 0x11;
  for (std::uint8_t id = 1; id <= 3; ++id) {
    out.push_back(id);
    out.push_back(id == 1 ? luma_sampling : 0x11);
    out.push_back(id == 1 ? 0 : 1);
  }

  write_marker(out, 0xC4);  // DHT
  const HuffmanSpec* specs[4] = {&kDcLuminance, &kAcLuminance, &kDcChrominance, &kAcChrominance};
  const std::uint8_t classes[4] = {0x00, 0x10, 0x01, 0x11};
  unsigned dht_len = 2;
  for (auto* s : specs) dht_len += 17 + static_cast<unsigned>(s->value_count);
  write_u16(out, dht_len);
  for (int i = 0; i < 4; ++i) {
    out.push_back(classes[i]);
    for (auto c : specs[i]->counts) out.push_back(c);
    for (int k = 0; k < specs[i]->value_count; ++k) out.push_back(specs[i]->values[k]);
  }

  if (cfg.restart_interval > 0) {
    write_marker(out, 0xDD);  // DRI
    write_u16(out, 4);
    write_u16(out, cfg.restart_interval);
  }

  write_marker(out, 0xDA);  // SOS
  write_u16(out, 6 + 2 * 3);
  out.push_back(3);
  for (std::uint8_t id = 1; id <= 3; ++id) {
    out.push_back(id);
    out.push_back(id == 1 ? 0x00 : 0x11);
  }
  out.push_back(0);
  out.push_back(63);
  out.push_back(0);

  const auto dc_luma = build_codes(kDcLuminance), ac_luma = build_codes(kAcLuminance);
  const auto dc_chroma = build_codes(kDcChrominance), ac_chroma = build_codes(kAcChrominance);
  const ForwardDct dct;
  BitWriter bw(out);
  std::array<int, 3> prev_dc{0, 0, 0};

  auto encode_block = [&](const Plane& p, std::size_t by, std::size_t bx, int comp) {
    double in[64], coef[64];
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x)
        in[y * 8 + x] = p.at_clamped(by * 8 + y, bx * 8 + x) - 128.0;
    dct.apply(in, coef);
    const auto& q = comp == 0 ? qluma : qchroma;
    int zz[64];
    for (int i = 0; i < 64; ++i) {
      const int n = kZigzagToNatural[i];
      zz[i] = round_half_away(coef[n] / q[n]);
    }
    const auto& dc_codes = comp == 0 ? dc_luma : dc_chroma;
    const auto& ac_codes = comp == 0 ? ac_luma : ac_chroma;

    const int diff = zz[0] - prev_dc[comp];
    prev_dc[comp] = zz[0];
    const int dcat = magnitude_category(diff);
    bw.put(dc_codes[dcat].code, dc_codes[dcat].length);
    put_value(bw, diff, dcat);

    int run = 0;
    for (int i = 1; i < 64; ++i) {
      if (zz[i] == 0) {
        ++run;
        continue;
      }
      while (run > 15) {
        bw.put(ac_codes[0xF0].code, ac_codes[0xF0].length);
        run -= 16;
      }
      const int cat = magnitude_category(zz[i]);
      const int sym = (run << 4) | cat;
      bw.put(ac_codes[sym].code, ac_codes[sym].length);
      put_value(bw, zz[i], cat);
      run = 0;
    }
    if (run > 0) bw.put(ac_codes[0x00].code, ac_codes[0x00].length);
  };

  const std::size_t mcu_px = sub ? 16 : 8;
  const std::size_t mcus_x = (w + mcu_px - 1) / mcu_px, mcus_y = (h + mcu_px - 1) / mcu_px;
  const std::size_t total_mcus = mcus_x * mcus_y;
  std::size_t mcu_index = 0;
  unsigned restart_count = 0;
  for (std::size_t my = 0; my < mcus_y; ++my)
    for (std::size_t mx = 0; mx < mcus_x; ++mx) {
      if (sub) {
        for (std::size_t by = 0; by < 2; ++by)
          for (std::size_t bx = 0; bx < 2; ++bx) encode_block(planes[0], my * 2 + by, mx * 2 + bx, 0);
      } else {
        encode_block(planes[0], my, mx, 0);
      }
      encode_block(planes[1], my, mx, 1);
      encode_block(planes[2], my, mx, 2);
      ++mcu_index;
      if (cfg.restart_interval > 0 && mcu_index % cfg.restart_interval == 0 &&
          mcu_index < total_mcus) {
        bw.flush();
        write_marker(out, static_cast<std::uint8_t>(0xD0 + (restart_count++ & 7)));
        prev_dc = {0, 0, 0};
      }
    }
  bw.flush();
  write_marker(out, 0xD9);  // EOI
  return out;
}

}  // namespace lfz::jpeg
