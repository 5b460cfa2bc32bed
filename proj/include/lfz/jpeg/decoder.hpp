#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfz/core/error.hpp"
#include "lfz/core/image.hpp"
#include "lfz/jpeg/tables.hpp"

namespace lfz::jpeg {

namespace detail {

/// Integer inverse DCT with 13-bit constants and two extra bits of
/// intermediate precision (the accurate "islow" algorithm of the IJG codec).
/// Output samples are level-shifted and clamped to [0,255].
inline void idct_islow(const std::int16_t coef[64], const std::uint16_t quant[64],
                       std::uint8_t out[64]) {
  constexpr int kConstBits = 13, kPass1Bits = 2;
  constexpr std::int64_t F0_298 = 2446, F0_390 = 3196, F0_541 = 4433, F0_765 = 6270,
                         F0_899 = 7373, F1_175 = 9633, F1_501 = 12299, F1_847 = 15137,
                         F1_961 = 16069, F2_053 = 16819, F2_562 = 20995, F3_072 = 25172;
  auto descale = [](std::int64_t x, int n) { return (x + (std::int64_t{1} << (n - 1))) >> n; };
  std::int64_t ws[64];

  for (int col = 0; col < 8; ++col) {
    auto in = [&](int r) {
      return static_cast<std::int64_t>(coef[r * 8 + col]) * static_cast<std::int64_t>(quant[r * 8 + col]);
    };
    if (coef[8 + col] == 0 && coef[16 + col] == 0 && coef[24 + col] == 0 && coef[32 + col] == 0 &&
        coef[40 + col] == 0 && coef[48 + col] == 0 && coef[56 + col] == 0) {
      const std::int64_t dc = in(0) * (1 << kPass1Bits);
      for (int r = 0; r < 8; ++r) ws[r * 8 + col] = dc;
      continue;
    }
    std::int64_t z2 = in(2), z3 = in(6);
    std::int64_t z1 = (z2 + z3) * F0_541;
    std::int64_t tmp2 = z1 + z3 * -F1_847;
    std::int64_t tmp3 = z1 + z2 * F0_765;
    z2 = in(0);
    z3 = in(4);
    std::int64_t tmp0 = (z2 + z3) * (1 << kConstBits);
    std::int64_t tmp1 = (z2 - z3) * (1 << kConstBits);
    const std::int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
    const std::int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

    tmp0 = in(7);
    tmp1 = in(5);
    tmp2 = in(3);
    tmp3 = in(1);
    z1 = tmp0 + tmp3;
    z2 = tmp1 + tmp2;
    z3 = tmp0 + tmp2;
    std::int64_t z4 = tmp1 + tmp3;
    const std::int64_t z5 = (z3 + z4) * F1_175;
    tmp0 *= F0_298;
    tmp1 *= F2_053;
    tmp2 *= F3_072;
    tmp3 *= F1_501;
    z1 *= -F0_899;
    z2 *= -F2_562;
    z3 = z3 * -F1_961 + z5;
    z4 = z4 * -F0_390 + z5;
    tmp0 += z1 + z3;
    tmp1 += z2 + z4;
    tmp2 += z2 + z3;
    tmp3 += z1 + z4;

    constexpr int s = kConstBits - kPass1Bits;
    ws[0 * 8 + col] = descale(tmp10 + tmp3, s);
    ws[7 * 8 + col] = descale(tmp10 - tmp3, s);
    ws[1 * 8 + col] = descale(tmp11 + tmp2, s);
    ws[6 * 8 + col] = descale(tmp11 - tmp2, s);
    ws[2 * 8 + col] = descale(tmp12 + tmp1, s);
    ws[5 * 8 + col] = descale(tmp12 - tmp1, s);
    ws[3 * 8 + col] = descale(tmp13 + tmp0, s);
    ws[4 * 8 + col] = descale(tmp13 - tmp0, s);
  }

  auto clamp_out = [](std::int64_t v) {
    return static_cast<std::uint8_t>(std::clamp<std::int64_t>(v + 128, 0, 255));
  };
  for (int row = 0; row < 8; ++row) {
    const std::int64_t* w = ws + row * 8;
    std::uint8_t* o = out + row * 8;
    if (w[1] == 0 && w[2] == 0 && w[3] == 0 && w[4] == 0 && w[5] == 0 && w[6] == 0 && w[7] == 0) {
      const auto v = clamp_out(descale(w[0], kPass1Bits + 3));
      std::fill(o, o + 8, v);
      continue;
    }
    std::int64_t z2 = w[2], z3 = w[6];
    std::int64_t z1 = (z2 + z3) * F0_541;
    std::int64_t tmp2 = z1 + z3 * -F1_847;
    std::int64_t tmp3 = z1 + z2 * F0_765;
    std::int64_t tmp0 = (w[0] + w[4]) * (1 << kConstBits);
    std::int64_t tmp1 = (w[0] - w[4]) * (1 << kConstBits);
    const std::int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
    const std::int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

    tmp0 = w[7];
    tmp1 = w[5];
    tmp2 = w[3];
    tmp3 = w[1];
    z1 = tmp0 + tmp3;
    z2 = tmp1 + tmp2;
    z3 = tmp0 + tmp2;
    std::int64_t z4 = tmp1 + tmp3;
    const std::int64_t z5 = (z3 + z4) * F1_175;
    tmp0 *= F0_298;
    tmp1 *= F2_053;
    tmp2 *= F3_072;
    tmp3 *= F1_501;
    z1 *= -F0_899;
    z2 *= -F2_562;
    z3 = z3 * -F1_961 + z5;
    z4 = z4 * -F0_390 + z5;
    tmp0 += z1 + z3;
    tmp1 += z2 + z4;
    tmp2 += z2 + z3;
    tmp3 += z1 + z4;

    constexpr int s = kConstBits + kPass1Bits + 3;
    o[0] = clamp_out(descale(tmp10 + tmp3, s));
    o[7] = clamp_out(descale(tmp10 - tmp3, s));
    o[1] = clamp_out(descale(tmp11 + tmp2, s));
    o[6] = clamp_out(descale(tmp11 - tmp2, s));
    o[2] = clamp_out(descale(tmp12 + tmp1, s));
    o[5] = clamp_out(descale(tmp12 - tmp1, s));
    o[3] = clamp_out(descale(tmp13 + tmp0, s));
    o[4] = clamp_out(descale(tmp13 - tmp0, s));
  }
}

struct HuffmanTable {
  bool defined = false;
  std::array<std::int32_t, 18> maxcode{};
  std::array<std::int32_t, 17> valptr{};
  std::array<std::int32_t, 17> mincode{};
  std::vector<std::uint8_t> values;

  void build(const std::array<std::uint8_t, 16>& counts, std::vector<std::uint8_t> vals) {
    values = std::move(vals);
    std::int32_t code = 0, k = 0;
    for (int len = 1; len <= 16; ++len) {
      valptr[len] = k;
      mincode[len] = code;
      code += counts[len - 1];
      k += counts[len - 1];
      maxcode[len] = counts[len - 1] ? code - 1 : -1;
      code <<= 1;
    }
    maxcode[17] = 0x7FFFFFFF;
    defined = true;
  }
};

struct Component {
  int id = 0;
  int h = 1, v = 1;
  int tq = 0;
  int td = 0, ta = 0;
  std::size_t blocks_w = 0, blocks_h = 0;  // allocated (MCU-padded) block grid
  std::size_t width = 0, height = 0;       // real downsampled extent
  std::vector<std::int16_t> coefs;         // blocks_w*blocks_h*64, natural order
  int pred = 0;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : d_(data) {}

  std::uint8_t byte() {
    if (pos_ >= d_.size()) throw DataError("truncated JPEG stream");
    return d_[pos_++];
  }
  unsigned u16() {
    const unsigned hi = byte();
    return (hi << 8) | byte();
  }
  void skip(std::size_t n) {
    if (pos_ + n > d_.size()) throw DataError("truncated JPEG stream");
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool at_end() const { return pos_ >= d_.size(); }
  std::span<const std::uint8_t> data() const { return d_; }

 private:
  std::span<const std::uint8_t> d_;
  std::size_t pos_ = 0;
};

/// Entropy-coded segment bit reader. Stops at markers; reading past one is an error.
class BitReader {
 public:
  explicit BitReader(Reader& r) : r_(r) {}

  int bit() {
    if (count_ == 0) fill();
    --count_;
    return (acc_ >> count_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  int decode(const HuffmanTable& t) {
    std::int32_t code = bit();
    int len = 1;
    while (code > t.maxcode[len]) {
      code = (code << 1) | bit();
      if (++len > 16) throw DataError("corrupt JPEG: bad Huffman code");
    }
    const std::size_t idx = static_cast<std::size_t>(t.valptr[len] + code - t.mincode[len]);
    if (idx >= t.values.size()) throw DataError("corrupt JPEG: bad Huffman code");
    return t.values[idx];
  }

  static int extend(int v, int n) { return n == 0 ? 0 : (v < (1 << (n - 1)) ? v - (1 << n) + 1 : v); }

  /// Discards buffered bits and consumes the expected RSTn marker.
  void restart(int expected) {
    count_ = 0;
    acc_ = 0;
    std::uint8_t b = r_.byte();
    while (b != 0xFF) b = r_.byte();
    std::uint8_t m = r_.byte();
    while (m == 0xFF) m = r_.byte();
    if (m != 0xD0 + (expected & 7)) throw DataError("corrupt JPEG: missing restart marker");
  }

 private:
  void fill() {
    const std::uint8_t b = r_.byte();
    if (b == 0xFF) {
      const std::uint8_t next = r_.byte();
      if (next != 0x00) throw DataError("truncated JPEG scan: marker inside entropy data");
    }
    acc_ = b;
    count_ = 8;
  }

  Reader& r_;
  std::uint32_t acc_ = 0;
  int count_ = 0;
};

}  // namespace detail

/// Header summary of a JPEG stream.
struct JpegInfo {
  std::size_t width = 0;
  std::size_t height = 0;
  int components = 0;
};

/// Baseline / extended-sequential Huffman JPEG decoder.
///
/// Supports 1 (grayscale) or 3 (YCbCr) components, any sampling factors up
/// to 4, interleaved and non-interleaved scans, and restart intervals.
/// Chroma is upsampled with the triangular filter for 2x1 / 2x2 sampling and
/// replication otherwise; colour conversion uses 16-bit fixed point. Output is
/// deterministic across runs. Progressive, lossless, hierarchical and
/// arithmetic-coded streams are rejected with DataError.
inline Image decode(std::span<const std::uint8_t> bytes, JpegInfo* info = nullptr) {
  using namespace detail;
  Reader r(bytes);
  if (r.byte() != 0xFF || r.byte() != 0xD8) throw DataError("not a JPEG stream (missing SOI)");

  std::array<std::array<std::uint16_t, 64>, 4> qt{};
  std::array<bool, 4> qt_defined{};
  std::array<HuffmanTable, 4> dc_tables, ac_tables;
  std::vector<Component> comps;
  std::size_t width = 0, height = 0;
  int hmax = 1, vmax = 1;
  std::size_t mcus_x = 0, mcus_y = 0;
  unsigned restart_interval = 0;
  bool frame_seen = false, eoi = false;

  while (!eoi) {
    std::uint8_t b = r.byte();
    if (b != 0xFF) throw DataError("corrupt JPEG: expected marker");
    std::uint8_t m = r.byte();
    while (m == 0xFF) m = r.byte();

    switch (m) {
      case 0xD9:
        eoi = true;
        break;
      case 0xDB: {  // DQT
        const std::size_t end = r.pos() + r.u16() - 2;
        while (r.pos() < end) {
          const std::uint8_t pq_tq = r.byte();
          const int tq = pq_tq & 0x0F, pq = pq_tq >> 4;
          if (tq > 3) throw DataError("corrupt JPEG: bad quantization table id");
          for (int i = 0; i < 64; ++i)
            qt[tq][kZigzagToNatural[i]] = static_cast<std::uint16_t>(pq ? r.u16() : r.byte());
          qt_defined[tq] = true;
        }
        break;
      }
      case 0xC4: {  // DHT
        const std::size_t end = r.pos() + r.u16() - 2;
        while (r.pos() < end) {
          const std::uint8_t tc_th = r.byte();
          const int tc = tc_th >> 4, th = tc_th & 0x0F;
          if (tc > 1 || th > 3) throw DataError("corrupt JPEG: bad Huffman table id");
          std::array<std::uint8_t, 16> counts{};
          int total = 0;
          for (auto& c : counts) total += (c = r.byte());
          if (total > 256) throw DataError("corrupt JPEG: bad Huffman table");
          std::vector<std::uint8_t> vals(static_cast<std::size_t>(total));
          for (auto& v : vals) v = r.byte();
          (tc == 0 ? dc_tables : ac_tables)[th].build(counts, std::move(vals));
        }
        break;
      }
      case 0xDD:  // DRI
        if (r.u16() != 4) throw DataError("corrupt JPEG: bad DRI length");
        restart_interval = r.u16();
        break;
      case 0xC0:
      case 0xC1: {  // SOF0 / SOF1
        if (frame_seen) throw DataError("corrupt JPEG: multiple frames");
        frame_seen = true;
        r.u16();
        if (r.byte() != 8) throw DataError("unsupported JPEG: only 8-bit precision");
        height = r.u16();
        width = r.u16();
        const int nc = r.byte();
        if (height == 0) throw DataError("unsupported JPEG: DNL-defined height");
        if (width == 0 || (nc != 1 && nc != 3))
          throw DataError("unsupported JPEG: component count " + std::to_string(nc));
        comps.resize(static_cast<std::size_t>(nc));
        for (auto& c : comps) {
          c.id = r.byte();
          const std::uint8_t hv = r.byte();
          c.h = hv >> 4;
          c.v = hv & 0x0F;
          c.tq = r.byte();
          if (c.h < 1 || c.h > 4 || c.v < 1 || c.v > 4 || c.tq > 3)
            throw DataError("corrupt JPEG: bad component parameters");
          hmax = std::max(hmax, c.h);
          vmax = std::max(vmax, c.v);
        }
        mcus_x = (width + 8 * hmax - 1) / (8 * hmax);
        mcus_y = (height + 8 * vmax - 1) / (8 * vmax);
        for (auto& c : comps) {
          if (hmax % c.h || vmax % c.v) throw DataError("unsupported JPEG: fractional sampling");
          c.width = (width * c.h + hmax - 1) / hmax;
          c.height = (height * c.v + vmax - 1) / vmax;
          c.blocks_w = mcus_x * c.h;
          c.blocks_h = mcus_y * c.v;
          c.coefs.assign(c.blocks_w * c.blocks_h * 64, 0);
        }
        break;
      }
      case 0xC2:
      case 0xC6:
      case 0xCA:
      case 0xCE:
        throw DataError("unsupported JPEG: progressive mode");
      case 0xC3:
      case 0xC7:
      case 0xCB:
      case 0xCF:
        throw DataError("unsupported JPEG: lossless mode");
      case 0xC5:
        throw DataError("unsupported JPEG: hierarchical mode");
      case 0xC9:
      case 0xCD:
        throw DataError("unsupported JPEG: arithmetic coding");
      case 0xDA: {  // SOS
        if (!frame_seen) throw DataError("corrupt JPEG: scan before frame header");
        r.u16();
        const int ns = r.byte();
        if (ns < 1 || ns > static_cast<int>(comps.size()))
          throw DataError("corrupt JPEG: bad scan component count");
        std::vector<Component*> sc;
        for (int i = 0; i < ns; ++i) {
          const int cid = r.byte();
          const std::uint8_t t = r.byte();
          auto it = std::find_if(comps.begin(), comps.end(), [&](auto& c) { return c.id == cid; });
          if (it == comps.end()) throw DataError("corrupt JPEG: unknown scan component");
          it->td = t >> 4;
          it->ta = t & 0x0F;
          if (it->td > 3 || it->ta > 3 || !dc_tables[it->td].defined || !ac_tables[it->ta].defined)
            throw DataError("corrupt JPEG: missing Huffman table");
          sc.push_back(&*it);
        }
        const int ss = r.byte(), se = r.byte();
        r.byte();
        if (ss != 0 || se != 63) throw DataError("unsupported JPEG: spectral selection");

        BitReader br(r);
        for (auto* c : sc) c->pred = 0;

        auto decode_block = [&](Component& c, std::size_t by, std::size_t bx) {
          std::int16_t* blk = &c.coefs[(by * c.blocks_w + bx) * 64];
          const int t = br.decode(dc_tables[c.td]);
          if (t > 11) throw DataError("corrupt JPEG: bad DC magnitude");
          c.pred += BitReader::extend(br.bits(t), t);
          blk[0] = static_cast<std::int16_t>(c.pred);
          for (int k = 1; k < 64;) {
            const int rs = br.decode(ac_tables[c.ta]);
            const int run = rs >> 4, size = rs & 0x0F;
            if (size == 0) {
              if (run != 15) break;
              k += 16;
              continue;
            }
            k += run;
            if (k > 63) throw DataError("corrupt JPEG: AC index overflow");
            blk[kZigzagToNatural[static_cast<std::size_t>(k)]] =
                static_cast<std::int16_t>(BitReader::extend(br.bits(size), size));
            ++k;
          }
        };

        std::size_t units_x, units_y;
        if (ns == 1) {  // non-interleaved: one block per MCU over the real extent
          units_x = (sc[0]->width + 7) / 8;
          units_y = (sc[0]->height + 7) / 8;
        } else {
          units_x = mcus_x;
          units_y = mcus_y;
        }
        const std::size_t total = units_x * units_y;
        int next_rst = 0;
        for (std::size_t n = 0; n < total; ++n) {
          if (restart_interval && n > 0 && n % restart_interval == 0) {
            br.restart(next_rst++);
            for (auto* c : sc) c->pred = 0;
          }
          const std::size_t my = n / units_x, mx = n % units_x;
          if (ns == 1) {
            decode_block(*sc[0], my, mx);
          } else {
            for (auto* c : sc)
              for (int y = 0; y < c->v; ++y)
                for (int x = 0; x < c->h; ++x)
                  decode_block(*c, my * static_cast<std::size_t>(c->v) + static_cast<std::size_t>(y),
                               mx * static_cast<std::size_t>(c->h) + static_cast<std::size_t>(x));
          }
        }
        break;
      }
      default:
        if (m >= 0xD0 && m <= 0xD7) throw DataError("corrupt JPEG: stray restart marker");
        if (m == 0x01) break;
        r.skip(r.u16() - 2);  // APPn, COM and other segments
        break;
    }

    if (!eoi) {
      // Scan data ends at the next marker; skip any fill bytes.
      while (!r.at_end() && r.data()[r.pos()] != 0xFF) r.byte();
    }
  }
  if (!frame_seen) throw DataError("corrupt JPEG: no frame header");

  // Reconstruct each component plane.
  std::vector<std::vector<std::uint8_t>> planes(comps.size());
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    Component& c = comps[ci];
    if (!qt_defined[static_cast<std::size_t>(c.tq)])
      throw DataError("corrupt JPEG: missing quantization table");
    const std::size_t pw = c.blocks_w * 8;
    auto& plane = planes[ci];
    plane.assign(pw * c.blocks_h * 8, 0);
    std::uint8_t block[64];
    for (std::size_t by = 0; by < c.blocks_h; ++by)
      for (std::size_t bx = 0; bx < c.blocks_w; ++bx) {
        idct_islow(&c.coefs[(by * c.blocks_w + bx) * 64], qt[static_cast<std::size_t>(c.tq)].data(),
                   block);
        for (int y = 0; y < 8; ++y)
          std::copy(block + y * 8, block + y * 8 + 8, &plane[(by * 8 + y) * pw + bx * 8]);
      }
  }

  // Upsample to full resolution (width x height).
  auto upsample = [&](const Component& c, const std::vector<std::uint8_t>& p) {
    const std::size_t pw = c.blocks_w * 8;
    std::vector<std::uint8_t> out(width * height);
    auto src = [&](std::size_t y, std::size_t x) {
      return static_cast<int>(p[std::min(y, c.height - 1) * pw + std::min(x, c.width - 1)]);
    };
    const int fx = hmax / c.h, fy = vmax / c.v;
    if (fx == 1 && fy == 1) {
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) out[y * width + x] = p[y * pw + x];
    } else if (fx == 2 && fy == 2 && c.width > 2) {
      // Triangular filter: 3/4 nearer + 1/4 farther sample in each direction.
      std::vector<int> row(c.width * 2);
      for (std::size_t y = 0; y < height; ++y) {
        const std::size_t iy = y / 2;
        const std::size_t ny = (y % 2 == 0) ? (iy == 0 ? 0 : iy - 1) : std::min(iy + 1, c.height - 1);
        auto colsum = [&](std::size_t x) { return src(iy, x) * 3 + src(ny, x); };
        int this_sum = colsum(0), next_sum = colsum(1), last_sum = 0;
        row[0] = (this_sum * 4 + 8) >> 4;
        row[1] = (this_sum * 3 + next_sum + 7) >> 4;
        for (std::size_t x = 1; x + 1 < c.width; ++x) {
          last_sum = this_sum;
          this_sum = next_sum;
          next_sum = colsum(x + 1);
          row[2 * x] = (this_sum * 3 + last_sum + 8) >> 4;
          row[2 * x + 1] = (this_sum * 3 + next_sum + 7) >> 4;
        }
        last_sum = this_sum;
        this_sum = next_sum;
        const std::size_t last = c.width - 1;
        row[2 * last] = (this_sum * 3 + last_sum + 8) >> 4;
        row[2 * last + 1] = (this_sum * 4 + 7) >> 4;
        for (std::size_t x = 0; x < width; ++x) out[y * width + x] = static_cast<std::uint8_t>(row[x]);
      }
    } else if (fx == 2 && fy == 1 && c.width > 2) {
      std::vector<int> row(c.width * 2);
      for (std::size_t y = 0; y < height; ++y) {
        const std::size_t last = c.width - 1;
        row[0] = src(y, 0);
        row[1] = (src(y, 0) * 3 + src(y, 1) + 2) >> 2;
        for (std::size_t x = 1; x < last; ++x) {
          const int v = src(y, x) * 3;
          row[2 * x] = (v + src(y, x - 1) + 1) >> 2;
          row[2 * x + 1] = (v + src(y, x + 1) + 2) >> 2;
        }
        row[2 * last] = (src(y, last) * 3 + src(y, last - 1) + 1) >> 2;
        row[2 * last + 1] = src(y, last);
        for (std::size_t x = 0; x < width; ++x) out[y * width + x] = static_cast<std::uint8_t>(row[x]);
      }
    } else {
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
          out[y * width + x] = static_cast<std::uint8_t>(src(y / static_cast<std::size_t>(fy), x / static_cast<std::size_t>(fx)));
    }
    return out;
  };

  std::vector<std::vector<std::uint8_t>> full(comps.size());
  for (std::size_t ci = 0; ci < comps.size(); ++ci) full[ci] = upsample(comps[ci], planes[ci]);

  Image img(height, width);
  if (comps.size() == 1) {
    for (std::size_t i = 0; i < width * height; ++i)
      for (std::size_t c = 0; c < 3; ++c) img.data()[i * 3 + c] = from_u8(full[0][i]);
  } else {
    // 16-bit fixed-point YCbCr -> RGB.
    constexpr int kScale = 16;
    constexpr std::int32_t kHalf = 1 << (kScale - 1);
    auto fix = [](double x) { return static_cast<std::int32_t>(x * (1 << kScale) + 0.5); };
    std::array<int, 256> cr_r{}, cb_b{};
    std::array<std::int32_t, 256> cr_g{}, cb_g{};
    for (int i = 0; i < 256; ++i) {
      const std::int32_t x = i - 128;
      cr_r[static_cast<std::size_t>(i)] = (fix(1.40200) * x + kHalf) >> kScale;
      cb_b[static_cast<std::size_t>(i)] = (fix(1.77200) * x + kHalf) >> kScale;
      cr_g[static_cast<std::size_t>(i)] = -fix(0.71414) * x;
      cb_g[static_cast<std::size_t>(i)] = -fix(0.34414) * x + kHalf;
    }
    auto lim = [](int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); };
    for (std::size_t i = 0; i < width * height; ++i) {
      const int y = full[0][i];
      const std::size_t cb = full[1][i], cr = full[2][i];
      img.data()[i * 3 + 0] = from_u8(lim(y + cr_r[cr]));
      img.data()[i * 3 + 1] = from_u8(lim(y + ((cb_g[cb] + cr_g[cr]) >> kScale)));
      img.data()[i * 3 + 2] = from_u8(lim(y + cb_b[cb]));
    }
  }
  if (info) *info = {width, height, static_cast<int>(comps.size())};
  return img;
}

}  // namespace lfz::jpeg
