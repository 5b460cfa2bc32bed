#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lfz/core/error.hpp"

namespace lfz {

/// Round-half-away-from-zero quantization of a [0,1] sample to 8 bits.
inline std::uint8_t to_u8(float v) {
  const double s = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(s));
}

inline float from_u8(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

/// Interleaved RGB image, row-major, samples nominally in [0,1].
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t height, std::size_t width, float fill = 0.0f)
      : height_(height), width_(width), pixels_(height * width * kChannels, fill) {
    if (height == 0 || width == 0) throw DataError("image dimensions must be positive");
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels_[(y * width_ + x) * kChannels + c];
  }
  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * width_ + x) * kChannels + c];
  }

  std::span<float> data() { return pixels_; }
  std::span<const float> data() const { return pixels_; }

  bool same_shape(const Image& o) const { return height_ == o.height_ && width_ == o.width_; }

  /// True when every sample lies in [0,1] and is finite.
  bool in_unit_range() const {
    return std::all_of(pixels_.begin(), pixels_.end(),
                       [](float v) { return v >= 0.0f && v <= 1.0f; });
  }

  void clamp_unit() {
    for (float& v : pixels_) v = std::clamp(v, 0.0f, 1.0f);
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> pixels_;
};

/// Copies the window [top, top+h) x [left, left+w).
inline Image crop_image(const Image& img, std::size_t top, std::size_t left, std::size_t h,
                        std::size_t w) {
  if (top + h > img.height() || left + w > img.width())
    throw DataError("crop window exceeds image bounds");
  Image out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const float* src = &img.data()[((top + y) * img.width() + left) * Image::kChannels];
    std::copy(src, src + w * Image::kChannels, &out.data()[y * w * Image::kChannels]);
  }
  return out;
}

}  // namespace lfz
