#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lfz/autodiff/tensor.hpp"
#include "lfz/core/light_field.hpp"

namespace lfz {

/// Angular offsets (u-u0, v-v0) of every view in row-major order. `flip`
/// negates both axes for data captured with the opposite orientation.
struct AngularOffset {
  double du = 0;
  double dv = 0;
};

inline std::vector<AngularOffset> angular_offsets(AngularSize a, bool flip = false) {
  const double s = flip ? -1.0 : 1.0;
  const double u0 = static_cast<double>(a.u - 1) / 2, v0 = static_cast<double>(a.v - 1) / 2;
  std::vector<AngularOffset> out;
  for (std::size_t u = 0; u < a.u; ++u)
    for (std::size_t v = 0; v < a.v; ++v) out.push_back({s * (double(u) - u0), s * (double(v) - v0)});
  return out;
}

/// Per-view disparity maps (pixels per unit angular offset), one map per view
/// in row-major angular order.
class DepthStack {
 public:
  DepthStack() = default;
  DepthStack(AngularSize angular, std::size_t height, std::size_t width, std::vector<float> maps)
      : angular_(angular), height_(height), width_(width), maps_(std::move(maps)) {
    if (angular.u == 0 || angular.v == 0 || height == 0 || width == 0)
      throw DataError("depth stack dimensions must be positive");
    if (maps_.size() != angular.u * angular.v * height * width)
      throw DataError("depth stack size does not match its dimensions");
    for (float d : maps_)
      if (!std::isfinite(d)) throw DataError("depth stack contains a non-finite disparity");
  }

  static DepthStack constant(AngularSize a, std::size_t h, std::size_t w, float d) {
    return DepthStack(a, h, w, std::vector<float>(a.u * a.v * h * w, d));
  }

  /// From a network output [1,H,W,U*V].
  template <class T>
  static DepthStack from_tensor(const ad::Tensor<T>& t, AngularSize a, std::size_t sample = 0) {
    const auto s = ad::nhwc(t);
    if (s.c != a.u * a.v) throw DataError("disparity channels do not match the angular grid");
    std::vector<float> maps(s.c * s.h * s.w);
    const std::size_t hw = s.h * s.w;
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t k = 0; k < s.c; ++k) maps[k * hw + p] = static_cast<float>(t[(sample * hw + p) * s.c + k]);
    return DepthStack(a, s.h, s.w, std::move(maps));
  }

  /// As a [1,H,W,U*V] tensor.
  template <class T>
  ad::Tensor<T> to_tensor() const {
    const std::size_t hw = height_ * width_, v = view_count();
    ad::Tensor<T> t(ad::Shape{1, height_, width_, v});
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t k = 0; k < v; ++k) t[p * v + k] = static_cast<T>(maps_[k * hw + p]);
    return t;
  }

  AngularSize angular() const { return angular_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t view_count() const { return angular_.u * angular_.v; }
  std::size_t center_linear() const { return ((angular_.u - 1) / 2) * angular_.v + (angular_.v - 1) / 2; }
  ViewIndex view_index(std::size_t k) const { return {k / angular_.v, k % angular_.v}; }
  std::size_t linear(ViewIndex i) const { return i.u * angular_.v + i.v; }

  std::span<const float> map(std::size_t k) const {
    return std::span<const float>(maps_).subspan(k * height_ * width_, height_ * width_);
  }
  std::span<float> map(std::size_t k) { return std::span<float>(maps_).subspan(k * height_ * width_, height_ * width_); }
  float at(std::size_t k, std::size_t y, std::size_t x) const { return maps_[(k * height_ + y) * width_ + x]; }

  float max_abs() const {
    float m = 0;
    for (float d : maps_) m = std::max(m, std::abs(d));
    return m;
  }

 private:
  AngularSize angular_{};
  std::size_t height_ = 0, width_ = 0;
  std::vector<float> maps_;
};

}  // namespace lfz
