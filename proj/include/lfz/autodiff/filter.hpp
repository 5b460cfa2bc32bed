#pragma once

#include <cmath>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

/// Normalized 1-D Gaussian taps of odd length `size`.
template <class T>
std::vector<T> gaussian_taps(std::size_t size, double sigma) {
  if (size % 2 == 0) throw UsageError("gaussian window size must be odd");
  std::vector<double> w(size);
  const double r = static_cast<double>(size / 2);
  double total = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - r;
    w[i] = std::exp(-(d * d) / (2 * sigma * sigma));
    total += w[i];
  }
  std::vector<T> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = static_cast<T>(w[i] / total);
  return out;
}

/// Depthwise separable filtering with the same taps along both axes, keeping
/// only positions where the window fits ("valid"). [N,H,W,C] -> [N,H-k+1,W-k+1,C].
template <class T>
Var<T> separable_filter_valid(const Var<T>& x, const std::vector<T>& taps) {
  const Nhwc s = nhwc(x.value());
  const std::size_t k = taps.size();
  if (k == 0 || s.h < k || s.w < k) throw UsageError("separable_filter_valid: image smaller than window");
  const std::size_t oh = s.h - k + 1, ow = s.w - k + 1;
  // Rows are processed as contiguous runs of W*C samples: shifting by one
  // pixel is an offset of C, so every inner loop is unit-stride.
  const std::size_t row = s.w * s.c, orow = ow * s.c;
  // Horizontal pass into [N,H,OW,C], then vertical into [N,OH,OW,C].
  std::vector<T> mid(s.n * s.h * orow, T(0));
  const T* xv = x.value().ptr();
  for (std::size_t r = 0; r < s.n * s.h; ++r) {
    T* m = &mid[r * orow];
    const T* src = xv + r * row;
    for (std::size_t t = 0; t < k; ++t) {
      const T w = taps[t];
      const T* in = src + t * s.c;
      for (std::size_t j = 0; j < orow; ++j) m[j] += w * in[j];
    }
  }
  Tensor<T> out(Shape{s.n, oh, ow, s.c});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t oy = 0; oy < oh; ++oy) {
      T* o = out.ptr() + (n * oh + oy) * orow;
      for (std::size_t t = 0; t < k; ++t) {
        const T w = taps[t];
        const T* m = &mid[(n * s.h + oy + t) * orow];
        for (std::size_t j = 0; j < orow; ++j) o[j] += w * m[j];
      }
    }
  return make_result<T>("separable_filter_valid", std::move(out), {x}, [s, taps, k, oh, row, orow](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    std::vector<T> gmid(s.n * s.h * orow, T(0));
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t oy = 0; oy < oh; ++oy) {
        const T* g = self.grad.ptr() + (n * oh + oy) * orow;
        for (std::size_t t = 0; t < k; ++t) {
          const T w = taps[t];
          T* m = &gmid[(n * s.h + oy + t) * orow];
          for (std::size_t j = 0; j < orow; ++j) m[j] += w * g[j];
        }
      }
    Tensor<T>& gx = px.ensure_grad();
    for (std::size_t r = 0; r < s.n * s.h; ++r) {
      const T* m = &gmid[r * orow];
      T* dst = gx.ptr() + r * row;
      for (std::size_t t = 0; t < k; ++t) {
        const T w = taps[t];
        T* d = dst + t * s.c;
        for (std::size_t j = 0; j < orow; ++j) d[j] += w * m[j];
      }
    }
  });
}

}  // namespace lfz::ad
