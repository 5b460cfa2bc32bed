#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

namespace detail {

struct BilinearTap {
  std::size_t y0, y1, x0, x1;
  double wy, wx;
  bool inside_y, inside_x;  // false when the coordinate was clamped to the border
};

template <class T>
BilinearTap bilinear_tap(T cy, T cx, std::size_t h, std::size_t w) {
  BilinearTap t{};
  const T maxy = static_cast<T>(h - 1), maxx = static_cast<T>(w - 1);
  t.inside_y = cy >= T(0) && cy <= maxy;
  t.inside_x = cx >= T(0) && cx <= maxx;
  const T y = std::clamp(cy, T(0), maxy);
  const T x = std::clamp(cx, T(0), maxx);
  const T fy = std::floor(y), fx = std::floor(x);
  t.y0 = static_cast<std::size_t>(fy);
  t.x0 = static_cast<std::size_t>(fx);
  t.y1 = std::min(t.y0 + 1, h - 1);
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.wy = static_cast<double>(y - fy);
  t.wx = static_cast<double>(x - fx);
  return t;
}

}  // namespace detail

/// Bilinear sampling with border clamping. img is [Ni,H,W,C]; coords is
/// [Nc,Ho,Wo,2] holding (row, col) in pixel units, with Nc a multiple of Ni:
/// coordinate sample i reads image i / (Nc/Ni). Result is [Nc,Ho,Wo,C].
template <class T>
Var<T> grid_sample(const Var<T>& img, const Var<T>& coords) {
  const Nhwc si = nhwc(img.value());
  const Nhwc sc = nhwc(coords.value());
  if (sc.c != 2) throw UsageError("grid_sample: coordinate tensor last dimension must be 2");
  if (sc.n % si.n != 0) throw UsageError("grid_sample: coordinate batch must be a multiple of image batch");
  const std::size_t group = sc.n / si.n;
  Tensor<T> out(Shape{sc.n, sc.h, sc.w, si.c});
  const T* iv = img.value().ptr();
  const T* cv = coords.value().ptr();
  for (std::size_t b = 0; b < sc.n; ++b) {
    const T* src = iv + (b / group) * si.h * si.w * si.c;
    for (std::size_t p = 0; p < sc.h * sc.w; ++p) {
      const std::size_t q = b * sc.h * sc.w + p;
      const auto t = detail::bilinear_tap(cv[2 * q], cv[2 * q + 1], si.h, si.w);
      const T wy = static_cast<T>(t.wy), wx = static_cast<T>(t.wx);
      const T* a = src + (t.y0 * si.w + t.x0) * si.c;
      const T* bb = src + (t.y0 * si.w + t.x1) * si.c;
      const T* c = src + (t.y1 * si.w + t.x0) * si.c;
      const T* d = src + (t.y1 * si.w + t.x1) * si.c;
      T* o = out.ptr() + q * si.c;
      // Nested lerps: exact at integer coordinates and on constant regions.
      for (std::size_t ch = 0; ch < si.c; ++ch) {
        const T top = a[ch] + wx * (bb[ch] - a[ch]);
        const T bottom = c[ch] + wx * (d[ch] - c[ch]);
        o[ch] = top + wy * (bottom - top);
      }
    }
  }
  return make_result<T>("grid_sample", std::move(out), {img, coords}, [si, sc, group](Node<T>& self) {
    Node<T>& pi = *self.parents[0];
    Node<T>& pc = *self.parents[1];
    const T* iv = pi.value.ptr();
    const T* cv = pc.value.ptr();
    T* gi = pi.requires_grad ? pi.ensure_grad().ptr() : nullptr;
    T* gc = pc.requires_grad ? pc.ensure_grad().ptr() : nullptr;
    for (std::size_t b = 0; b < sc.n; ++b) {
      const std::size_t off = (b / group) * si.h * si.w * si.c;
      for (std::size_t p = 0; p < sc.h * sc.w; ++p) {
        const std::size_t q = b * sc.h * sc.w + p;
        const auto t = detail::bilinear_tap(cv[2 * q], cv[2 * q + 1], si.h, si.w);
        const std::size_t i00 = off + (t.y0 * si.w + t.x0) * si.c, i01 = off + (t.y0 * si.w + t.x1) * si.c;
        const std::size_t i10 = off + (t.y1 * si.w + t.x0) * si.c, i11 = off + (t.y1 * si.w + t.x1) * si.c;
        const T* g = self.grad.ptr() + q * si.c;
        if (gi) {
          const T w00 = static_cast<T>((1 - t.wy) * (1 - t.wx)), w01 = static_cast<T>((1 - t.wy) * t.wx);
          const T w10 = static_cast<T>(t.wy * (1 - t.wx)), w11 = static_cast<T>(t.wy * t.wx);
          for (std::size_t ch = 0; ch < si.c; ++ch) {
            gi[i00 + ch] += w00 * g[ch];
            gi[i01 + ch] += w01 * g[ch];
            gi[i10 + ch] += w10 * g[ch];
            gi[i11 + ch] += w11 * g[ch];
          }
        }
        if (gc) {
          T dy = 0, dx = 0;
          for (std::size_t ch = 0; ch < si.c; ++ch) {
            const T a = iv[i00 + ch], bb = iv[i01 + ch], c = iv[i10 + ch], d = iv[i11 + ch];
            dy += g[ch] * static_cast<T>((1 - t.wx) * (c - a) + t.wx * (d - bb));
            dx += g[ch] * static_cast<T>((1 - t.wy) * (bb - a) + t.wy * (d - c));
          }
          if (t.inside_y) gc[2 * q] += dy;
          if (t.inside_x) gc[2 * q + 1] += dx;
        }
      }
    }
  });
}

/// Sampling grid displaced along per-sample angular offsets:
/// coords(b,y,x) = (y + sign*du[b]*d(b,y,x), x + sign*dv[b]*d(b,y,x)).
/// disp is [B,H,W,1]; du/dv have length B.
template <class T>
Var<T> displaced_grid(const Var<T>& disp, const std::vector<T>& du, const std::vector<T>& dv) {
  const Nhwc s = nhwc(disp.value());
  if (s.c != 1) throw UsageError("displaced_grid: disparity must have one channel");
  if (du.size() != s.n || dv.size() != s.n) throw UsageError("displaced_grid: offset count mismatch");
  Tensor<T> out(Shape{s.n, s.h, s.w, 2});
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t y = 0; y < s.h; ++y)
      for (std::size_t x = 0; x < s.w; ++x) {
        const std::size_t q = (b * s.h + y) * s.w + x;
        const T d = disp.value()[q];
        out[2 * q] = static_cast<T>(y) + du[b] * d;
        out[2 * q + 1] = static_cast<T>(x) + dv[b] * d;
      }
  return make_result<T>("displaced_grid", std::move(out), {disp}, [s, du, dv](Node<T>& self) {
    Node<T>& pd = *self.parents[0];
    if (!pd.requires_grad) return;
    Tensor<T>& g = pd.ensure_grad();
    for (std::size_t b = 0; b < s.n; ++b)
      for (std::size_t p = 0; p < s.h * s.w; ++p) {
        const std::size_t q = b * s.h * s.w + p;
        g[q] += du[b] * self.grad[2 * q] + dv[b] * self.grad[2 * q + 1];
      }
  });
}

}  // namespace lfz::ad
