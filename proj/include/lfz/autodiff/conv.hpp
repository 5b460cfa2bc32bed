#pragma once

#include <Eigen/Core>
#include <algorithm>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

enum class Padding { same, valid };

struct ConvOptions {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  Padding padding = Padding::same;
};

namespace detail {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Geometry of a strided cross-correlation from an H x W x C input.
struct ConvGeometry {
  std::size_t n, h, w, c;      // input
  std::size_t kh, kw, co;      // kernel
  std::size_t sh, sw;          // stride
  std::size_t pad_top, pad_left;
  std::size_t oh, ow;          // output

  std::size_t patch() const { return kh * kw * c; }
  bool pointwise() const { return kh == 1 && kw == 1 && sh == 1 && sw == 1; }

  // Output rows per chunk so one im2col block stays near 4M entries.
  std::size_t rows_per_chunk() const {
    const std::size_t per_row = std::max<std::size_t>(1, ow * patch());
    return std::clamp<std::size_t>((std::size_t{1} << 22) / per_row, 1, oh);
  }
};

inline ConvGeometry make_geometry(std::size_t n, std::size_t h, std::size_t w, std::size_t c, std::size_t kh,
                                  std::size_t kw, std::size_t co, ConvOptions opt) {
  if (opt.stride_h == 0 || opt.stride_w == 0) throw UsageError("conv2d: stride must be >= 1");
  ConvGeometry g{n, h, w, c, kh, kw, co, opt.stride_h, opt.stride_w, 0, 0, 0, 0};
  if (opt.padding == Padding::valid) {
    if (h < kh || w < kw) throw UsageError("conv2d: valid padding needs input at least kernel size");
    g.oh = (h - kh) / g.sh + 1;
    g.ow = (w - kw) / g.sw + 1;
  } else {
    g.oh = (h + g.sh - 1) / g.sh;
    g.ow = (w + g.sw - 1) / g.sw;
    const std::ptrdiff_t ph = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((g.oh - 1) * g.sh + kh) - static_cast<std::ptrdiff_t>(h));
    const std::ptrdiff_t pw = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>((g.ow - 1) * g.sw + kw) - static_cast<std::ptrdiff_t>(w));
    g.pad_top = static_cast<std::size_t>(ph) / 2;
    g.pad_left = static_cast<std::size_t>(pw) / 2;
  }
  return g;
}

// Fills rows [r0,r1) of the patch matrix for sample image `x` (H*W*C).
template <class T>
void im2col(const ConvGeometry& g, const T* x, std::size_t r0, std::size_t r1, T* cols) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = r0; oy < r1; ++oy)
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      T* row = cols + ((oy - r0) * g.ow + ox) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.sh + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * g.sw + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
          T* dst = row + (ky * g.kw + kx) * g.c;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.h) || ix >= static_cast<std::ptrdiff_t>(g.w))
            std::fill_n(dst, g.c, T(0));
          else
            std::copy_n(x + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c, g.c, dst);
        }
      }
    }
}

// Adjoint of im2col: scatter-adds patch rows back into the image.
template <class T>
void col2im(const ConvGeometry& g, const T* cols, std::size_t r0, std::size_t r1, T* x) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = r0; oy < r1; ++oy)
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      const T* row = cols + ((oy - r0) * g.ow + ox) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.sh + ky) - static_cast<std::ptrdiff_t>(g.pad_top);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const std::ptrdiff_t ix =
              static_cast<std::ptrdiff_t>(ox * g.sw + kx) - static_cast<std::ptrdiff_t>(g.pad_left);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          const T* src = row + (ky * g.kw + kx) * g.c;
          T* dst = x + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.c;
          for (std::size_t j = 0; j < g.c; ++j) dst[j] += src[j];
        }
      }
    }
}

// out[n] (OH*OW x CO) = patches(x[n]) * K
template <class T>
void correlate(const ConvGeometry& g, const T* x, const T* k, T* out) {
  using Map = Eigen::Map<RowMatrix<T>>;
  using CMap = Eigen::Map<const RowMatrix<T>>;
  const CMap kmat(k, static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.co));
  if (g.pointwise()) {
    const auto rows = static_cast<Eigen::Index>(g.n * g.h * g.w);
    Map(out, rows, static_cast<Eigen::Index>(g.co)).noalias() = CMap(x, rows, static_cast<Eigen::Index>(g.c)) * kmat;
    return;
  }
  const std::size_t chunk = g.rows_per_chunk();
  std::vector<T> cols(chunk * g.ow * g.patch());
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t r0 = 0; r0 < g.oh; r0 += chunk) {
      const std::size_t r1 = std::min(g.oh, r0 + chunk);
      const auto rows = static_cast<Eigen::Index>((r1 - r0) * g.ow);
      im2col(g, x + n * g.h * g.w * g.c, r0, r1, cols.data());
      Map(out + ((n * g.oh + r0) * g.ow) * g.co, rows, static_cast<Eigen::Index>(g.co)).noalias() =
          CMap(cols.data(), rows, static_cast<Eigen::Index>(g.patch())) * kmat;
    }
}

// dx[n] += col2im(dy[n] * K^T)
template <class T>
void correlate_adjoint(const ConvGeometry& g, const T* dy, const T* k, T* dx) {
  using Map = Eigen::Map<RowMatrix<T>>;
  using CMap = Eigen::Map<const RowMatrix<T>>;
  const CMap kmat(k, static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.co));
  if (g.pointwise()) {
    const auto rows = static_cast<Eigen::Index>(g.n * g.h * g.w);
    Map(dx, rows, static_cast<Eigen::Index>(g.c)).noalias() +=
        CMap(dy, rows, static_cast<Eigen::Index>(g.co)) * kmat.transpose();
    return;
  }
  const std::size_t chunk = g.rows_per_chunk();
  std::vector<T> cols(chunk * g.ow * g.patch());
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t r0 = 0; r0 < g.oh; r0 += chunk) {
      const std::size_t r1 = std::min(g.oh, r0 + chunk);
      const auto rows = static_cast<Eigen::Index>((r1 - r0) * g.ow);
      Map(cols.data(), rows, static_cast<Eigen::Index>(g.patch())).noalias() =
          CMap(dy + ((n * g.oh + r0) * g.ow) * g.co, rows, static_cast<Eigen::Index>(g.co)) * kmat.transpose();
      col2im(g, cols.data(), r0, r1, dx + n * g.h * g.w * g.c);
    }
}

// dK += sum_n patches(x[n])^T * dy[n]
template <class T>
void kernel_gradient(const ConvGeometry& g, const T* x, const T* dy, T* dk) {
  using Map = Eigen::Map<RowMatrix<T>>;
  using CMap = Eigen::Map<const RowMatrix<T>>;
  Map kmat(dk, static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.co));
  if (g.pointwise()) {
    const auto rows = static_cast<Eigen::Index>(g.n * g.h * g.w);
    kmat.noalias() += CMap(x, rows, static_cast<Eigen::Index>(g.c)).transpose() *
                      CMap(dy, rows, static_cast<Eigen::Index>(g.co));
    return;
  }
  const std::size_t chunk = g.rows_per_chunk();
  std::vector<T> cols(chunk * g.ow * g.patch());
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t r0 = 0; r0 < g.oh; r0 += chunk) {
      const std::size_t r1 = std::min(g.oh, r0 + chunk);
      const auto rows = static_cast<Eigen::Index>((r1 - r0) * g.ow);
      im2col(g, x + n * g.h * g.w * g.c, r0, r1, cols.data());
      kmat.noalias() += CMap(cols.data(), rows, static_cast<Eigen::Index>(g.patch())).transpose() *
                        CMap(dy + ((n * g.oh + r0) * g.ow) * g.co, rows, static_cast<Eigen::Index>(g.co));
    }
}

}  // namespace detail

/// 2-D cross-correlation. x is NHWC, k is [KH,KW,Cin,Cout]. "same" padding
/// puts the extra row/column of an odd pad total at the bottom/right.
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& k, ConvOptions opt = {}) {
  const Nhwc s = nhwc(x.value());
  if (k.shape().size() != 4 || k.shape()[2] != s.c)
    throw UsageError("conv2d: kernel " + shape_str(k.shape()) + " incompatible with input " + shape_str(x.shape()));
  const auto g = detail::make_geometry(s.n, s.h, s.w, s.c, k.shape()[0], k.shape()[1], k.shape()[3], opt);
  Tensor<T> out(Shape{g.n, g.oh, g.ow, g.co});
  detail::correlate(g, x.value().ptr(), k.value().ptr(), out.ptr());
  return make_result<T>("conv2d", std::move(out), {x, k}, [g](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& pk = *self.parents[1];
    if (px.requires_grad) detail::correlate_adjoint(g, self.grad.ptr(), pk.value.ptr(), px.ensure_grad().ptr());
    if (pk.requires_grad) detail::kernel_gradient(g, px.value.ptr(), self.grad.ptr(), pk.ensure_grad().ptr());
  });
}

/// Transposed convolution: the exact adjoint of conv2d(., k, stride, same)
/// from an (H*s) x (W*s) input. y is [N,H,W,Cout], k is [KH,KW,Cin,Cout] and
/// the result is [N,H*s,W*s,Cin].
template <class T>
Var<T> conv2d_transpose(const Var<T>& y, const Var<T>& k, std::size_t stride = 2) {
  const Nhwc s = nhwc(y.value());
  if (k.shape().size() != 4 || k.shape()[3] != s.c)
    throw UsageError("conv2d_transpose: kernel " + shape_str(k.shape()) + " incompatible with input " +
                     shape_str(y.shape()));
  const std::size_t ci = k.shape()[2];
  const auto g = detail::make_geometry(s.n, s.h * stride, s.w * stride, ci, k.shape()[0], k.shape()[1], s.c,
                                       {stride, stride, Padding::same});
  Tensor<T> out(Shape{g.n, g.h, g.w, g.c});
  detail::correlate_adjoint(g, y.value().ptr(), k.value().ptr(), out.ptr());
  return make_result<T>("conv2d_transpose", std::move(out), {y, k}, [g](Node<T>& self) {
    Node<T>& py = *self.parents[0];
    Node<T>& pk = *self.parents[1];
    if (py.requires_grad) {
      Tensor<T> tmp(py.value.shape());
      detail::correlate(g, self.grad.ptr(), pk.value.ptr(), tmp.ptr());
      accumulate(py, tmp);
    }
    if (pk.requires_grad) detail::kernel_gradient(g, self.grad.ptr(), py.value.ptr(), pk.ensure_grad().ptr());
  });
}

}  // namespace lfz::ad
