#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

namespace detail {

template <class T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw UsageError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

// y = f(x); dy/dx = df(x, y).
template <class T, class F, class DF>
Var<T> unary(const char* op, const Var<T>& x, F f, DF df) {
  Tensor<T> out(x.shape());
  const Tensor<T>& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  return make_result<T>(op, std::move(out), {x}, [df](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(px.value[i], self.value[i]);
  });
}

}  // namespace detail

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "add");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return make_result<T>("add", std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    accumulate(*self.parents[1], self.grad);
  });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return make_result<T>("sub", std::move(out), {a, b}, [](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    Node<T>& pb = *self.parents[1];
    if (!pb.requires_grad) return;
    Tensor<T>& g = pb.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
  });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return make_result<T>("mul", std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor<T>& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor<T>& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "div");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] / b.value()[i];
  return make_result<T>("div", std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor<T>& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor<T>& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i] * self.value[i] / pb.value[i];
    }
  });
}

template <class T>
Var<T> add_scalar(const Var<T>& x, T s) {
  return detail::unary<T>("add_scalar", x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <class T>
Var<T> scale(const Var<T>& x, T s) {
  return detail::unary<T>("scale", x, [s](T v) { return v * s; }, [s](T, T) { return s; });
}

template <class T>
Var<T> square(const Var<T>& x) {
  return detail::unary<T>("square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <class T>
Var<T> abs(const Var<T>& x) {
  return detail::unary<T>(
      "abs", x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

/// ELU with alpha = 1.
template <class T>
Var<T> elu(const Var<T>& x) {
  return detail::unary<T>(
      "elu", x, [](T v) { return v > T(0) ? v : std::expm1(v); },
      [](T v, T y) { return v > T(0) ? T(1) : y + T(1); });
}

template <class T>
Var<T> tanh(const Var<T>& x) {
  return detail::unary<T>(
      "tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  return detail::unary<T>(
      "clamp", x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v >= lo && v <= hi) ? T(1) : T(0); });
}

template <class T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <class T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <class T>
Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }
template <class T>
Var<T> operator/(const Var<T>& a, const Var<T>& b) { return div(a, b); }
template <class T>
Var<T> operator*(const Var<T>& a, T s) { return scale(a, s); }
template <class T>
Var<T> operator*(T s, const Var<T>& a) { return scale(a, s); }
template <class T>
Var<T> operator+(const Var<T>& a, T s) { return add_scalar(a, s); }

/// Adds a per-channel bias b[C] along the last axis.
template <class T>
Var<T> add_channel(const Var<T>& x, const Var<T>& b) {
  const std::size_t c = x.shape().back();
  if (b.size() != c) throw UsageError("add_channel: bias length does not match channels");
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] + b.value()[i % c];
  return make_result<T>("add_channel", std::move(out), {x, b}, [c](Node<T>& self) {
    accumulate(*self.parents[0], self.grad);
    Node<T>& pb = *self.parents[1];
    if (!pb.requires_grad) return;
    Tensor<T>& g = pb.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % c] += self.grad[i];
  });
}

/// Multiplies by a per-channel factor s[C] along the last axis.
template <class T>
Var<T> mul_channel(const Var<T>& x, const Var<T>& s) {
  const std::size_t c = x.shape().back();
  if (s.size() != c) throw UsageError("mul_channel: scale length does not match channels");
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * s.value()[i % c];
  return make_result<T>("mul_channel", std::move(out), {x, s}, [c](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& ps = *self.parents[1];
    if (px.requires_grad) {
      Tensor<T>& g = px.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * ps.value[i % c];
    }
    if (ps.requires_grad) {
      Tensor<T>& g = ps.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % c] += self.grad[i] * px.value[i];
    }
  });
}

template <class T>
Var<T> sum(const Var<T>& x) {
  T s = 0;
  for (T v : x.value().data()) s += v;
  return make_result<T>("sum", Tensor<T>::scalar(s), {x}, [](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    const T up = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += up;
  });
}

template <class T>
Var<T> mean(const Var<T>& x) {
  const T n = static_cast<T>(x.size());
  T s = 0;
  for (T v : x.value().data()) s += v;
  return make_result<T>("mean", Tensor<T>::scalar(s / n), {x}, [n](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    const T up = self.grad[0] / n;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += up;
  });
}

/// Weighted sum of scalar terms.
template <class T>
Var<T> weighted_sum(const std::vector<Var<T>>& terms, const std::vector<T>& weights) {
  if (terms.size() != weights.size()) throw UsageError("weighted_sum: weight count mismatch");
  T s = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].size() != 1) throw UsageError("weighted_sum: terms must be scalars");
    s += weights[i] * terms[i].item();
  }
  return make_result<T>("weighted_sum", Tensor<T>::scalar(s), terms, [weights](Node<T>& self) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      Node<T>& p = *self.parents[i];
      if (p.requires_grad) p.ensure_grad()[0] += weights[i] * self.grad[0];
    }
  });
}

// ---- layout ops (NHWC) ----

template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw UsageError("concat_channels: no inputs");
  const Nhwc s0 = nhwc(xs[0].value());
  std::size_t total = 0;
  std::vector<std::size_t> offs;
  for (const Var<T>& x : xs) {
    const Nhwc s = nhwc(x.value());
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w)
      throw UsageError("concat_channels: spatial shape mismatch");
    offs.push_back(total);
    total += s.c;
  }
  Tensor<T> out(Shape{s0.n, s0.h, s0.w, total});
  const std::size_t pixels = s0.n * s0.h * s0.w;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t c = xs[k].shape()[3];
    const T* src = xs[k].value().ptr();
    for (std::size_t p = 0; p < pixels; ++p)
      std::copy(src + p * c, src + (p + 1) * c, out.ptr() + p * total + offs[k]);
  }
  return make_result<T>("concat_channels", std::move(out), xs, [offs, total, pixels](Node<T>& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      Node<T>& p = *self.parents[k];
      if (!p.requires_grad) continue;
      const std::size_t c = p.value.shape()[3];
      Tensor<T>& g = p.ensure_grad();
      for (std::size_t q = 0; q < pixels; ++q)
        for (std::size_t j = 0; j < c; ++j) g[q * c + j] += self.grad[q * total + offs[k] + j];
    }
  });
}

template <class T>
Var<T> slice_channels(const Var<T>& x, std::size_t first, std::size_t count) {
  const Nhwc s = nhwc(x.value());
  if (count == 0 || first + count > s.c) throw UsageError("slice_channels: range out of bounds");
  Tensor<T> out(Shape{s.n, s.h, s.w, count});
  const std::size_t pixels = s.n * s.h * s.w;
  for (std::size_t p = 0; p < pixels; ++p)
    for (std::size_t j = 0; j < count; ++j) out[p * count + j] = x.value()[p * s.c + first + j];
  return make_result<T>("slice_channels", std::move(out), {x}, [s, first, count, pixels](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t p = 0; p < pixels; ++p)
      for (std::size_t j = 0; j < count; ++j) g[p * s.c + first + j] += self.grad[p * count + j];
  });
}

/// Zero-pads `bottom` rows and `right` columns.
template <class T>
Var<T> pad_spatial(const Var<T>& x, std::size_t bottom, std::size_t right) {
  const Nhwc s = nhwc(x.value());
  const std::size_t oh = s.h + bottom, ow = s.w + right;
  Tensor<T> out(Shape{s.n, oh, ow, s.c});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t y = 0; y < s.h; ++y)
      std::copy_n(&x.value().ptr()[((n * s.h + y) * s.w) * s.c], s.w * s.c, &out.ptr()[((n * oh + y) * ow) * s.c]);
  return make_result<T>("pad_spatial", std::move(out), {x}, [s, oh, ow](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t i = 0; i < s.w * s.c; ++i)
          g[((n * s.h + y) * s.w) * s.c + i] += self.grad[((n * oh + y) * ow) * s.c + i];
  });
}

template <class T>
Var<T> crop_spatial(const Var<T>& x, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  const Nhwc s = nhwc(x.value());
  if (top + h > s.h || left + w > s.w || h == 0 || w == 0)
    throw UsageError("crop_spatial: window out of bounds");
  Tensor<T> out(Shape{s.n, h, w, s.c});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t y = 0; y < h; ++y)
      std::copy_n(&x.value().ptr()[((n * s.h + top + y) * s.w + left) * s.c], w * s.c,
                  &out.ptr()[((n * h + y) * w) * s.c]);
  return make_result<T>("crop_spatial", std::move(out), {x}, [s, top, left, h, w](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t i = 0; i < w * s.c; ++i)
          g[((n * s.h + top + y) * s.w + left) * s.c + i] += self.grad[((n * h + y) * w) * s.c + i];
  });
}

/// [N,...] -> [N*k,...]; sample i of the result is sample i/k of the input.
template <class T>
Var<T> repeat_batch(const Var<T>& x, std::size_t k) {
  const std::size_t n = x.shape().at(0);
  const std::size_t per = x.size() / n;
  Shape shape = x.shape();
  shape[0] = n * k;
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < n * k; ++i)
    std::copy_n(x.value().ptr() + (i / k) * per, per, out.ptr() + i * per);
  return make_result<T>("repeat_batch", std::move(out), {x}, [n, k, per](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t i = 0; i < n * k; ++i)
      for (std::size_t j = 0; j < per; ++j) g[(i / k) * per + j] += self.grad[i * per + j];
  });
}

/// [N*k,...] -> [N,...], mean over each group of k consecutive samples.
template <class T>
Var<T> batch_group_mean(const Var<T>& x, std::size_t k) {
  const std::size_t nk = x.shape().at(0);
  if (k == 0 || nk % k != 0) throw UsageError("batch_group_mean: batch not divisible by group");
  const std::size_t n = nk / k;
  const std::size_t per = x.size() / nk;
  Shape shape = x.shape();
  shape[0] = n;
  Tensor<T> out(shape);
  const T inv = T(1) / static_cast<T>(k);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t j = 0; j < per; ++j) {
      T s = 0;
      for (std::size_t i = 0; i < k; ++i) s += x.value()[(b * k + i) * per + j];
      out[b * per + j] = s * inv;
    }
  return make_result<T>("batch_group_mean", std::move(out), {x}, [n, k, per, inv](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < per; ++j) g[(b * k + i) * per + j] += self.grad[b * per + j] * inv;
  });
}

/// [N,H,W,C] -> [N*C,H,W,1]; entry n*C+c holds channel c of sample n.
template <class T>
Var<T> channels_to_batch(const Var<T>& x) {
  const Nhwc s = nhwc(x.value());
  const std::size_t hw = s.h * s.w;
  Tensor<T> out(Shape{s.n * s.c, s.h, s.w, 1});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t c = 0; c < s.c; ++c) out[(n * s.c + c) * hw + p] = x.value()[(n * hw + p) * s.c + c];
  return make_result<T>("channels_to_batch", std::move(out), {x}, [s, hw](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < s.c; ++c) g[(n * hw + p) * s.c + c] += self.grad[(n * s.c + c) * hw + p];
  });
}

/// Selects samples [first, first+count) of the batch.
template <class T>
Var<T> slice_batch(const Var<T>& x, std::size_t first, std::size_t count) {
  const std::size_t n = x.shape().at(0);
  if (count == 0 || first + count > n) throw UsageError("slice_batch: range out of bounds");
  const std::size_t per = x.size() / n;
  Shape shape = x.shape();
  shape[0] = count;
  Tensor<T> out(shape);
  std::copy_n(x.value().ptr() + first * per, count * per, out.ptr());
  return make_result<T>("slice_batch", std::move(out), {x}, [first, per](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    if (!px.requires_grad) return;
    Tensor<T>& g = px.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[first * per + i] += self.grad[i];
  });
}

/// Concatenates along the batch axis.
template <class T>
Var<T> concat_batch(const std::vector<Var<T>>& xs) {
  Shape shape = xs.at(0).shape();
  const std::size_t per = xs[0].size() / shape[0];
  std::size_t total = 0;
  for (const auto& x : xs) {
    if (x.size() / x.shape()[0] != per) throw UsageError("concat_batch: sample shape mismatch");
    total += x.shape()[0];
  }
  shape[0] = total;
  Tensor<T> out(shape);
  std::size_t off = 0;
  for (const auto& x : xs) {
    std::copy(x.value().data().begin(), x.value().data().end(), out.ptr() + off);
    off += x.size();
  }
  return make_result<T>("concat_batch", std::move(out), xs, [](Node<T>& self) {
    std::size_t o = 0;
    for (auto& p : self.parents) {
      if (p->requires_grad) {
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[o + i];
      }
      o += p->value.size();
    }
  });
}

}  // namespace lfz::ad
