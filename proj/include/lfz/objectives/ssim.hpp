#pragma once

#include <algorithm>

#include "lfz/autodiff/filter.hpp"
#include "lfz/autodiff/ops.hpp"

namespace lfz {

/// Gaussian-window SSIM parameters.
struct SsimWindow {
  std::size_t size = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;

  /// Window actually used for an h x w image: shrinks to the largest odd size
  /// that fits when the image is smaller than the nominal window.
  std::size_t effective_size(std::size_t h, std::size_t w) const {
    std::size_t s = std::min({size, h, w});
    if (s % 2 == 0) --s;
    return std::max<std::size_t>(s, 1);
  }
};

/// Mean local SSIM over the valid region of every sample and channel of two
/// [N,H,W,C] tensors. Differentiable in both arguments.
template <class T>
ad::Var<T> ssim(const ad::Var<T>& a, const ad::Var<T>& b, const SsimWindow& win = {}) {
  using namespace ad;
  if (a.shape() != b.shape())
    throw UsageError("ssim: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const auto s = nhwc(a.value());
  const auto taps = gaussian_taps<T>(win.effective_size(s.h, s.w), win.sigma);
  const T c1 = static_cast<T>((win.k1 * win.range) * (win.k1 * win.range));
  const T c2 = static_cast<T>((win.k2 * win.range) * (win.k2 * win.range));
  auto f = [&](const Var<T>& x) { return separable_filter_valid(x, taps); };
  const Var<T> mu_a = f(a), mu_b = f(b);
  const Var<T> mu_aa = square(mu_a), mu_bb = square(mu_b), mu_ab = mul(mu_a, mu_b);
  const Var<T> var_a = sub(f(square(a)), mu_aa);
  const Var<T> var_b = sub(f(square(b)), mu_bb);
  const Var<T> cov = sub(f(mul(a, b)), mu_ab);
  const Var<T> num = mul(add_scalar(scale(mu_ab, T(2)), c1), add_scalar(scale(cov, T(2)), c2));
  const Var<T> den = mul(add_scalar(add(mu_aa, mu_bb), c1), add_scalar(add(var_a, var_b), c2));
  return mean(div(num, den));
}

}  // namespace lfz
