#pragma once

#include <cmath>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

inline constexpr double kNormEpsilon = 1e-5;

namespace detail {

// Normalizes groups of an NHWC tensor and applies gamma/beta per channel.
// per_sample=false: one group per channel over (N,H,W) (batch norm).
// per_sample=true:  one group per (n,c) over (H,W)      (instance norm).
// When `fixed_mean`/`fixed_var` are given they replace the batch statistics.
template <class T>
Var<T> normalize_groups(const char* op, const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, bool per_sample,
                        T eps, const std::vector<T>* fixed_mean, const std::vector<T>* fixed_var,
                        std::vector<T>* batch_mean, std::vector<T>* batch_var) {
  const Nhwc s = nhwc(x.value());
  if (gamma.size() != s.c || beta.size() != s.c) throw UsageError(std::string(op) + ": scale/shift length mismatch");
  const std::size_t hw = s.h * s.w;
  const std::size_t groups = per_sample ? s.n * s.c : s.c;
  const std::size_t count = per_sample ? hw : s.n * hw;
  const bool use_batch = fixed_mean == nullptr;
  if (use_batch && !per_sample && count < 2)
    throw UsageError(std::string(op) + ": need at least 2 elements per normalization group");
  auto group = [&](std::size_t n, std::size_t c) { return per_sample ? n * s.c + c : c; };

  std::vector<T> mu(groups, T(0)), var(groups, T(0));
  if (use_batch) {
    std::vector<double> acc(groups, 0.0);
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < s.c; ++c) acc[group(n, c)] += x.value()[(n * hw + p) * s.c + c];
    for (std::size_t gi = 0; gi < groups; ++gi) mu[gi] = static_cast<T>(acc[gi] / static_cast<double>(count));
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < s.c; ++c) {
          const double d = x.value()[(n * hw + p) * s.c + c] - mu[group(n, c)];
          acc[group(n, c)] += d * d;
        }
    for (std::size_t gi = 0; gi < groups; ++gi) var[gi] = static_cast<T>(acc[gi] / static_cast<double>(count));
    if (batch_mean) *batch_mean = mu;
    if (batch_var) *batch_var = var;
  } else {
    mu = *fixed_mean;
    var = *fixed_var;
  }
  std::vector<T> inv_std(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) inv_std[gi] = T(1) / std::sqrt(var[gi] + eps);

  Tensor<T> xhat(x.shape());
  Tensor<T> out(x.shape());
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t c = 0; c < s.c; ++c) {
        const std::size_t i = (n * hw + p) * s.c + c;
        const std::size_t gi = group(n, c);
        xhat[i] = (x.value()[i] - mu[gi]) * inv_std[gi];
        out[i] = gamma.value()[c] * xhat[i] + beta.value()[c];
      }

  return make_result<T>(op, std::move(out), {x, gamma, beta},
                        [s, hw, groups, count, per_sample, use_batch, inv_std, xhat = std::move(xhat)](Node<T>& self) {
    auto group = [&](std::size_t n, std::size_t c) { return per_sample ? n * s.c + c : c; };
    Node<T>& px = *self.parents[0];
    Node<T>& pg = *self.parents[1];
    Node<T>& pb = *self.parents[2];
    const Tensor<T>& dy = self.grad;
    if (pg.requires_grad || pb.requires_grad) {
      Tensor<T>& gg = pg.ensure_grad();
      Tensor<T>& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < dy.size(); ++i) {
        const std::size_t c = i % s.c;
        if (pg.requires_grad) gg[c] += dy[i] * xhat[i];
        if (pb.requires_grad) gb[c] += dy[i];
      }
    }
    if (!px.requires_grad) return;
    Tensor<T>& gx = px.ensure_grad();
    const Tensor<T>& gamma_v = pg.value;
    if (!use_batch) {
      for (std::size_t i = 0; i < dy.size(); ++i) {
        const std::size_t n = i / (hw * s.c), c = i % s.c;
        gx[i] += dy[i] * gamma_v[c] * inv_std[group(n, c)];
      }
      return;
    }
    // dx = inv_std/M * (M*dxh - sum(dxh) - xhat*sum(dxh*xhat))
    std::vector<double> sum_d(groups, 0.0), sum_dx(groups, 0.0);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const std::size_t n = i / (hw * s.c), c = i % s.c;
      const double dxh = static_cast<double>(dy[i]) * gamma_v[c];
      sum_d[group(n, c)] += dxh;
      sum_dx[group(n, c)] += dxh * xhat[i];
    }
    const double m = static_cast<double>(count);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      const std::size_t n = i / (hw * s.c), c = i % s.c;
      const std::size_t gi = group(n, c);
      const double dxh = static_cast<double>(dy[i]) * gamma_v[c];
      gx[i] += static_cast<T>(inv_std[gi] / m * (m * dxh - sum_d[gi] - xhat[i] * sum_dx[gi]));
    }
  });
}

}  // namespace detail

/// Batch normalization over (N,H,W) per channel. In training mode the batch
/// statistics are used and the running averages updated (unbiased variance);
/// in inference mode the running averages are used.
template <class T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, bool training, T momentum = T(0.1), T eps = T(kNormEpsilon)) {
  const auto s = nhwc(x.value());
  if (running_mean.size() != s.c || running_var.size() != s.c)
    throw UsageError("batch_norm: running statistics length mismatch");
  if (!training)
    return detail::normalize_groups<T>("batch_norm", x, gamma, beta, false, eps, &running_mean.storage(),
                                       &running_var.storage(), nullptr, nullptr);
  std::vector<T> mu, var;
  Var<T> out = detail::normalize_groups<T>("batch_norm", x, gamma, beta, false, eps, nullptr, nullptr, &mu, &var);
  const T m = static_cast<T>(s.n * s.h * s.w);
  for (std::size_t c = 0; c < s.c; ++c) {
    running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * mu[c];
    running_var[c] = (T(1) - momentum) * running_var[c] + momentum * var[c] * m / (m - T(1));
  }
  return out;
}

/// Instance normalization over (H,W) per sample and channel.
template <class T>
Var<T> instance_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(kNormEpsilon)) {
  return detail::normalize_groups<T>("instance_norm", x, gamma, beta, true, eps, nullptr, nullptr, nullptr, nullptr);
}

}  // namespace lfz::ad
