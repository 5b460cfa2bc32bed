#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lfz/autodiff/autodiff.hpp"

namespace lfz::nets {

using ad::Shape;
using ad::Tensor;
using ad::Var;

template <class T>
struct NamedVar {
  std::string name;
  Var<T> var;
  bool trainable = true;
};

/// Creates named parameters and buffers in a fixed order from one seeded
/// generator, so a (config, seed) pair always yields the same weights.
template <class T>
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed, std::string prefix) : rng_(seed), prefix_(std::move(prefix)) {}

  // Uniform in +-gain*sqrt(3/fan_in), i.e. variance gain^2/fan_in.
  Var<T> fan_in_uniform(const std::string& name, Shape shape, double fan_in, double gain = 1.0) {
    const double bound = gain * std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> d(-bound, bound);
    Tensor<T> t(std::move(shape));
    for (T& v : t.data()) v = static_cast<T>(d(rng_));
    return add(name, std::move(t), true);
  }

  Var<T> filled(const std::string& name, Shape shape, T value, bool trainable = true) {
    return add(name, Tensor<T>(std::move(shape), value), trainable);
  }

  std::vector<NamedVar<T>> take() { return std::move(entries_); }

 private:
  Var<T> add(const std::string& name, Tensor<T> t, bool trainable) {
    Var<T> v(std::move(t), trainable);
    entries_.push_back({prefix_ + name, v, trainable});
    return v;
  }

  std::mt19937_64 rng_;
  std::string prefix_;
  std::vector<NamedVar<T>> entries_;
};

enum class Init { fan_in, zero };

template <class T>
struct Conv {
  Var<T> kernel, bias;
  ad::ConvOptions opt;

  Conv() = default;
  Conv(ParamStore<T>& ps, const std::string& name, std::size_t k, std::size_t in, std::size_t out,
       std::size_t stride = 1, Init init = Init::fan_in, double gain = 1.0)
      : opt{stride, stride, ad::Padding::same} {
    kernel = init == Init::zero ? ps.filled(name + "/kernel", {k, k, in, out}, T(0))
                                : ps.fan_in_uniform(name + "/kernel", {k, k, in, out}, double(k * k * in), gain);
    bias = ps.filled(name + "/bias", {out}, T(0));
  }

  Var<T> operator()(const Var<T>& x) const { return ad::add_channel(ad::conv2d(x, kernel, opt), bias); }
};

/// Stride-2 transposed convolution producing `out` channels from `in`.
template <class T>
struct ConvTranspose {
  Var<T> kernel, bias;
  std::size_t stride = 2;

  ConvTranspose() = default;
  ConvTranspose(ParamStore<T>& ps, const std::string& name, std::size_t k, std::size_t in, std::size_t out,
                std::size_t s = 2)
      : stride(s) {
    kernel = ps.fan_in_uniform(name + "/kernel", {k, k, out, in}, double(k * k * in) / double(s * s));
    bias = ps.filled(name + "/bias", {out}, T(0));
  }

  Var<T> operator()(const Var<T>& x) const {
    return ad::add_channel(ad::conv2d_transpose(x, kernel, stride), bias);
  }
};

template <class T>
struct BatchNorm {
  Var<T> gamma, beta, running_mean, running_var;

  BatchNorm() = default;
  BatchNorm(ParamStore<T>& ps, const std::string& name, std::size_t c)
      : gamma(ps.filled(name + "/gamma", {c}, T(1))),
        beta(ps.filled(name + "/beta", {c}, T(0))),
        running_mean(ps.filled(name + "/running_mean", {c}, T(0), false)),
        running_var(ps.filled(name + "/running_var", {c}, T(1), false)) {}

  Var<T> operator()(const Var<T>& x, bool training) {
    return ad::batch_norm(x, gamma, beta, running_mean.mutable_value(), running_var.mutable_value(), training);
  }
};

template <class T>
struct InstanceNorm {
  Var<T> gamma, beta;

  InstanceNorm() = default;
  InstanceNorm(ParamStore<T>& ps, const std::string& name, std::size_t c)
      : gamma(ps.filled(name + "/gamma", {c}, T(1))), beta(ps.filled(name + "/beta", {c}, T(0))) {}

  Var<T> operator()(const Var<T>& x) const { return ad::instance_norm(x, gamma, beta); }
};

template <class T>
std::vector<Var<T>> trainable(const std::vector<NamedVar<T>>& entries) {
  std::vector<Var<T>> out;
  for (const auto& e : entries)
    if (e.trainable) out.push_back(e.var);
  return out;
}

template <class T>
std::size_t count_trainable(const std::vector<NamedVar<T>>& entries) {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.trainable) n += e.var.size();
  return n;
}

/// Maps [0,1] image data to the [-1,1] network domain.
template <class T>
Var<T> to_signed(const Var<T>& x) {
  return ad::add_scalar(ad::scale(x, T(2)), T(-1));
}

}  // namespace lfz::nets
