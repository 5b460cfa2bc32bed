#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are stored per parameter in the order
/// the parameters were given.
template <class T>
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::vector<Var<T>> params, AdamOptions opt = {}) : params_(std::move(params)), opt_(opt) {
    for (const Var<T>& p : params_) {
      m_.emplace_back(p.shape());
      v_.emplace_back(p.shape());
    }
  }

  void zero_grad() {
    for (Var<T>& p : params_) p.zero_grad();
  }

  void step(double lr) {
    ++step_;
    const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const Tensor<T>& g = params_[k].grad();
      Tensor<T>& w = params_[k].mutable_value();
      Tensor<T>& m = m_[k];
      Tensor<T>& v = v_[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i];
        m[i] = static_cast<T>(opt_.beta1 * m[i] + (1 - opt_.beta1) * gi);
        v[i] = static_cast<T>(opt_.beta2 * v[i] + (1 - opt_.beta2) * gi * gi);
        const double mh = m[i] / c1, vh = v[i] / c2;
        w[i] = static_cast<T>(w[i] - lr * mh / (std::sqrt(vh) + opt_.eps));
      }
    }
  }

  std::uint64_t steps() const { return step_; }
  void set_steps(std::uint64_t s) { step_ = s; }
  const std::vector<Var<T>>& params() const { return params_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }

 private:
  std::vector<Var<T>> params_;
  AdamOptions opt_;
  std::vector<Tensor<T>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace lfz::ad
