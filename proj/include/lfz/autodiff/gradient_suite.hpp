#pragma once

#include <random>
#include <string>
#include <vector>

#include "lfz/autodiff/autodiff.hpp"
#include "lfz/autodiff/gradcheck.hpp"

namespace lfz::ad {

/// Seeded random tensors for gradient checks.
class RandomTensors {
 public:
  explicit RandomTensors(unsigned seed) : rng_(seed) {}

  Tensor<double> uniform(const Shape& s, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Tensor<double> t(s);
    for (double& v : t.data()) v = d(rng_);
    return t;
  }

  // Magnitudes in [lo,hi] with random sign; keeps values away from kinks at 0.
  Tensor<double> signed_away_from_zero(const Shape& s, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::bernoulli_distribution sign(0.5);
    Tensor<double> t(s);
    for (double& v : t.data()) v = sign(rng_) ? d(rng_) : -d(rng_);
    return t;
  }

  Var<double> param(const Shape& s, double lo = -1, double hi = 1) { return parameter(uniform(s, lo, hi)); }

 private:
  std::mt19937 rng_;
};

/// Reduces a tensor to a scalar with fixed random weights so each output
/// element contributes a distinct gradient.
inline Var<double> probe(const Var<double>& out, unsigned seed) {
  RandomTensors r(seed ^ 0x9e3779b9u);
  return sum(mul(out, constant(r.uniform(out.shape(), -1, 1))));
}

/// Finite-difference checks for every differentiable op, three shapes each.
inline std::vector<GradCheckResult> op_gradient_suite(double tol = 1e-4) {
  std::vector<GradCheckResult> out;
  GradCheckOptions opt;
  opt.tolerance = tol;
  opt.max_coordinates = 400;
  const std::vector<Shape> shapes{{1, 3, 4, 2}, {2, 4, 4, 3}, {3, 2, 5, 4}};
  unsigned seed = 100;
  auto run = [&](const std::string& name, const Shape& s, std::vector<Var<double>> inputs,
                 std::function<Var<double>()> f) {
    const unsigned probe_seed = seed;
    out.push_back(check_gradients(name + " " + shape_str(s), std::move(inputs),
                                  [f, probe_seed] { return probe(f(), probe_seed); }, opt));
  };

  for (const Shape& s : shapes) {
    RandomTensors r(++seed);
    auto a = r.param(s), b = r.param(s);
    auto pos = parameter(r.uniform(s, 0.5, 1.5));
    auto kinked = parameter(r.signed_away_from_zero(s, 0.05, 1.0));
    run("add", s, {a, b}, [=] { return add(a, b); });
    run("sub", s, {a, b}, [=] { return sub(a, b); });
    run("mul", s, {a, b}, [=] { return mul(a, b); });
    run("div", s, {a, pos}, [=] { return div(a, pos); });
    run("add_scalar", s, {a}, [=] { return add_scalar(a, 0.3); });
    run("scale", s, {a}, [=] { return scale(a, -1.7); });
    run("square", s, {a}, [=] { return square(a); });
    run("abs", s, {kinked}, [=] { return abs(kinked); });
    run("elu", s, {kinked}, [=] { return elu(kinked); });
    run("tanh", s, {a}, [=] { return tanh(a); });
    run("clamp", s, {kinked}, [=] { return clamp(kinked, -0.5, 0.5); });
    auto bias = r.param({s[3]});
    run("add_channel", s, {a, bias}, [=] { return add_channel(a, bias); });
    run("mul_channel", s, {a, bias}, [=] { return mul_channel(a, bias); });
    run("sum", s, {a}, [=] { return scale(sum(a), 0.5); });
    run("mean", s, {a}, [=] { return scale(mean(a), 2.0); });
    run("weighted_sum", s, {a, b}, [=] { return weighted_sum<double>({sum(square(a)), mean(b)}, {2.0, 0.02}); });
    run("concat_channels", s, {a, b}, [=] { return concat_channels<double>({a, b}); });
    run("slice_channels", s, {a}, [=] { return slice_channels(a, 1, s[3] - 1); });
    run("pad_spatial", s, {a}, [=] { return pad_spatial(a, 2, 1); });
    run("crop_spatial", s, {a}, [=] { return crop_spatial(a, 1, 1, s[1] - 1, s[2] - 2); });
    run("repeat_batch", s, {a}, [=] { return repeat_batch(a, 3); });
    run("batch_group_mean", s, {a}, [=] { return batch_group_mean(a, s[0]); });
    run("channels_to_batch", s, {a}, [=] { return channels_to_batch(a); });
    run("slice_batch", s, {a}, [=] { return slice_batch(a, 0, 1); });
    run("concat_batch", s, {a, b}, [=] { return concat_batch<double>({b, a, b}); });
  }

  const std::vector<Shape> conv_shapes{{2, 4, 4, 3}, {1, 5, 7, 2}, {3, 6, 5, 4}};
  for (const Shape& s : conv_shapes) {
    RandomTensors r(++seed);
    auto x = r.param(s);
    auto k3 = r.param({3, 3, s[3], 3});
    auto k1 = r.param({1, 1, s[3], 4});
    auto k2 = r.param({2, 3, s[3], 2});
    run("conv2d same s1", s, {x, k3}, [=] { return conv2d(x, k3); });
    run("conv2d same s2", s, {x, k3}, [=] { return conv2d(x, k3, {2, 2, Padding::same}); });
    run("conv2d valid s1", s, {x, k3}, [=] { return conv2d(x, k3, {1, 1, Padding::valid}); });
    run("conv2d pointwise", s, {x, k1}, [=] { return conv2d(x, k1); });
    run("conv2d 2x3 s(2,1)", s, {x, k2}, [=] { return conv2d(x, k2, {2, 1, Padding::same}); });
    auto kt = r.param({4, 4, 3, s[3]});
    run("conv2d_transpose 4x4 s2", s, {x, kt}, [=] { return conv2d_transpose(x, kt, 2); });
    auto kt3 = r.param({3, 3, 2, s[3]});
    run("conv2d_transpose 3x3 s2", s, {x, kt3}, [=] { return conv2d_transpose(x, kt3, 2); });

    auto gamma = parameter(r.uniform({s[3]}, 0.5, 1.5));
    auto beta = r.param({s[3]});
    auto rm = r.uniform({s[3]}, -0.2, 0.2);
    auto rv = r.uniform({s[3]}, 0.5, 1.5);
    run("batch_norm train", s, {x, gamma, beta}, [=]() mutable { return batch_norm(x, gamma, beta, rm, rv, true); });
    run("batch_norm infer", s, {x, gamma, beta}, [=]() mutable { return batch_norm(x, gamma, beta, rm, rv, false); });
    run("instance_norm", s, {x, gamma, beta}, [=] { return instance_norm(x, gamma, beta); });
  }

  const std::vector<Shape> sample_shapes{{1, 5, 6, 3}, {2, 4, 4, 1}, {2, 6, 3, 2}};
  for (const Shape& s : sample_shapes) {
    RandomTensors r(++seed);
    auto img = r.param(s);
    // Coordinates with fractional parts in [0.2,0.8] keep clear of the lattice;
    // a few fall outside the image to exercise border clamping.
    Tensor<double> c(Shape{s[0] * 2, 3, 4, 2});
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> iy(-1, static_cast<int>(s[1]) - 1), ix(-1, static_cast<int>(s[2]) - 1);
    std::uniform_real_distribution<double> fr(0.2, 0.8);
    for (std::size_t q = 0; q < c.size() / 2; ++q) {
      c[2 * q] = iy(rng) + fr(rng);
      c[2 * q + 1] = ix(rng) + fr(rng);
    }
    auto coords = parameter(c);
    run("grid_sample", s, {img, coords}, [=] { return grid_sample(img, coords); });
    auto d = parameter(r.uniform({s[0], s[1], s[2], 1}, -0.4, 0.4));
    const std::vector<double> du(s[0], 1.0), dv(s[0], -2.0);
    run("displaced_grid", s, {d}, [=] { return displaced_grid(d, du, dv); });
    run("warp", s, {img, d}, [=] { return grid_sample(img, displaced_grid(d, du, dv)); });
  }

  const std::vector<Shape> filter_shapes{{1, 7, 7, 1}, {2, 8, 6, 3}, {1, 11, 12, 2}};
  for (const Shape& s : filter_shapes) {
    RandomTensors r(++seed);
    auto x = r.param(s);
    const auto taps = gaussian_taps<double>(5, 1.5);
    run("separable_filter_valid", s, {x}, [=] { return separable_filter_valid(x, taps); });
  }
  return out;
}

}  // namespace lfz::ad
