#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lfz/autodiff/graph.hpp"

namespace lfz::ad {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0;
  double tolerance = 0;
  std::size_t coordinates = 0;
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Denominator floor so near-zero gradients are compared absolutely.
  double floor = 1e-3;
  // 0 checks every coordinate; otherwise a seeded random subset of this size.
  std::size_t max_coordinates = 0;
  unsigned seed = 0;
};

/// Compares reverse-mode gradients of a scalar function with central finite
/// differences, coordinate by coordinate, for every input that requires grad.
/// Error per coordinate is |a-n| / max(|a|, |n|, floor).
inline GradCheckResult check_gradients(const std::string& name, std::vector<Var<double>> inputs,
                                       const std::function<Var<double>()>& f, GradCheckOptions opt = {}) {
  GradCheckResult res{name, 0, opt.tolerance, 0, true};
  for (Var<double>& v : inputs) v.zero_grad();
  Var<double> loss = f();
  loss.backward();

  struct Coord {
    std::size_t input, index;
  };
  std::vector<Coord> coords;
  for (std::size_t k = 0; k < inputs.size(); ++k)
    if (inputs[k].requires_grad())
      for (std::size_t i = 0; i < inputs[k].size(); ++i) coords.push_back({k, i});
  if (opt.max_coordinates && coords.size() > opt.max_coordinates) {
    std::mt19937 rng(opt.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opt.max_coordinates);
  }
  std::vector<Tensor<double>> analytic;
  for (const Var<double>& v : inputs) analytic.push_back(v.grad());

  for (const Coord& c : coords) {
    double& x = inputs[c.input].mutable_value()[c.index];
    const double saved = x;
    x = saved + opt.step;
    const double fp = f().item();
    x = saved - opt.step;
    const double fm = f().item();
    x = saved;
    const double numeric = (fp - fm) / (2 * opt.step);
    const double a = analytic[c.input][c.index];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opt.floor});
    res.max_rel_error = std::max(res.max_rel_error, err);
  }
  res.coordinates = coords.size();
  res.passed = res.max_rel_error <= opt.tolerance && !coords.empty();
  return res;
}

}  // namespace lfz::ad
