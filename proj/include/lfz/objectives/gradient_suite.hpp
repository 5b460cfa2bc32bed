#pragma once

#include <string>
#include <vector>

#include "lfz/autodiff/gradient_suite.hpp"
#include "lfz/nets/depth_net.hpp"
#include "lfz/nets/hance.hpp"
#include "lfz/objectives/losses.hpp"

namespace lfz {

namespace detail {

// Fills every weight of the zero-initialized output conv with small random
// values so gradients reach the rest of the network.
inline void randomize_hance_output(nets::JpegHance<double>& net, unsigned seed) {
  ad::RandomTensors r(seed);
  for (auto& e : net.entries())
    if (e.name.rfind("hance/out/", 0) == 0) e.var.mutable_value() = r.uniform(e.var.shape(), -0.05, 0.05);
}

}  // namespace detail

/// Finite-difference checks for SSIM, psi and every loss term (three shapes
/// each, tolerance `tol`), plus full-network composites at `composite_tol`.
inline std::vector<ad::GradCheckResult> loss_gradient_suite(double tol = 1e-4, double composite_tol = 1e-3) {
  using namespace ad;
  std::vector<GradCheckResult> out;
  GradCheckOptions opt;
  opt.tolerance = tol;
  opt.max_coordinates = 300;
  unsigned seed = 500;

  const std::vector<Shape> ssim_shapes{{1, 11, 11, 3}, {2, 12, 14, 1}, {1, 6, 7, 2}};
  for (const Shape& s : ssim_shapes) {
    RandomTensors r(++seed);
    auto a = parameter(r.uniform(s, 0, 1));
    auto b = parameter(r.uniform(s, 0, 1));
    out.push_back(check_gradients("ssim " + shape_str(s), {a, b}, [=] { return ssim(a, b); }, opt));
    out.push_back(check_gradients("psi " + shape_str(s), {a, b}, [=] { return psi(a, b, 0.15); }, opt));
  }

  struct Case {
    AngularSize angular;
    std::size_t n, h, w;
  };
  const std::vector<Case> cases{{{3, 3}, 1, 12, 12}, {{1, 3}, 2, 14, 13}, {{3, 3}, 1, 16, 16}};
  for (const Case& c : cases) {
    RandomTensors r(++seed);
    const synth::ViewGeometry g(c.angular);
    const std::size_t v = g.views();
    const std::string tag = " " + std::to_string(c.angular.u) + "x" + std::to_string(c.angular.v) + " " +
                            shape_str({c.n, c.h, c.w});
    // Value ranges keep every L1 argument away from zero: GT centers in
    // [0.6,1], other GT views in [0,0.3], predictions above the GT, center
    // disparities positive and the other view disparities negative.
    Tensor<double> gt_t = r.uniform({c.n * v, c.h, c.w, 3}, 0, 0.3);
    const std::size_t plane = c.h * c.w * 3;
    for (std::size_t n = 0; n < c.n; ++n) {
      const auto bright = r.uniform({plane}, 0.6, 1.0);
      std::copy(bright.data().begin(), bright.data().end(), gt_t.ptr() + (n * v + g.center) * plane);
    }
    Tensor<double> pred_t = r.uniform(gt_t.shape(), 0.05, 0.3);
    for (std::size_t i = 0; i < pred_t.size(); ++i) pred_t[i] += gt_t[i];
    Tensor<double> disp_t = r.uniform({c.n, c.h, c.w, v}, 0.05, 0.45);
    for (std::size_t i = 0; i < disp_t.size(); ++i)
      if (i % v != g.center) disp_t[i] = -disp_t[i];
    auto center = parameter(r.uniform({c.n, c.h, c.w, 3}, 0.45, 0.55));
    auto gt = parameter(gt_t);
    auto pred = parameter(pred_t);
    auto disp = parameter(disp_t);
    out.push_back(check_gradients("loss_photometric" + tag, {pred, gt, disp},
                                  [=] { return loss_photometric(pred, gt, disp, g); }, opt));
    out.push_back(check_gradients("loss_defocus" + tag, {gt, disp}, [=] { return loss_defocus(gt, disp, g); }, opt));
    out.push_back(check_gradients("loss_consistency" + tag, {disp}, [=] { return loss_consistency(disp, g); }, opt));
    out.push_back(check_gradients("loss_dof" + tag, {pred, gt}, [=] { return loss_dof(pred, gt, g); }, opt));
    out.push_back(check_gradients("loss_total" + tag, {center, disp},
                                  [=] { return compute_losses(center, disp, gt, g, LossWeights{}).total; }, opt));
  }

  GradCheckOptions copt;
  copt.tolerance = composite_tol;
  copt.max_coordinates = 60;
  copt.seed = 7;
  {
    RandomTensors r(++seed);
    auto hance = std::make_shared<nets::JpegHance<double>>(nets::HanceConfig::desk(), 11);
    lfz::detail::randomize_hance_output(*hance, seed);
    hance->set_training(true);
    auto x = constant(r.uniform({1, 16, 16, 3}, 0.1, 0.9));
    auto target = constant(r.uniform({1, 16, 16, 3}, 0.1, 0.9));
    out.push_back(check_gradients("JPEG-Hance + psi [1,16,16,3]", hance->parameters(),
                                  [=] { return psi(hance->forward(x), target); }, copt));
  }
  {
    RandomTensors r(++seed);
    const synth::ViewGeometry g({3, 3});
    auto hance = std::make_shared<nets::JpegHance<double>>(nets::HanceConfig::desk(), 12);
    lfz::detail::randomize_hance_output(*hance, seed);
    hance->set_training(true);
    auto depth = std::make_shared<nets::DepthNet<double>>(nets::DepthConfig::desk(g.views()), 13);
    auto x = constant(r.uniform({1, 16, 16, 3}, 0.1, 0.9));
    auto gt = constant(r.uniform({g.views(), 16, 16, 3}, 0.1, 0.9));
    std::vector<Var<double>> params = hance->parameters();
    for (const auto& p : depth->parameters()) params.push_back(p);
    out.push_back(check_gradients("total loss, joint networks [1,16,16,3]", params,
                                  [=] {
                                    const Var<double> c = hance->forward(x);
                                    return compute_losses(c, depth->forward(c), gt, g, LossWeights{}).total;
                                  },
                                  copt));
  }
  return out;
}

}  // namespace lfz
