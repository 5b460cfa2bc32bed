#pragma once

#include <array>
#include <cmath>
#include <string>

#include "lfz/objectives/ssim.hpp"
#include "lfz/synthesis/batched.hpp"

namespace lfz {

/// Loss weights: alpha (photometric), alpha1 (defocus), alpha2 (consistency),
/// alpha3 (DoF) and beta, the SSIM share of psi.
struct LossWeights {
  double alpha = 2.0;
  double alpha1 = 100.0;
  double alpha2 = 0.02;
  double alpha3 = 10.0;
  double beta = 0.15;

  void validate() const {
    if (alpha < 0 || alpha1 < 0 || alpha2 < 0 || alpha3 < 0) throw UsageError("loss weights must be non-negative");
    if (beta < 0 || beta > 1) throw UsageError("beta must lie in [0,1]");
  }
};

/// psi(a,b) = beta (1 - SSIM)/2 + (1 - beta) mean|a - b|.
template <class T>
ad::Var<T> psi(const ad::Var<T>& a, const ad::Var<T>& b, double beta = 0.15, const SsimWindow& win = {}) {
  using namespace ad;
  if (a.shape() != b.shape()) throw UsageError("psi: shape mismatch");
  const Var<T> l1 = mean(abs(sub(a, b)));
  if (beta == 0) return l1;
  const Var<T> dssim = scale(add_scalar(scale(ssim(a, b, win), T(-1)), T(1)), T(0.5));
  if (beta == 1) return dssim;
  return weighted_sum<T>({dssim, l1}, {static_cast<T>(beta), static_cast<T>(1 - beta)});
}

/// Sum over views of psi(forward warp, GT view) + psi(GT view warped to the
/// center, GT center), averaged over the light fields in the batch.
/// pred and gt are [N*V,H,W,3]; disp is [N,H,W,V].
template <class T>
ad::Var<T> loss_photometric(const ad::Var<T>& pred, const ad::Var<T>& gt, const ad::Var<T>& disp,
                            const synth::ViewGeometry& g, double beta = 0.15) {
  using namespace ad;
  if (pred.shape() != gt.shape()) throw UsageError("loss_photometric: prediction and ground truth differ in shape");
  if (gt.shape()[0] % g.views() != 0) throw UsageError("loss_photometric: batch is not a multiple of the view count");
  const Var<T> back = synth::warp_to_center(gt, disp, g);
  const Var<T> centers = repeat_batch(synth::center_views(gt, g), g.views());
  const T v = static_cast<T>(g.views());
  return weighted_sum<T>({psi(pred, gt, beta), psi(back, centers, beta)}, {v, v});
}

/// psi(GT center, mean over views of the GT views warped to the center).
template <class T>
ad::Var<T> loss_defocus(const ad::Var<T>& gt, const ad::Var<T>& disp, const synth::ViewGeometry& g,
                        double beta = 0.15) {
  using namespace ad;
  const Var<T> back = synth::warp_to_center(gt, disp, g);
  return psi(synth::center_views(gt, g), batch_group_mean(back, g.views()), beta);
}

/// Sum over views of mean |d_u - d_center(x + (u-u0) d_u(x))|, averaged over
/// the batch.
template <class T>
ad::Var<T> loss_consistency(const ad::Var<T>& disp, const synth::ViewGeometry& g) {
  using namespace ad;
  const Var<T> diff = abs(sub(channels_to_batch(disp), synth::reproject_center(disp, g)));
  return scale(mean(diff), static_cast<T>(g.views()));
}

/// psi between the DoF images of the ground truth and the prediction.
template <class T>
ad::Var<T> loss_dof(const ad::Var<T>& pred, const ad::Var<T>& gt, const synth::ViewGeometry& g, double beta = 0.15) {
  using namespace ad;
  if (pred.shape() != gt.shape()) throw UsageError("loss_dof: prediction and ground truth differ in shape");
  return psi(batch_group_mean(gt, g.views()), batch_group_mean(pred, g.views()), beta);
}

template <class T>
struct LossTerms {
  ad::Var<T> photometric, defocus, consistency, dof, total;
};

/// alpha L_p + alpha1 L_defocus + alpha2 L_c + alpha3 L_dof.
template <class T>
ad::Var<T> loss_total(const ad::Var<T>& photometric, const ad::Var<T>& defocus, const ad::Var<T>& consistency,
                      const ad::Var<T>& dof_term, const LossWeights& w) {
  for (const auto* c : {&photometric, &defocus, &consistency, &dof_term})
    if (!std::isfinite(static_cast<double>(c->item()))) throw DataError("non-finite loss component");
  return ad::weighted_sum<T>({photometric, defocus, consistency, dof_term},
                             {static_cast<T>(w.alpha), static_cast<T>(w.alpha1), static_cast<T>(w.alpha2),
                              static_cast<T>(w.alpha3)});
}

inline double loss_total(const std::array<double, 4>& c, const LossWeights& w) {
  for (double v : c)
    if (!std::isfinite(v)) throw DataError("non-finite loss component");
  return w.alpha * c[0] + w.alpha1 * c[1] + w.alpha2 * c[2] + w.alpha3 * c[3];
}

/// All terms for a batch: enhanced centers [N,H,W,3], disparities [N,H,W,V]
/// and ground-truth views [N*V,H,W,3].
template <class T>
LossTerms<T> compute_losses(const ad::Var<T>& center, const ad::Var<T>& disp, const ad::Var<T>& gt,
                            const synth::ViewGeometry& g, const LossWeights& w) {
  const ad::Var<T> pred = synth::warp_views(center, disp, g);
  LossTerms<T> t;
  t.photometric = loss_photometric(pred, gt, disp, g, w.beta);
  t.defocus = loss_defocus(gt, disp, g, w.beta);
  t.consistency = loss_consistency(disp, g);
  t.dof = loss_dof(pred, gt, g, w.beta);
  t.total = loss_total(t.photometric, t.defocus, t.consistency, t.dof, w);
  return t;
}

}  // namespace lfz
