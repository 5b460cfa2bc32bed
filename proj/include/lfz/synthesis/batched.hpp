#pragma once

#include <vector>

#include "lfz/autodiff/ops.hpp"
#include "lfz/autodiff/sampling.hpp"
#include "lfz/synthesis/depth_stack.hpp"

namespace lfz::synth {

using ad::Var;

/// Angular geometry shared by the differentiable warps. A batch of N light
/// fields is laid out as N*V images, view-major within each light field.
struct ViewGeometry {
  AngularSize angular{};
  std::vector<AngularOffset> offsets;
  std::size_t center = 0;

  explicit ViewGeometry(AngularSize a, bool flip = false)
      : angular(a), offsets(angular_offsets(a, flip)), center(((a.u - 1) / 2) * a.v + (a.v - 1) / 2) {}

  std::size_t views() const { return offsets.size(); }

  template <class T>
  void per_sample(std::size_t batch, double sign, std::vector<T>& du, std::vector<T>& dv) const {
    du.resize(batch * views());
    dv.resize(batch * views());
    for (std::size_t i = 0; i < du.size(); ++i) {
      du[i] = static_cast<T>(sign * offsets[i % views()].du);
      dv[i] = static_cast<T>(sign * offsets[i % views()].dv);
    }
  }
};

/// Forward warps: center [N,H,W,3] and disparities [N,H,W,V] -> all views [N*V,H,W,3].
template <class T>
Var<T> warp_views(const Var<T>& center, const Var<T>& disp, const ViewGeometry& g) {
  if (disp.shape().at(3) != g.views()) throw UsageError("warp_views: disparity channels do not match views");
  std::vector<T> du, dv;
  g.per_sample(center.shape()[0], 1.0, du, dv);
  return ad::grid_sample(center, ad::displaced_grid(ad::channels_to_batch(disp), du, dv));
}

/// Backward warps of every view to the center, each driven by its own map:
/// out_u(x) = L(x - (u-u0) d_u(x), u). views is [N*V,H,W,3].
template <class T>
Var<T> warp_to_center(const Var<T>& views, const Var<T>& disp, const ViewGeometry& g) {
  if (disp.shape().at(3) != g.views()) throw UsageError("warp_to_center: disparity channels do not match views");
  if (views.shape()[0] != disp.shape()[0] * g.views()) throw UsageError("warp_to_center: batch mismatch");
  std::vector<T> du, dv;
  g.per_sample(disp.shape()[0], -1.0, du, dv);
  return ad::grid_sample(views, ad::displaced_grid(ad::channels_to_batch(disp), du, dv));
}

/// Center disparity map carried to each view: d_c(x + (u-u0) d_u(x)) -> [N*V,H,W,1].
template <class T>
Var<T> reproject_center(const Var<T>& disp, const ViewGeometry& g) {
  std::vector<T> du, dv;
  g.per_sample(disp.shape()[0], 1.0, du, dv);
  const Var<T> center_map = ad::slice_channels(disp, g.center, 1);
  return ad::grid_sample(center_map, ad::displaced_grid(ad::channels_to_batch(disp), du, dv));
}

/// Center view of each light field in an [N*V,...] batch -> [N,...].
template <class T>
Var<T> center_views(const Var<T>& views, const ViewGeometry& g) {
  const std::size_t n = views.shape()[0] / g.views();
  std::vector<Var<T>> parts;
  for (std::size_t b = 0; b < n; ++b) parts.push_back(ad::slice_batch(views, b * g.views() + g.center, 1));
  if (parts.size() == 1) return parts[0];
  return ad::concat_batch(parts);
}

}  // namespace lfz::synth
