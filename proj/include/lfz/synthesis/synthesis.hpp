#pragma once

#include <span>
#include <vector>

#include "lfz/autodiff/ops.hpp"
#include "lfz/autodiff/sampling.hpp"
#include "lfz/core/light_field.hpp"
#include "lfz/synthesis/convert.hpp"
#include "lfz/synthesis/depth_stack.hpp"

namespace lfz {

struct SynthesisOptions {
  bool flip_offsets = false;  // negate angular offsets (axis orientation)
};

namespace detail {

// Samples `img` at x + offset * d(x) for every pixel (bilinear, border clamp).
inline Image sample_displaced(const Image& img, std::span<const float> d, AngularOffset off) {
  if (d.size() != img.height() * img.width()) throw DataError("disparity map does not match image size");
  ad::Tensor<float> disp(ad::Shape{1, img.height(), img.width(), 1}, std::vector<float>(d.begin(), d.end()));
  const auto grid = ad::displaced_grid(ad::constant(disp), {static_cast<float>(off.du)}, {static_cast<float>(off.dv)});
  const auto out = ad::grid_sample(ad::constant(image_to_tensor<float>(img)), grid);
  Image result = tensor_to_image(out.value());
  result.clamp_unit();
  return result;
}

// Mean of equally sized images, accumulated in double in the given order.
inline Image mean_image(const std::vector<Image>& imgs) {
  std::vector<double> acc(imgs.front().size(), 0.0);
  for (const Image& img : imgs)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += img.data()[i];
  Image out(imgs.front().height(), imgs.front().width());
  const double n = static_cast<double>(imgs.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out.data()[i] = static_cast<float>(acc[i] / n);
  return out;
}

}  // namespace detail

/// Synthesizes view u from the center: out(x) = center(x + (u-u0) d_u(x)),
/// with the vertical offset applied to rows and the horizontal to columns.
inline Image warp_center_to_view(const Image& center, std::span<const float> d_u, AngularOffset offset) {
  return detail::sample_displaced(center, d_u, offset);
}

/// Every view warped from the center by its own disparity map; the center view
/// is copied unchanged.
inline LightField reconstruct_lf(const Image& center, const DepthStack& depth, AngularSize angular,
                                 SynthesisOptions opt = {}) {
  if (depth.view_count() != angular.u * angular.v)
    throw DataError("depth stack has " + std::to_string(depth.view_count()) + " views, light field needs " +
                    std::to_string(angular.u * angular.v));
  if (depth.height() != center.height() || depth.width() != center.width())
    throw DataError("depth stack does not match center view size");
  const auto offsets = angular_offsets(angular, opt.flip_offsets);
  const std::size_t c = depth.center_linear();
  std::vector<Image> views;
  for (std::size_t k = 0; k < offsets.size(); ++k)
    views.push_back(k == c ? center : warp_center_to_view(center, depth.map(k), offsets[k]));
  return LightField(angular, std::move(views));
}

inline LightField reconstruct_lf(const Image& center, const DepthStack& depth, SynthesisOptions opt = {}) {
  return reconstruct_lf(center, depth, depth.angular(), opt);
}

/// Depth-of-field image: per-pixel mean over all views.
inline Image dof(const LightField& lf) { return detail::mean_image(lf.views()); }

/// Shift-and-add refocusing: mean over views of L(x - alpha (u-u0), u). With
/// views synthesized as center(x + (u-u0) delta), alpha = delta brings the
/// plane at disparity delta into focus; alpha = 0 is the DoF image.
inline Image refocus(const LightField& lf, double alpha, SynthesisOptions opt = {}) {
  if (!std::isfinite(alpha)) throw UsageError("refocus alpha must be finite");
  const auto offsets = angular_offsets(lf.angular(), opt.flip_offsets);
  const std::vector<float> ones(lf.height() * lf.width(), 1.0f);
  std::vector<Image> shifted;
  for (std::size_t k = 0; k < offsets.size(); ++k)
    shifted.push_back(detail::sample_displaced(lf.view_linear(k), ones,
                                               {-alpha * offsets[k].du, -alpha * offsets[k].dv}));
  return detail::mean_image(shifted);
}

/// Center-view disparity carried to view `target`: d_c(x + (u-u0) d_u(x)).
inline std::vector<float> reproject_depth(const DepthStack& depth, ViewIndex target, SynthesisOptions opt = {}) {
  const auto offsets = angular_offsets(depth.angular(), opt.flip_offsets);
  const std::size_t k = depth.linear(target);
  if (k >= depth.view_count()) throw DataError("reproject_depth: target view outside the grid");
  const std::size_t hw = depth.height() * depth.width();
  const auto center = depth.map(depth.center_linear());
  ad::Tensor<float> cmap(ad::Shape{1, depth.height(), depth.width(), 1}, std::vector<float>(center.begin(), center.end()));
  const auto dk = depth.map(k);
  ad::Tensor<float> dmap(ad::Shape{1, depth.height(), depth.width(), 1}, std::vector<float>(dk.begin(), dk.end()));
  const auto grid = ad::displaced_grid(ad::constant(dmap), {static_cast<float>(offsets[k].du)},
                                       {static_cast<float>(offsets[k].dv)});
  const auto out = ad::grid_sample(ad::constant(cmap), grid);
  return std::vector<float>(out.value().data().begin(), out.value().data().begin() + static_cast<long>(hw));
}

}  // namespace lfz
