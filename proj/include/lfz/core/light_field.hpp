#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lfz/core/error.hpp"
#include "lfz/core/image.hpp"

namespace lfz {

struct AngularSize {
  std::size_t u = 1;
  std::size_t v = 1;
  friend bool operator==(const AngularSize&, const AngularSize&) = default;
};

struct SpatialSize {
  std::size_t height = 1;
  std::size_t width = 1;
  friend bool operator==(const SpatialSize&, const SpatialSize&) = default;
};

/// Angular view index (u = row, v = column of the view grid).
struct ViewIndex {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const ViewIndex&, const ViewIndex&) = default;
};

/// Raw angular grid of views with no parity requirement (e.g. a 14x14 capture
/// before cropping). Views are row-major in angular order.
struct ViewGrid {
  AngularSize angular{};
  std::vector<Image> views;

  const Image& view(std::size_t u, std::size_t v) const { return views.at(u * angular.v + v); }

  void validate() const {
    if (angular.u == 0 || angular.v == 0 || views.size() != angular.u * angular.v)
      throw DataError("view count does not match angular dimensions");
    for (const Image& img : views)
      if (!img.same_shape(views.front())) throw DataError("inconsistent view dimensions");
  }
};

/// A U x V grid of equally sized RGB views with a unique center view.
///
/// Views are stored row-major in angular order. The grid dimensions must be
/// odd so that ((U-1)/2, (V-1)/2) names a single center view. Instances are
/// immutable once built.
class LightField {
 public:
  LightField() = default;

  LightField(AngularSize angular, std::vector<Image> views)
      : angular_(angular), views_(std::move(views)) {
    if (angular_.u == 0 || angular_.v == 0 || angular_.u % 2 == 0 || angular_.v % 2 == 0)
      throw DataError("angular dimensions must be odd and positive, got " +
                      std::to_string(angular_.u) + "x" + std::to_string(angular_.v));
    if (views_.size() != angular_.u * angular_.v)
      throw DataError("view count does not match angular dimensions");
    const Image& first = views_.front();
    for (const Image& img : views_) {
      if (!img.same_shape(first)) throw DataError("inconsistent view dimensions");
      if (!img.in_unit_range()) throw DataError("light-field sample outside [0,1]");
    }
  }

  AngularSize angular() const { return angular_; }
  SpatialSize spatial() const { return {views_.front().height(), views_.front().width()}; }
  std::size_t view_count() const { return views_.size(); }
  std::size_t height() const { return views_.front().height(); }
  std::size_t width() const { return views_.front().width(); }

  ViewIndex center_index() const { return {(angular_.u - 1) / 2, (angular_.v - 1) / 2}; }
  std::size_t center_linear() const {
    const ViewIndex c = center_index();
    return c.u * angular_.v + c.v;
  }

  const Image& view(std::size_t u, std::size_t v) const { return views_.at(u * angular_.v + v); }
  const Image& view(ViewIndex i) const { return view(i.u, i.v); }
  const Image& view_linear(std::size_t i) const { return views_.at(i); }
  const std::vector<Image>& views() const { return views_; }

  friend bool operator==(const LightField&, const LightField&) = default;

 private:
  AngularSize angular_{};
  std::vector<Image> views_;
};

/// Returns a copy of the center view.
inline Image center_view(const LightField& lf) { return lf.view(lf.center_index()); }

/// Angular crop centered on the grid, spatial crop centered with floor offsets.
inline LightField crop(const ViewGrid& grid, AngularSize angular, SpatialSize spatial) {
  grid.validate();
  const AngularSize src = grid.angular;
  const std::size_t h = grid.views.front().height(), w = grid.views.front().width();
  if (angular.u % 2 == 0 || angular.v % 2 == 0 || angular.u == 0 || angular.v == 0)
    throw DataError("angular crop dimensions must be odd and positive");
  if (angular.u > src.u || angular.v > src.v || spatial.height > h || spatial.width > w ||
      spatial.height == 0 || spatial.width == 0)
    throw DataError("crop larger than source light field");

  const std::size_t u_off = (src.u - angular.u) / 2;
  const std::size_t v_off = (src.v - angular.v) / 2;
  const std::size_t top = (h - spatial.height) / 2;
  const std::size_t left = (w - spatial.width) / 2;

  std::vector<Image> views;
  views.reserve(angular.u * angular.v);
  for (std::size_t u = 0; u < angular.u; ++u)
    for (std::size_t v = 0; v < angular.v; ++v)
      views.push_back(crop_image(grid.view(u + u_off, v + v_off), top, left, spatial.height,
                                 spatial.width));
  return LightField(angular, std::move(views));
}

inline LightField crop(const LightField& lf, AngularSize angular, SpatialSize spatial) {
  return crop(ViewGrid{lf.angular(), lf.views()}, angular, spatial);
}

}  // namespace lfz
