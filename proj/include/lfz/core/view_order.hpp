#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "lfz/core/error.hpp"
#include "lfz/core/light_field.hpp"

namespace lfz {

enum class ViewOrdering { raster, spiral };

inline ViewOrdering parse_view_ordering(std::string_view s) {
  if (s == "raster") return ViewOrdering::raster;
  if (s == "spiral") return ViewOrdering::spiral;
  throw UsageError("unknown view ordering '" + std::string(s) + "'");
}

/// Linearizes the angular grid. Raster is row-major; spiral starts at the
/// center, steps right, then winds clockwise in growing rings, skipping
/// positions outside the grid.
inline std::vector<ViewIndex> view_sequence(AngularSize grid, ViewOrdering order) {
  std::vector<ViewIndex> seq;
  seq.reserve(grid.u * grid.v);
  if (order == ViewOrdering::raster) {
    for (std::size_t u = 0; u < grid.u; ++u)
      for (std::size_t v = 0; v < grid.v; ++v) seq.push_back({u, v});
    return seq;
  }

  // right, down, left, up
  constexpr std::array<std::array<long, 2>, 4> kSteps{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
  long u = static_cast<long>((grid.u - 1) / 2);
  long v = static_cast<long>((grid.v - 1) / 2);
  const std::size_t total = grid.u * grid.v;
  seq.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  std::size_t dir = 0;
  for (long run = 1; seq.size() < total; ++run) {
    for (int leg = 0; leg < 2 && seq.size() < total; ++leg) {
      for (long s = 0; s < run; ++s) {
        u += kSteps[dir][0];
        v += kSteps[dir][1];
        if (u >= 0 && v >= 0 && u < static_cast<long>(grid.u) && v < static_cast<long>(grid.v))
          seq.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
      }
      dir = (dir + 1) % 4;
    }
  }
  return seq;
}

/// Views of `lf` in the requested frame order, for external video encoders.
inline std::vector<Image> pseudo_sequence(const LightField& lf, ViewOrdering order) {
  std::vector<Image> frames;
  for (const ViewIndex& i : view_sequence(lf.angular(), order)) frames.push_back(lf.view(i));
  return frames;
}

}  // namespace lfz
