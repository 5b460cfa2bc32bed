#pragma once

#include <cmath>

#include "lfz/core/light_field.hpp"

namespace lfz::testing {

/// Smooth analytic texture, defined on the whole plane.
inline float smooth_texture(double y, double x, int c) {
  return static_cast<float>(0.5 + 0.2 * std::sin(0.19 * x + 0.8 * c) + 0.15 * std::cos(0.23 * y - 0.5 * c) +
                            0.08 * std::sin(0.11 * (x + y) + c));
}

/// Fronto-parallel plane at disparity `delta`: view u samples the texture at
/// x + (u - u0) * delta, evaluated analytically (no interpolation).
inline LightField analytic_planar_lf(std::size_t n, std::size_t h, std::size_t w, double delta) {
  std::vector<Image> views;
  const int r = static_cast<int>(n / 2);
  for (int u = -r; u <= r; ++u)
    for (int v = -r; v <= r; ++v) {
      Image img(h, w);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c) img.at(y, x, c) = smooth_texture(y + u * delta, x + v * delta, c);
      views.push_back(std::move(img));
    }
  return LightField({n, n}, std::move(views));
}

}  // namespace lfz::testing
