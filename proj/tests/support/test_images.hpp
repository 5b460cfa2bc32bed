#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>

#include "lfz/core/image.hpp"

namespace lfz::testing {

inline std::filesystem::path data_dir() { return LFZ_TEST_DATA_DIR; }

/// Smooth deterministic test pattern with a few edges, values in [0,1].
inline Image test_pattern(std::size_t h, std::size_t w, unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 6.283185307179586);
  const double p0 = ph(rng), p1 = ph(rng), p2 = ph(rng);
  Image img(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double fy = static_cast<double>(y), fx = static_cast<double>(x);
      const double edge = (fx + 0.5 * fy) > 0.6 * static_cast<double>(w) ? 0.15 : 0.0;
      img.at(y, x, 0) = static_cast<float>(0.5 + 0.3 * std::sin(0.21 * fx + p0) * std::cos(0.17 * fy) + edge);
      img.at(y, x, 1) = static_cast<float>(0.45 + 0.25 * std::sin(0.13 * (fx + fy) + p1) - edge);
      img.at(y, x, 2) = static_cast<float>(0.5 + 0.3 * std::cos(0.29 * fy + p2) * std::sin(0.07 * fx));
    }
  img.clamp_unit();
  return img;
}

/// Uniform random noise image in [0,1].
inline Image noise_image(std::size_t h, std::size_t w, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  Image img(h, w);
  for (float& v : img.data()) v = d(rng);
  return img;
}

}  // namespace lfz::testing
