#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "lfz/core/light_field.hpp"
#include "lfz/synthesis/depth_stack.hpp"
#include "lfz/trainer/augment.hpp"

namespace lfz {

/// Colored texture on a fronto-parallel plane: smooth sinusoids, optionally
/// with hard-edged stripes. The base hue is tied to the plane's disparity so depth
/// can be read from the center view alone.
struct PlaneTexture {
  std::array<double, 3> base{0.5, 0.5, 0.5};
  double fy = 0.2, fx = 0.2, phase_y = 0, phase_x = 0, amplitude = 0.3;
  // Hard-edged stripes along direction (cos theta, sin theta).
  double stripes = 0, stripe_freq = 0.5, stripe_theta = 0, stripe_phase = 0;

  float at(double y, double x, int c) const {
    double s = 0.6 * std::sin(fx * x + phase_x) + 0.4 * std::sin(fy * y + phase_y) * std::cos(0.5 * fx * x);
    if (stripes > 0) {
      const double t = stripe_freq * (x * std::cos(stripe_theta) + y * std::sin(stripe_theta)) + stripe_phase;
      s += stripes * (std::sin(t) >= 0 ? 1.0 : -1.0);
    }
    return static_cast<float>(std::clamp(base[c] * (1.0 + amplitude * s), 0.0, 1.0));
  }
};

/// Axis-aligned rectangle in center-view coordinates.
struct Rect {
  double top = 0, left = 0, bottom = 0, right = 0;
  bool contains(double y, double x) const { return y >= top && y < bottom && x >= left && x < right; }
};

struct SceneLayout {
  double background_disparity = 0;
  PlaneTexture background;
  std::optional<Rect> foreground;  // occludes the background
  double foreground_disparity = 0;
  PlaneTexture foreground_texture;
};

/// A rendered scene with its ground-truth per-view disparity.
struct SyntheticScene {
  SceneLayout layout;
  LightField lf;
  DepthStack depth;

  bool single_plane() const { return !layout.foreground.has_value(); }
};

inline PlaneTexture texture_for_disparity(double d, double d_max, std::mt19937_64& rng, double stripes = 0) {
  std::uniform_real_distribution<double> freq(0.15, 0.4), phase(0.0, 6.283185307179586), amp(0.2, 0.35);
  PlaneTexture t;
  const double hue = 240.0 * (d_max - d) / (2 * d_max);
  const auto rgb = detail::hsv_to_rgb(hue, 0.55, 0.7);
  t.base = {rgb[0], rgb[1], rgb[2]};
  t.fy = freq(rng);
  t.fx = freq(rng);
  t.phase_y = phase(rng);
  t.phase_x = phase(rng);
  t.amplitude = amp(rng);
  if (stripes > 0) {
    t.stripes = stripes;
    t.stripe_freq = std::uniform_real_distribution<double>(0.3, 0.8)(rng);
    t.stripe_theta = phase(rng);
    t.stripe_phase = phase(rng);
  }
  return t;
}

/// Renders every view analytically: view u at pixel x shows the scene point
/// at x + (u - u0) * d, front layer first.
inline SyntheticScene render_scene(const SceneLayout& layout, AngularSize angular, std::size_t h, std::size_t w) {
  const auto offsets = angular_offsets(angular);
  std::vector<Image> views;
  std::vector<float> maps(offsets.size() * h * w);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const AngularOffset o = offsets[k];
    Image img(h, w);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        float d = static_cast<float>(layout.background_disparity);
        const PlaneTexture* tex = &layout.background;
        double sy = y + o.du * layout.background_disparity, sx = x + o.dv * layout.background_disparity;
        if (layout.foreground) {
          const double fy = y + o.du * layout.foreground_disparity, fx = x + o.dv * layout.foreground_disparity;
          if (layout.foreground->contains(fy, fx)) {
            d = static_cast<float>(layout.foreground_disparity);
            tex = &layout.foreground_texture;
            sy = fy;
            sx = fx;
          }
        }
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = tex->at(sy, sx, c);
        maps[k * h * w + y * w + x] = d;
      }
    views.push_back(std::move(img));
  }
  return {layout, LightField(angular, std::move(views)), DepthStack(angular, h, w, std::move(maps))};
}

struct SceneSetConfig {
  std::size_t count = 16;
  AngularSize angular{7, 7};
  std::size_t height = 64, width = 64;
  double d_max = 2.0;
  double stripes = 0;  // amplitude of hard-edged stripes, 0 = smooth textures
};

/// Desk training scenes: the first min(count, 5) are single planes at
/// integer disparities -2..2 (scaled to d_max); the rest place a rectangle
/// in front of a background plane, with disparities on a half-pixel grid.
inline std::vector<SyntheticScene> make_scenes(const SceneSetConfig& cfg, std::uint64_t seed) {
  if (cfg.count == 0 || cfg.height < 8 || cfg.width < 8) throw UsageError("scene set needs at least one 8x8 scene");
  std::mt19937_64 rng(seed);
  std::vector<double> grid;
  for (int i = -4; i <= 4; ++i) grid.push_back(cfg.d_max * i / 4.0);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::vector<SyntheticScene> out;
  for (std::size_t s = 0; s < cfg.count; ++s) {
    SceneLayout l;
    if (s < 5) {
      l.background_disparity = cfg.d_max * (static_cast<double>(s) - 2.0) / 2.0;
      l.background = texture_for_disparity(l.background_disparity, cfg.d_max, rng, cfg.stripes);
    } else {
      l.background_disparity = grid[pick(rng)];
      do {
        l.foreground_disparity = grid[pick(rng)];
      } while (l.foreground_disparity == l.background_disparity);
      l.background = texture_for_disparity(l.background_disparity, cfg.d_max, rng, cfg.stripes);
      l.foreground_texture = texture_for_disparity(l.foreground_disparity, cfg.d_max, rng, cfg.stripes);
      const double h = static_cast<double>(cfg.height), w = static_cast<double>(cfg.width);
      std::uniform_real_distribution<double> size(0.3, 0.55), centre(0.35, 0.65);
      const double rh = size(rng) * h / 2, rw = size(rng) * w / 2, cy = centre(rng) * h, cx = centre(rng) * w;
      l.foreground = Rect{std::round(cy - rh), std::round(cx - rw), std::round(cy + rh), std::round(cx + rw)};
    }
    out.push_back(render_scene(l, cfg.angular, cfg.height, cfg.width));
  }
  return out;
}

/// Mean absolute disparity error over pixels whose ground-truth neighbourhood
/// (Chebyshev radius `margin`) in the same view has a single disparity.
inline double constant_region_mae(const DepthStack& pred, const DepthStack& gt, std::size_t margin = 2) {
  if (pred.view_count() != gt.view_count() || pred.height() != gt.height() || pred.width() != gt.width())
    throw DataError("disparity stacks differ in dimensions");
  const std::size_t h = gt.height(), w = gt.width();
  double acc = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < gt.view_count(); ++k) {
    const auto g = gt.map(k), p = pred.map(k);
    for (std::size_t y = margin; y + margin < h; ++y)
      for (std::size_t x = margin; x + margin < w; ++x) {
        const float d = g[y * w + x];
        bool flat = true;
        for (std::size_t yy = y - margin; flat && yy <= y + margin; ++yy)
          for (std::size_t xx = x - margin; flat && xx <= x + margin; ++xx) flat = g[yy * w + xx] == d;
        if (!flat) continue;
        acc += std::abs(static_cast<double>(p[y * w + x]) - d);
        ++n;
      }
  }
  if (n == 0) throw DataError("no constant-disparity pixels to evaluate");
  return acc / static_cast<double>(n);
}

}  // namespace lfz
