#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "lfz/core/light_field.hpp"

namespace lfz {

enum class AugmentKind { original, contrast, brightness, hue };

/// Branch probabilities; must sum to 1.
struct AugmentProbs {
  double original = 0.50;
  double contrast = 0.15;
  double brightness = 0.15;
  double hue = 0.20;

  static AugmentProbs pretrain() { return {}; }
  static AugmentProbs finetune() { return {0.25, 0.25, 0.25, 0.25}; }
  static AugmentProbs none() { return {1.0, 0.0, 0.0, 0.0}; }

  void validate() const {
    for (double p : {original, contrast, brightness, hue})
      if (p < 0 || p > 1) throw UsageError("augmentation probabilities must lie in [0,1]");
    if (std::abs(original + contrast + brightness + hue - 1.0) > 1e-9)
      throw UsageError("augmentation probabilities must sum to 1");
  }
};

/// One drawn augmentation, applied identically to every view of a sample.
struct Augmentation {
  AugmentKind kind = AugmentKind::original;
  double amount = 0;  // contrast factor, brightness delta or hue shift in degrees
};

inline Augmentation draw_augmentation(const AugmentProbs& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  Augmentation a;
  if (r < p.original) return a;
  if (r < p.original + p.contrast) {
    a.kind = AugmentKind::contrast;
    a.amount = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
  } else if (r < p.original + p.contrast + p.brightness) {
    a.kind = AugmentKind::brightness;
    a.amount = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
  } else {
    a.kind = AugmentKind::hue;
    a.amount = std::uniform_real_distribution<double>(-0.4, 0.4)(rng) * 180.0;
  }
  return a;
}

namespace detail {

inline std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), c = mx - mn;
  double h = 0;
  if (c > 0) {
    if (mx == r) h = 60.0 * std::fmod((g - b) / c + 6.0, 6.0);
    else if (mx == g) h = 60.0 * ((b - r) / c + 2.0);
    else h = 60.0 * ((r - g) / c + 4.0);
  }
  return {h, mx > 0 ? c / mx : 0.0, mx};
}

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0) / 60.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {r + m, g + m, b + m};
}

}  // namespace detail

inline std::array<double, 3> channel_means(const Image& img) {
  std::array<double, 3> mean{0, 0, 0};
  const auto px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i) mean[i % 3] += px[i];
  for (double& m : mean) m /= static_cast<double>(px.size() / 3);
  return mean;
}

/// Applies `a` to one image; results are clamped to [0,1]. Contrast scales
/// each channel about `mean` (the image's own channel means by default),
/// brightness adds a constant, hue rotates in HSV.
inline Image apply_augmentation(const Image& img, const Augmentation& a,
                                const std::array<double, 3>* about = nullptr) {
  if (a.kind == AugmentKind::original) return img;
  Image out = img;
  auto px = out.data();
  switch (a.kind) {
    case AugmentKind::contrast: {
      const std::array<double, 3> mean = about ? *about : channel_means(img);
      for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<float>(mean[i % 3] + a.amount * (px[i] - mean[i % 3]));
      break;
    }
    case AugmentKind::brightness:
      for (float& v : px) v = static_cast<float>(v + a.amount);
      break;
    case AugmentKind::hue:
      for (std::size_t i = 0; i < px.size(); i += 3) {
        auto hsv = detail::rgb_to_hsv(px[i], px[i + 1], px[i + 2]);
        const auto rgb = detail::hsv_to_rgb(hsv[0] + a.amount, hsv[1], hsv[2]);
        for (int c = 0; c < 3; ++c) px[i + c] = static_cast<float>(rgb[c]);
      }
      break;
    case AugmentKind::original:
      break;
  }
  out.clamp_unit();
  return out;
}

inline Image augment(const Image& img, const AugmentProbs& p, std::mt19937_64& rng) {
  return apply_augmentation(img, draw_augmentation(p, rng));
}

inline LightField apply_augmentation(const LightField& lf, const Augmentation& a) {
  if (a.kind == AugmentKind::original) return lf;
  // Contrast pivots on the center view's means so all views stay consistent.
  const auto mean = channel_means(center_view(lf));
  std::vector<Image> views;
  views.reserve(lf.view_count());
  for (const Image& v : lf.views()) views.push_back(apply_augmentation(v, a, &mean));
  return LightField(lf.angular(), std::move(views));
}

}  // namespace lfz
