#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lfz/core/error.hpp"

namespace lfz {

/// Learning rate decaying geometrically from `start` to `end` over the first
/// epochs - floor_epochs epochs, then held at `end`.
struct LrSchedule {
  double start = 1e-4;
  double end = 1e-6;
  std::size_t epochs = 45;
  std::size_t floor_epochs = 5;

  static LrSchedule constant(double lr, std::size_t epochs) { return {lr, lr, epochs, 0}; }

  void validate() const {
    if (!(start > 0) || !(end > 0)) throw UsageError("learning rates must be positive");
    if (end > start) throw UsageError("learning rate must not increase");
    if (epochs == 0) throw UsageError("schedule needs at least one epoch");
    if (floor_epochs > epochs) throw UsageError("floor epochs exceed total epochs");
  }

  double at_epoch(std::size_t e) const {
    if (start == end) return start;
    const std::size_t decay = epochs - floor_epochs;
    if (decay == 0 || e >= decay) return end;
    return start * std::pow(end / start, static_cast<double>(e) / static_cast<double>(decay));
  }

  /// (epoch, rate) for every epoch.
  std::vector<std::pair<std::size_t, double>> table() const {
    std::vector<std::pair<std::size_t, double>> t;
    for (std::size_t e = 0; e < epochs; ++e) t.emplace_back(e, at_epoch(e));
    return t;
  }
};

/// Top-left corners of a crop x crop window slid at `stride` over an h x w
/// image, row-major: floor((h-crop)/stride+1) x floor((w-crop)/stride+1).
inline std::vector<std::pair<std::size_t, std::size_t>> crop_origins(std::size_t h, std::size_t w, std::size_t crop,
                                                                     std::size_t stride) {
  if (stride == 0 || crop == 0) throw UsageError("crop size and stride must be positive");
  if (crop > h || crop > w) throw DataError("crop larger than image");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t y = 0; y + crop <= h; y += stride)
    for (std::size_t x = 0; x + crop <= w; x += stride) out.emplace_back(y, x);
  return out;
}

}  // namespace lfz
