#pragma once

#include <cstdint>
#include <filesystem>

#include "lfz/nets/archive.hpp"
#include "lfz/nets/depth_net.hpp"
#include "lfz/nets/hance.hpp"

namespace lfz::nets {

/// Both networks of the decoder side.
template <class T>
struct Models {
  JpegHance<T> hance;
  DepthNet<T> depth;

  Models() = default;
  Models(HanceConfig hc, DepthConfig dc, std::uint64_t seed) : hance(hc, seed), depth(dc, seed + 1) {}

  void set_training(bool on) { hance.set_training(on); }
};

inline ArchiveTensor config_tensor(const HanceConfig& c) {
  return {"config/hance", {3}, {float(c.width), float(c.bottleneck), float(c.blocks)}};
}

inline ArchiveTensor config_tensor(const DepthConfig& c) {
  return {"config/depth",
          {9},
          {float(c.stem), float(c.widths[0]), float(c.widths[1]), float(c.widths[2]), float(c.widths[3]),
           float(c.expansion), float(c.blocks), float(c.views), float(c.d_max)}};
}

inline HanceConfig hance_config_from(const WeightArchive& a) {
  const auto& t = a.get("config/hance");
  if (t.data.size() != 3) throw DataError("malformed config/hance tensor");
  return {std::size_t(t.data[0]), std::size_t(t.data[1]), std::size_t(t.data[2])};
}

inline DepthConfig depth_config_from(const WeightArchive& a) {
  const auto& t = a.get("config/depth");
  if (t.data.size() != 9) throw DataError("malformed config/depth tensor");
  const auto& d = t.data;
  return {std::size_t(d[0]), {std::size_t(d[1]), std::size_t(d[2]), std::size_t(d[3]), std::size_t(d[4])},
          std::size_t(d[5]), std::size_t(d[6]), std::size_t(d[7]), double(d[8])};
}

template <class T>
WeightArchive save_weights(const Models<T>& m) {
  WeightArchive a;
  a.add(config_tensor(m.hance.config()));
  a.add(config_tensor(m.depth.config()));
  store(a, m.hance.entries());
  store(a, m.depth.entries());
  return a;
}

/// Rebuilds both networks from the configs recorded in the archive and loads
/// every tensor by name.
template <class T>
Models<T> load_weights(const WeightArchive& a) {
  Models<T> m(hance_config_from(a), depth_config_from(a), 0);
  restore(a, m.hance.entries());
  restore(a, m.depth.entries());
  return m;
}

template <class T>
Models<T> load_weights(const std::filesystem::path& path) {
  return load_weights<T>(WeightArchive::load(path));
}

}  // namespace lfz::nets
