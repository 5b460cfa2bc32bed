#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lfz/nets/layers.hpp"

namespace lfz::nets {

struct DepthConfig {
  std::size_t stem = 32;
  std::array<std::size_t, 4> widths{64, 128, 256, 512};  // bottleneck width per stage
  std::size_t expansion = 2;                             // stage channels = expansion * width
  std::size_t blocks = 2;                                // residual blocks per stage
  std::size_t views = 49;
  double d_max = 4.0;

  static DepthConfig full() { return {}; }
  static DepthConfig desk(std::size_t views = 49) { return {8, {8, 16, 32, 64}, 2, 2, views, 4.0}; }

  static constexpr std::size_t kDivisor = 16;

  void validate() const {
    if (stem == 0 || expansion == 0 || views == 0 || !(d_max > 0))
      throw UsageError("Depth-Net configuration must be positive");
    for (std::size_t w : widths)
      if (w == 0) throw UsageError("Depth-Net widths must be positive");
  }
  friend bool operator==(const DepthConfig&, const DepthConfig&) = default;
};

/// Encoder-decoder disparity network: four stride-2 downsampling stages of
/// bottleneck residual blocks (instance norm after the first two convs), four
/// upsampling stages with skip connections, and a d_max*tanh head emitting one
/// disparity map per view.
template <class T>
class DepthNet {
 public:
  DepthNet() = default;
  DepthNet(DepthConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg.validate();
    ParamStore<T> ps(seed, "depth/");
    stem_ = Conv<T>(ps, "stem", 3, 3, cfg.stem);
    std::array<std::size_t, 5> level{cfg.stem, 0, 0, 0, 0};
    std::size_t prev = cfg.stem;
    for (std::size_t s = 0; s < 4; ++s) {
      const std::string p = "down" + std::to_string(s) + "/";
      const std::size_t w = cfg.widths[s], outer = w * cfg.expansion;
      Stage st;
      st.down = Conv<T>(ps, p + "conv", 3, prev, outer, 2);
      for (std::size_t b = 0; b < cfg.blocks; ++b) {
        const std::string q = p + "block" + std::to_string(b) + "/";
        Residual r;
        r.reduce = Conv<T>(ps, q + "reduce", 1, outer, w);
        r.in1 = InstanceNorm<T>(ps, q + "in1", w);
        r.spatial = Conv<T>(ps, q + "spatial", 3, w, w);
        r.in2 = InstanceNorm<T>(ps, q + "in2", w);
        r.expand = Conv<T>(ps, q + "expand", 1, w, outer);
        st.blocks.push_back(r);
      }
      stages_.push_back(st);
      prev = outer;
      level[s + 1] = outer;
    }
    for (std::size_t u = 0; u < 4; ++u) {
      const std::string p = "up" + std::to_string(u) + "/";
      const std::size_t skip = level[3 - u];
      Up up;
      up.deconv = ConvTranspose<T>(ps, p + "deconv", 4, prev, skip);
      up.fuse = Conv<T>(ps, p + "fuse", 3, 2 * skip, skip);
      up.refine = Conv<T>(ps, p + "refine", 3, skip, skip);
      ups_.push_back(up);
      prev = skip;
    }
    head_ = Conv<T>(ps, "head", 3, prev, cfg.views, 1, Init::fan_in, 0.1);
    entries_ = ps.take();
  }

  /// x is [N,H,W,3] in [0,1] with H,W divisible by 16; returns [N,H,W,views]
  /// disparities in pixels per unit angular offset, bounded by d_max.
  Var<T> forward(const Var<T>& x) const {
    if (x.shape().size() != 4 || x.shape()[3] != 3)
      throw UsageError("Depth-Net expects [N,H,W,3] input, got " + ad::shape_str(x.shape()));
    if (x.shape()[1] % DepthConfig::kDivisor || x.shape()[2] % DepthConfig::kDivisor)
      throw UsageError("Depth-Net input spatial dims must be divisible by 16, got " + ad::shape_str(x.shape()));
    std::vector<Var<T>> skips;
    Var<T> h = ad::elu(stem_(to_signed(x)));
    for (const Stage& st : stages_) {
      skips.push_back(h);
      h = ad::elu(st.down(h));
      for (const Residual& r : st.blocks) {
        Var<T> t = ad::elu(r.in1(r.reduce(h)));
        t = ad::elu(r.in2(r.spatial(t)));
        h = ad::elu(ad::add(h, r.expand(t)));
      }
    }
    for (std::size_t u = 0; u < ups_.size(); ++u) {
      const Up& up = ups_[u];
      Var<T> t = ad::elu(up.deconv(h));
      t = ad::elu(up.fuse(ad::concat_channels<T>({t, skips[3 - u]})));
      h = ad::elu(up.refine(t));
    }
    return ad::scale(ad::tanh(head_(h)), static_cast<T>(cfg_.d_max));
  }

  const DepthConfig& config() const { return cfg_; }
  std::vector<NamedVar<T>>& entries() { return entries_; }
  const std::vector<NamedVar<T>>& entries() const { return entries_; }
  std::vector<Var<T>> parameters() const { return trainable(entries_); }
  std::size_t parameter_count() const { return count_trainable(entries_); }

 private:
  struct Residual {
    Conv<T> reduce, spatial, expand;
    InstanceNorm<T> in1, in2;
  };
  struct Stage {
    Conv<T> down;
    std::vector<Residual> blocks;
  };
  struct Up {
    ConvTranspose<T> deconv;
    Conv<T> fuse, refine;
  };

  DepthConfig cfg_;
  Conv<T> stem_, head_;
  std::vector<Stage> stages_;
  std::vector<Up> ups_;
  std::vector<NamedVar<T>> entries_;
};

}  // namespace lfz::nets
