#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfz/nets/layers.hpp"

namespace lfz::nets {

struct HanceConfig {
  std::size_t width = 128;      // trunk channels
  std::size_t bottleneck = 60;  // inner channels of each residual block
  std::size_t blocks = 4;

  static HanceConfig full() { return {}; }
  static HanceConfig desk() { return {24, 12, 2}; }

  void validate() const {
    if (width == 0 || bottleneck == 0 || blocks == 0) throw UsageError("JPEG-Hance widths must be positive");
  }
  friend bool operator==(const HanceConfig&, const HanceConfig&) = default;
};

/// Residual artifact-reduction CNN. A stack of bottleneck blocks
/// (1x1 -> 3x3 -> 1x1, each conv followed by batch norm, with a block-level
/// skip) feeds a tanh residual that is added to the input in the [-1,1]
/// domain and clamped. The output conv starts at zero, so a fresh network is
/// the identity.
template <class T>
class JpegHance {
 public:
  JpegHance() = default;
  JpegHance(HanceConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg.validate();
    ParamStore<T> ps(seed, "hance/");
    stem_ = Conv<T>(ps, "stem", 3, 3, cfg.width);
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
      const std::string p = "block" + std::to_string(b) + "/";
      Block blk;
      blk.reduce = Conv<T>(ps, p + "reduce", 1, cfg.width, cfg.bottleneck);
      blk.bn1 = BatchNorm<T>(ps, p + "bn1", cfg.bottleneck);
      blk.spatial = Conv<T>(ps, p + "spatial", 3, cfg.bottleneck, cfg.bottleneck);
      blk.bn2 = BatchNorm<T>(ps, p + "bn2", cfg.bottleneck);
      blk.expand = Conv<T>(ps, p + "expand", 1, cfg.bottleneck, cfg.width);
      blk.bn3 = BatchNorm<T>(ps, p + "bn3", cfg.width);
      blocks_.push_back(blk);
    }
    out_ = Conv<T>(ps, "out", 3, cfg.width, 3, 1, Init::zero);
    entries_ = ps.take();
  }

  /// x is [N,H,W,3] in [0,1]; returns the enhanced batch in [0,1].
  Var<T> forward(const Var<T>& x) {
    if (x.shape().size() != 4 || x.shape()[3] != 3)
      throw UsageError("JPEG-Hance expects [N,H,W,3] input, got " + ad::shape_str(x.shape()));
    const Var<T> s = to_signed(x);
    Var<T> h = ad::elu(stem_(s));
    for (Block& b : blocks_) {
      Var<T> r = ad::elu(b.bn1(b.reduce(h), training_));
      r = ad::elu(b.bn2(b.spatial(r), training_));
      r = b.bn3(b.expand(r), training_);
      h = ad::elu(ad::add(h, r));
    }
    const Var<T> y = ad::clamp(ad::add(s, ad::tanh(out_(h))), T(-1), T(1));
    // x + (y - s)/2 equals (y + 1)/2 and is exactly x while the residual is 0.
    return ad::add(x, ad::scale(ad::sub(y, s), T(0.5)));
  }

  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }
  const HanceConfig& config() const { return cfg_; }
  std::vector<NamedVar<T>>& entries() { return entries_; }
  const std::vector<NamedVar<T>>& entries() const { return entries_; }
  std::vector<Var<T>> parameters() const { return trainable(entries_); }
  std::size_t parameter_count() const { return count_trainable(entries_); }

 private:
  struct Block {
    Conv<T> reduce, spatial, expand;
    BatchNorm<T> bn1, bn2, bn3;
  };

  HanceConfig cfg_;
  Conv<T> stem_, out_;
  std::vector<Block> blocks_;
  std::vector<NamedVar<T>> entries_;
  bool training_ = false;
};

}  // namespace lfz::nets
