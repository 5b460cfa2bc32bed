#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "lfz/jpeg/jpeg.hpp"
#include "lfz/nets/models.hpp"
#include "lfz/objectives/metrics.hpp"
#include "lfz/pipeline/container.hpp"
#include "lfz/synthesis/synthesis.hpp"

namespace lfz {

/// Smallest multiple of the Depth-Net divisor that is >= n.
inline std::size_t padded_extent(std::size_t n) {
  const std::size_t k = nets::DepthConfig::kDivisor;
  return (n + k - 1) / k * k;
}

/// Keeps only the JPEG-coded center view and the light-field dimensions.
inline LfzContainer compress(const LightField& lf, const jpeg::JpegConfig& cfg = {}) {
  cfg.validate();
  LfzContainer c;
  c.angular = lf.angular();
  c.spatial = lf.spatial();
  c.quality = static_cast<std::uint8_t>(cfg.quality);
  c.payload = jpeg::encode(center_view(lf), cfg);
  return c;
}

/// Bits of JPEG payload per light-field sample.
inline double container_bpp(const LfzContainer& c) { return bpp(c.payload.size(), c.angular, c.spatial); }

/// Runs JPEG-Hance on one image in inference mode.
template <class T>
Image enhance(nets::JpegHance<T>& net, const Image& img) {
  if (net.training()) net.set_training(false);
  ad::NoGradGuard no_grad;
  const auto out = net.forward(ad::constant(image_to_tensor<T>(img)));
  Image e = tensor_to_image(out.value());
  e.clamp_unit();
  return e;
}

/// Per-view disparity of the (enhanced) center view. The image is zero-padded
/// at the bottom and right to a multiple of 16 and the maps cropped back.
template <class T>
DepthStack estimate_depth(const nets::DepthNet<T>& net, const Image& center, AngularSize angular) {
  if (net.config().views != angular.u * angular.v)
    throw DataError("Depth-Net predicts " + std::to_string(net.config().views) + " views, light field has " +
                    std::to_string(angular.u * angular.v));
  ad::NoGradGuard no_grad;
  const std::size_t h = center.height(), w = center.width();
  ad::Var<T> x = ad::constant(image_to_tensor<T>(center));
  x = ad::pad_spatial(x, padded_extent(h) - h, padded_extent(w) - w);
  const auto d = ad::crop_spatial(net.forward(x), 0, 0, h, w);
  return DepthStack::from_tensor(d.value(), angular);
}

/// Zeroes the Depth-Net output layer so every disparity is 0: the decoder
/// then replicates the enhanced center view (baseline).
template <class T>
void zero_disparity_stub(nets::DepthNet<T>& net) {
  for (auto& e : net.entries())
    if (e.name.rfind("depth/head/", 0) == 0) e.var.mutable_value().fill(T(0));
}

struct Reconstruction {
  Image decoded;   // c_J
  Image enhanced;  // c_E
  DepthStack depth;
  LightField lf;
};

template <class T>
Reconstruction reconstruct(const LfzContainer& c, nets::Models<T>& m) {
  Reconstruction r;
  r.decoded = jpeg::decode(c.payload);
  if (r.decoded.height() != c.spatial.height || r.decoded.width() != c.spatial.width)
    throw DataError("JPEG payload dimensions do not match the LFZ header");
  r.enhanced = enhance(m.hance, r.decoded);
  r.depth = estimate_depth(m.depth, r.enhanced, c.angular);
  r.lf = reconstruct_lf(r.enhanced, r.depth, c.angular);
  return r;
}

template <class T>
LightField decompress(const LfzContainer& c, nets::Models<T>& m) {
  return reconstruct(c, m).lf;
}

struct EvalOptions {
  std::string id = "lf";
  std::vector<double> alphas{0.15, 1.5};
};

/// Quality metrics of a reconstruction against ground truth. Timing fields
/// are left empty.
inline MetricRecord score(const LightField& gt, const LightField& rec, std::size_t payload_bytes,
                          const EvalOptions& opt = {}) {
  if (gt.angular() != rec.angular() || gt.spatial() != rec.spatial())
    throw DataError("ground truth and reconstruction differ in dimensions");
  MetricRecord r;
  r.id = opt.id;
  r.mssim = mssim(gt, rec);
  r.mpsnr = mpsnr(gt, rec);
  r.bpp = bpp(payload_bytes, gt.angular(), gt.spatial());
  const Image dg = dof(gt), dr = dof(rec);
  r.dof_ssim = ssim(dg, dr);
  r.dof_psnr = psnr(dg, dr);
  for (double a : opt.alphas) {
    const Image fg = refocus(gt, a), fr = refocus(rec, a);
    r.refocus.push_back({a, ssim(fg, fr), psnr(fg, fr)});
  }
  return r;
}

/// Scores the container against ground truth and times both directions:
/// compress re-encodes the ground truth at the container's quality;
/// decompress covers decode, both networks and warping (models already
/// loaded).
template <class T>
MetricRecord evaluate(const LightField& gt, const LfzContainer& c, nets::Models<T>& m, const EvalOptions& opt = {},
                      jpeg::ChromaSubsampling chroma = jpeg::ChromaSubsampling::s420) {
  if (gt.angular() != c.angular || gt.spatial() != c.spatial)
    throw DataError("ground truth dimensions do not match the LFZ header");
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  jpeg::JpegConfig cfg;
  cfg.quality = c.quality;
  cfg.chroma_subsampling = chroma;
  const auto t0 = clock::now();
  const LfzContainer again = compress(gt, cfg);
  const auto t1 = clock::now();
  const LightField rec = decompress(c, m);
  const auto t2 = clock::now();
  (void)again;

  MetricRecord r = score(gt, rec, c.payload.size(), opt);
  r.compress_seconds = seconds(t0, t1);
  r.decompress_seconds = seconds(t1, t2);
  return r;
}

}  // namespace lfz
