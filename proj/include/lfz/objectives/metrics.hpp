#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfz/core/light_field.hpp"
#include "lfz/objectives/ssim.hpp"
#include "lfz/synthesis/convert.hpp"

namespace lfz {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double ssim(const Image& a, const Image& b, const SsimWindow& win = {}) {
  if (!a.same_shape(b)) throw DataError("ssim: image dimensions differ");
  const auto ta = ad::constant(image_to_tensor<double>(a));
  const auto tb = ad::constant(image_to_tensor<double>(b));
  return ssim(ta, tb, win).item();
}

inline double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DataError("mse: image dimensions differ");
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// PSNR with peak 1.0; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0) return kInfinity;
  return 10.0 * std::log10(1.0 / m);
}

namespace detail {
inline void check_same_dims(const LightField& a, const LightField& b) {
  if (a.angular() != b.angular() || a.spatial() != b.spatial())
    throw DataError("light fields differ in dimensions");
}
}  // namespace detail

inline double mssim(const LightField& a, const LightField& b, const SsimWindow& win = {}) {
  detail::check_same_dims(a, b);
  double acc = 0;
  for (std::size_t i = 0; i < a.view_count(); ++i) acc += ssim(a.view_linear(i), b.view_linear(i), win);
  return acc / static_cast<double>(a.view_count());
}

struct MeanPsnr {
  double value = 0;              // mean over finite views, +inf when none are finite
  std::size_t infinite_views = 0;  // identical views left out of the mean
};

inline MeanPsnr mpsnr_detail(const LightField& a, const LightField& b) {
  detail::check_same_dims(a, b);
  MeanPsnr r;
  double acc = 0;
  std::size_t finite = 0;
  for (std::size_t i = 0; i < a.view_count(); ++i) {
    const double p = psnr(a.view_linear(i), b.view_linear(i));
    if (std::isinf(p)) {
      ++r.infinite_views;
    } else {
      acc += p;
      ++finite;
    }
  }
  r.value = finite == 0 ? kInfinity : acc / static_cast<double>(finite);
  return r;
}

inline double mpsnr(const LightField& a, const LightField& b) { return mpsnr_detail(a, b).value; }

inline double bpp(std::size_t bytes, AngularSize angular, SpatialSize spatial) {
  const double px = static_cast<double>(angular.u) * angular.v * spatial.height * spatial.width;
  if (px == 0) throw UsageError("bpp: dimensions must be positive");
  return 8.0 * static_cast<double>(bytes) / px;
}

struct RefocusScore {
  double alpha = 0;
  double ssim = 0;
  double psnr = 0;
};

/// One line of a metric report.
struct MetricRecord {
  std::string id;
  double mssim = 0;
  double mpsnr = 0;
  double bpp = 0;
  double dof_ssim = 0;
  double dof_psnr = 0;
  std::vector<RefocusScore> refocus;
  std::optional<double> compress_seconds;
  std::optional<double> decompress_seconds;
  std::optional<double> model_load_seconds;
};

namespace detail {
inline nlohmann::ordered_json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}
inline double metric_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw DataError("bad metric value '" + s + "'");
  }
  return j.get<double>();
}
inline std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<double>();
}
}  // namespace detail

/// Single-line JSON object. Non-finite values are written as the strings
/// "inf", "-inf" and "nan".
///   {"id", "mssim", "mpsnr", "bpp", "dof_ssim", "dof_psnr",
///    "refocus": [{"alpha", "ssim", "psnr"}...],
///    "compress_seconds"?, "decompress_seconds"?, "model_load_seconds"?}
inline std::string to_json_line(const MetricRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["mssim"] = detail::metric_value(r.mssim);
  j["mpsnr"] = detail::metric_value(r.mpsnr);
  j["bpp"] = detail::metric_value(r.bpp);
  j["dof_ssim"] = detail::metric_value(r.dof_ssim);
  j["dof_psnr"] = detail::metric_value(r.dof_psnr);
  auto refocus = nlohmann::ordered_json::array();
  for (const RefocusScore& s : r.refocus)
    refocus.push_back({{"alpha", s.alpha}, {"ssim", detail::metric_value(s.ssim)}, {"psnr", detail::metric_value(s.psnr)}});
  j["refocus"] = refocus;
  if (r.compress_seconds) j["compress_seconds"] = *r.compress_seconds;
  if (r.decompress_seconds) j["decompress_seconds"] = *r.decompress_seconds;
  if (r.model_load_seconds) j["model_load_seconds"] = *r.model_load_seconds;
  return j.dump();
}

inline MetricRecord parse_metric_record(const std::string& line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    MetricRecord r;
    r.id = j.at("id").get<std::string>();
    r.mssim = detail::metric_from(j.at("mssim"));
    r.mpsnr = detail::metric_from(j.at("mpsnr"));
    r.bpp = detail::metric_from(j.at("bpp"));
    r.dof_ssim = detail::metric_from(j.at("dof_ssim"));
    r.dof_psnr = detail::metric_from(j.at("dof_psnr"));
    if (j.contains("refocus"))
      for (const auto& e : j.at("refocus"))
        r.refocus.push_back({e.at("alpha").get<double>(), detail::metric_from(e.at("ssim")),
                             detail::metric_from(e.at("psnr"))});
    r.compress_seconds = detail::optional_from(j, "compress_seconds");
    r.decompress_seconds = detail::optional_from(j, "decompress_seconds");
    r.model_load_seconds = detail::optional_from(j, "model_load_seconds");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metric record: ") + e.what());
  }
}

}  // namespace lfz
