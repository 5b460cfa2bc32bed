#pragma once

#include <png.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "lfz/core/error.hpp"
#include "lfz/core/image.hpp"
#include "lfz/core/light_field.hpp"

namespace lfz {

namespace fs = std::filesystem;

namespace detail {

inline Image read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw DataError("'" + path.string() + "': " + png.message);
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw DataError("'" + path.string() + "': only 8-bit images supported");
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr))
    throw DataError("'" + path.string() + "': " + png.message);

  Image img(png.height, png.width);
  auto px = img.data();
  for (std::size_t i = 0; i < buf.size(); ++i) px[i] = from_u8(buf[i]);
  return img;
}

inline void write_png(const fs::path& path, const Image& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(img.size());
  auto px = img.data();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_u8(px[i]);
  if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr))
    throw DataError("cannot write '" + path.string() + "': " + png.message);
}

// Binary PPM (P6), maxval 255.
inline Image read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    long v = -1;
    while (in >> std::ws && in.peek() == '#') in.ignore(1 << 20, '\n');
    in >> v;
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255)
    throw DataError("'" + path.string() + "': unsupported PPM header");
  in.get();
  std::vector<unsigned char> buf(static_cast<std::size_t>(w * h * 3));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw DataError("'" + path.string() + "': truncated PPM data");
  Image img(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  for (std::size_t i = 0; i < buf.size(); ++i) img.data()[i] = from_u8(buf[i]);
  return img;
}

inline void write_ppm(const fs::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (float v : img.data()) out.put(static_cast<char>(to_u8(v)));
}

}  // namespace detail

/// Reads an 8-bit lossless image (PNG or binary PPM) into [0,1] samples.
inline Image read_image(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ppm") return detail::read_ppm(path);
  return detail::read_png(path);
}

/// Writes an image as 8-bit PNG or PPM, chosen by extension.
inline void write_image(const fs::path& path, const Image& img) {
  if (path.extension() == ".ppm")
    detail::write_ppm(path, img);
  else
    detail::write_png(path, img);
}

enum class LightFieldLayout { grid_image, view_directory };

/// Picks the layout from the file-system object: directories hold one file per view.
inline LightFieldLayout detect_layout(const fs::path& path) {
  return fs::is_directory(path) ? LightFieldLayout::view_directory : LightFieldLayout::grid_image;
}

/// Loads a grid of views without the odd-dimension requirement.
///
/// `view-directory` layout: files named `view_{u}_{v}.<png|ppm>` with
/// zero-based indices; the grid extent is inferred from the names.
/// `grid-image` layout: one image of U x V row-major tiles; `grid` must be given.
inline ViewGrid load_view_grid(const fs::path& path, LightFieldLayout layout,
                               std::optional<AngularSize> grid = std::nullopt) {
  if (layout == LightFieldLayout::view_directory) {
    if (!fs::is_directory(path)) throw DataError("'" + path.string() + "' is not a directory");
    static const std::regex kName(R"(view_(\d+)_(\d+)\.(png|ppm))");
    std::map<std::pair<std::size_t, std::size_t>, fs::path> files;
    std::size_t max_u = 0, max_v = 0;
    for (const auto& entry : fs::directory_iterator(path)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (!std::regex_match(name, m, kName)) continue;
      const std::size_t u = std::stoul(m[1]), v = std::stoul(m[2]);
      files[{u, v}] = entry.path();
      max_u = std::max(max_u, u);
      max_v = std::max(max_v, v);
    }
    if (files.empty()) throw DataError("no view_{u}_{v} images in '" + path.string() + "'");
    const AngularSize ang{max_u + 1, max_v + 1};
    if (grid && !(*grid == ang))
      throw DataError("view directory grid does not match the requested grid");
    std::vector<Image> views;
    views.reserve(ang.u * ang.v);
    for (std::size_t u = 0; u < ang.u; ++u)
      for (std::size_t v = 0; v < ang.v; ++v) {
        auto it = files.find({u, v});
        if (it == files.end())
          throw DataError("missing view file view_" + std::to_string(u) + "_" +
                          std::to_string(v));
        views.push_back(read_image(it->second));
      }
    ViewGrid out{ang, std::move(views)};
    out.validate();
    return out;
  }

  if (!grid) throw UsageError("grid-image layout requires the angular grid size");
  const Image mosaic = read_image(path);
  if (grid->u == 0 || grid->v == 0 || mosaic.height() % grid->u != 0 ||
      mosaic.width() % grid->v != 0)
    throw DataError("grid image size is not a multiple of the angular grid");
  const std::size_t h = mosaic.height() / grid->u, w = mosaic.width() / grid->v;
  std::vector<Image> views;
  for (std::size_t u = 0; u < grid->u; ++u)
    for (std::size_t v = 0; v < grid->v; ++v) views.push_back(crop_image(mosaic, u * h, v * w, h, w));
  return ViewGrid{*grid, std::move(views)};
}

/// Loads a light field; the grid must have odd angular dimensions.
inline LightField load_light_field(const fs::path& path, LightFieldLayout layout,
                                   std::optional<AngularSize> grid = std::nullopt) {
  ViewGrid g = load_view_grid(path, layout, grid);
  if (g.angular.u % 2 == 0 || g.angular.v % 2 == 0)
    throw DataError("even angular dimension " + std::to_string(g.angular.u) + "x" +
                    std::to_string(g.angular.v));
  return LightField(g.angular, std::move(g.views));
}

inline std::string view_file_name(std::size_t u, std::size_t v, const std::string& ext = ".png") {
  return "view_" + std::to_string(u) + "_" + std::to_string(v) + ext;
}

/// Writes a light field in either layout (PNG encoding).
inline void save_light_field(const LightField& lf, const fs::path& path, LightFieldLayout layout) {
  if (layout == LightFieldLayout::view_directory) {
    fs::create_directories(path);
    for (std::size_t u = 0; u < lf.angular().u; ++u)
      for (std::size_t v = 0; v < lf.angular().v; ++v)
        write_image(path / view_file_name(u, v), lf.view(u, v));
    return;
  }
  const std::size_t h = lf.height(), w = lf.width();
  Image mosaic(h * lf.angular().u, w * lf.angular().v);
  for (std::size_t u = 0; u < lf.angular().u; ++u)
    for (std::size_t v = 0; v < lf.angular().v; ++v) {
      const Image& view = lf.view(u, v);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          for (std::size_t c = 0; c < 3; ++c) mosaic.at(u * h + y, v * w + x, c) = view.at(y, x, c);
    }
  write_image(path, mosaic);
}

}  // namespace lfz
