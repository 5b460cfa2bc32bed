#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include "lfz/core/image_io.hpp"
#include "lfz/core/light_field.hpp"
#include "lfz/core/view_order.hpp"
#include "support/test_images.hpp"

namespace fs = std::filesystem;
using namespace lfz;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("lfz_core_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// 8-bit exact random image (every sample is k/255).
Image quantized_image(std::size_t h, std::size_t w, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  Image img(h, w);
  for (float& v : img.data()) v = from_u8(static_cast<std::uint8_t>(d(rng)));
  return img;
}

LightField labelled_lf(std::size_t U, std::size_t V, std::size_t h, std::size_t w) {
  std::vector<Image> views;
  for (std::size_t i = 0; i < U * V; ++i) views.push_back(quantized_image(h, w, 100 + static_cast<unsigned>(i)));
  return LightField({U, V}, std::move(views));
}

}  // namespace

TEST(Image, QuantizationRoundsHalfAwayFromZero) {
  EXPECT_EQ(to_u8(0.0f), 0);
  EXPECT_EQ(to_u8(1.0f), 255);
  EXPECT_EQ(to_u8(127.5f / 255.0f), 128);
  EXPECT_EQ(to_u8(-0.3f), 0);
  EXPECT_EQ(to_u8(2.0f), 255);
}

TEST(LightField, RejectsEvenOrInconsistentGrids) {
  EXPECT_THROW(LightField({2, 3}, std::vector<Image>(6, Image(2, 2))), DataError);
  std::vector<Image> mixed(9, Image(4, 4));
  mixed[3] = Image(4, 5);
  EXPECT_THROW(LightField({3, 3}, mixed), DataError);
  std::vector<Image> bad(1, Image(2, 2));
  bad[0].at(0, 0, 0) = 1.5f;
  EXPECT_THROW(LightField({1, 1}, bad), DataError);
}

TEST(LightField, CenterViewIndices) {
  const LightField lf = labelled_lf(7, 7, 2, 3);
  EXPECT_EQ(lf.center_index(), (ViewIndex{3, 3}));
  EXPECT_EQ(center_view(lf), lf.view(3, 3));

  const LightField single = labelled_lf(1, 1, 2, 2);
  EXPECT_EQ(center_view(single), single.view(0, 0));

  std::vector<Image> views(9, Image(3, 3, 0.5f));
  views[4] = Image(3, 3, 0.0f);
  const LightField zero_center({3, 3}, views);
  const Image c = center_view(zero_center);
  EXPECT_TRUE(std::all_of(c.data().begin(), c.data().end(), [](float v) { return v == 0.0f; }));
}

TEST(LoadLightField, ViewDirectoryOfFortyNineViews) {
  TempDir dir;
  const Image view = quantized_image(375, 540, 3);
  for (std::size_t u = 0; u < 7; ++u)
    for (std::size_t v = 0; v < 7; ++v) write_image(dir.path() / view_file_name(u, v), view);
  const LightField lf = load_light_field(dir.path(), LightFieldLayout::view_directory);
  EXPECT_EQ(lf.angular(), (AngularSize{7, 7}));
  EXPECT_EQ(lf.height(), 375u);
  EXPECT_EQ(lf.width(), 540u);
  EXPECT_EQ(lf.view(6, 6), view);
}

TEST(LoadLightField, SingleViewDirectory) {
  TempDir dir;
  const Image view = quantized_image(5, 4, 9);
  write_image(dir.path() / "view_0_0.png", view);
  const LightField lf = load_light_field(dir.path(), LightFieldLayout::view_directory);
  EXPECT_EQ(lf.angular(), (AngularSize{1, 1}));
  EXPECT_EQ(center_view(lf), view);
}

TEST(LoadLightField, ErrorPaths) {
  TempDir dir;
  const Image a = quantized_image(4, 4, 1);
  // Missing view_1_1 in an otherwise 3x3 grid.
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t v = 0; v < 3; ++v)
      if (!(u == 1 && v == 1)) write_image(dir.path() / view_file_name(u, v), a);
  EXPECT_THROW(load_light_field(dir.path(), LightFieldLayout::view_directory), DataError);

  // Inconsistent dimensions.
  write_image(dir.path() / view_file_name(1, 1), quantized_image(4, 5, 2));
  EXPECT_THROW(load_light_field(dir.path(), LightFieldLayout::view_directory), DataError);

  // Even angular dimension.
  TempDir even;
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t v = 0; v < 3; ++v) write_image(even.path() / view_file_name(u, v), a);
  EXPECT_THROW(load_light_field(even.path(), LightFieldLayout::view_directory), DataError);

  // Unreadable image.
  TempDir junk;
  std::ofstream(junk.path() / "view_0_0.png") << "not an image";
  EXPECT_THROW(load_light_field(junk.path(), LightFieldLayout::view_directory), DataError);
}

TEST(LoadLightField, GridImageCroppedToCenterWindow) {
  TempDir dir;
  // 14x14 grid of 6x7 tiles, each tile labelled by its angular index.
  const std::size_t h = 6, w = 7;
  Image mosaic(14 * h, 14 * w);
  for (std::size_t u = 0; u < 14; ++u)
    for (std::size_t v = 0; v < 14; ++v)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          mosaic.at(u * h + y, v * w + x, 0) = from_u8(static_cast<std::uint8_t>(u * 14 + v));
          mosaic.at(u * h + y, v * w + x, 1) = from_u8(static_cast<std::uint8_t>(y * 16 + x));
        }
  write_image(dir.path() / "grid.png", mosaic);

  const ViewGrid grid =
      load_view_grid(dir.path() / "grid.png", LightFieldLayout::grid_image, AngularSize{14, 14});
  EXPECT_THROW(load_light_field(dir.path() / "grid.png", LightFieldLayout::grid_image,
                                AngularSize{14, 14}),
               DataError);
  const LightField lf = crop(grid, {7, 7}, {5, 6});
  EXPECT_EQ(lf.center_index(), (ViewIndex{3, 3}));
  // Angular offset (14-7)/2 = 3, so cropped (0,0) is source (3,3); center is source (6,6).
  EXPECT_EQ(to_u8(lf.view(0, 0).at(0, 0, 0)), 3 * 14 + 3);
  EXPECT_EQ(to_u8(center_view(lf).at(0, 0, 0)), 6 * 14 + 6);
  // Spatial offsets floor((6-5)/2)=0, floor((7-6)/2)=0.
  EXPECT_EQ(to_u8(lf.view(0, 0).at(1, 1, 1)), 1 * 16 + 1);
}

TEST(Crop, LytroSizesAndIdentity) {
  // 376x541 -> 375x540 uses floor offsets (0, 0).
  ViewGrid g{{2, 2}, std::vector<Image>(4, quantized_image(376, 541, 5))};
  const LightField c = crop(g, {1, 1}, {375, 540});
  EXPECT_EQ(c.height(), 375u);
  EXPECT_EQ(c.width(), 540u);
  EXPECT_EQ(c.view(0, 0), crop_image(g.view(0, 0), 0, 0, 375, 540));

  const LightField lf = labelled_lf(7, 7, 8, 8);
  EXPECT_EQ(crop(lf, {7, 7}, {8, 8}), lf);
  const LightField spatial_only = crop(lf, {7, 7}, {5, 6});
  for (std::size_t i = 0; i < 49; ++i)
    EXPECT_EQ(spatial_only.view_linear(i), crop_image(lf.view_linear(i), 1, 1, 5, 6));

  EXPECT_THROW(crop(lf, {6, 7}, {8, 8}), DataError);
  EXPECT_THROW(crop(lf, {9, 7}, {8, 8}), DataError);
  EXPECT_THROW(crop(lf, {7, 7}, {9, 8}), DataError);
}

TEST(Crop, NestedWindowsEqualSingleCrop) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const LightField lf = labelled_lf(7, 5, 9 + trial % 4, 10 + trial % 3);
    std::uniform_int_distribution<std::size_t> pick(0, 100);
    const AngularSize mid{1 + 2 * (pick(rng) % 4), 1 + 2 * (pick(rng) % 3)};
    const SpatialSize mid_s{1 + pick(rng) % lf.height(), 1 + pick(rng) % lf.width()};
    const AngularSize in{1 + 2 * (pick(rng) % ((mid.u + 1) / 2)), 1 + 2 * (pick(rng) % ((mid.v + 1) / 2))};
    const SpatialSize in_s{1 + pick(rng) % mid_s.height, 1 + pick(rng) % mid_s.width};
    // Floor offsets add up unless both size differences along an axis are odd.
    const bool aligned = ((lf.height() - mid_s.height) % 2 == 0 || (mid_s.height - in_s.height) % 2 == 0) &&
                         ((lf.width() - mid_s.width) % 2 == 0 || (mid_s.width - in_s.width) % 2 == 0);
    if (!aligned) continue;
    EXPECT_EQ(crop(crop(lf, mid, mid_s), in, in_s), crop(lf, in, in_s));
  }
}

TEST(ViewOrder, RasterAndSpiralExamples) {
  const auto raster = view_sequence({3, 3}, ViewOrdering::raster);
  const std::vector<ViewIndex> want_raster{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1},
                                           {1, 2}, {2, 0}, {2, 1}, {2, 2}};
  EXPECT_EQ(raster, want_raster);

  const auto spiral = view_sequence({3, 3}, ViewOrdering::spiral);
  const std::vector<ViewIndex> want_spiral{{1, 1}, {1, 2}, {2, 2}, {2, 1}, {2, 0},
                                           {1, 0}, {0, 0}, {0, 1}, {0, 2}};
  EXPECT_EQ(spiral, want_spiral);

  for (auto order : {ViewOrdering::raster, ViewOrdering::spiral})
    EXPECT_EQ(view_sequence({1, 1}, order), (std::vector<ViewIndex>{{0, 0}}));
}

TEST(ViewOrder, AlwaysAPermutation) {
  for (std::size_t U = 1; U <= 9; U += 2)
    for (std::size_t V = 1; V <= 9; V += 2)
      for (auto order : {ViewOrdering::raster, ViewOrdering::spiral}) {
        const auto seq = view_sequence({U, V}, order);
        ASSERT_EQ(seq.size(), U * V);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& i : seq) {
          ASSERT_LT(i.u, U);
          ASSERT_LT(i.v, V);
          seen.insert({i.u, i.v});
        }
        EXPECT_EQ(seen.size(), U * V) << U << "x" << V;
      }
}

TEST(ViewOrder, PseudoSequenceFollowsOrder) {
  const LightField lf = labelled_lf(3, 3, 2, 2);
  const auto frames = pseudo_sequence(lf, ViewOrdering::spiral);
  ASSERT_EQ(frames.size(), 9u);
  EXPECT_EQ(frames[0], lf.view(1, 1));
  EXPECT_EQ(frames[1], lf.view(1, 2));
  EXPECT_EQ(frames[8], lf.view(0, 2));
}

TEST(LightFieldIo, RoundTripsBitExactlyInBothLayouts) {
  TempDir dir;
  const LightField lf = labelled_lf(3, 5, 6, 7);
  save_light_field(lf, dir.path() / "views", LightFieldLayout::view_directory);
  EXPECT_EQ(load_light_field(dir.path() / "views", LightFieldLayout::view_directory), lf);
  save_light_field(lf, dir.path() / "grid.png", LightFieldLayout::grid_image);
  EXPECT_EQ(load_light_field(dir.path() / "grid.png", LightFieldLayout::grid_image, AngularSize{3, 5}), lf);

  write_image(dir.path() / "one.ppm", lf.view(0, 0));
  EXPECT_EQ(read_image(dir.path() / "one.ppm"), lf.view(0, 0));
}
