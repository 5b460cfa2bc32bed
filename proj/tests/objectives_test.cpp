#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "lfz/core/image_io.hpp"
#include "lfz/objectives/gradient_suite.hpp"
#include "lfz/objectives/objectives.hpp"
#include "lfz/synthesis/synthesis.hpp"
#include "support/planar_scene.hpp"
#include "support/test_images.hpp"

using namespace lfz;
using ad::constant;
using ad::Shape;
using ad::Tensor;
using ad::Var;

namespace {

Var<double> lf_var(const LightField& lf) { return constant(light_field_to_tensor<double>(lf)); }

Var<double> center_var(const LightField& lf) { return constant(image_to_tensor<double>(center_view(lf))); }

Var<double> disp_var(std::size_t views, std::size_t h, std::size_t w, double d) {
  return constant(Tensor<double>(Shape{1, h, w, views}, d));
}

LightField constant_lf(std::size_t n, std::size_t h, std::size_t w, float value) {
  return LightField({n, n}, std::vector<Image>(n * n, Image(h, w, value)));
}

Image checkerboard(std::size_t h, std::size_t w, std::size_t cell) {
  Image img(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = ((y / cell + x / cell) % 2) ? 1.0f : 0.0f;
  return img;
}

Image inverted(const Image& img) {
  Image out = img;
  for (float& v : out.data()) v = 1.0f - v;
  return out;
}

}  // namespace

TEST(LossWeights, DefaultsAndValidation) {
  const LossWeights w;
  EXPECT_EQ(w.alpha, 2.0);
  EXPECT_EQ(w.alpha1, 100.0);
  EXPECT_EQ(w.alpha2, 0.02);
  EXPECT_EQ(w.alpha3, 10.0);
  EXPECT_EQ(w.beta, 0.15);
  EXPECT_NO_THROW(w.validate());
  EXPECT_THROW((LossWeights{2, -1, 0.02, 10, 0.15}.validate()), UsageError);
  EXPECT_THROW((LossWeights{2, 100, 0.02, 10, 1.5}.validate()), UsageError);
}

TEST(Ssim, IdenticalImagesGiveExactlyOne) {
  const Image img = lfz::testing::noise_image(20, 17, 3);
  EXPECT_EQ(ssim(img, img), 1.0);
  const Image pattern = lfz::testing::test_pattern(64, 48);
  EXPECT_EQ(ssim(pattern, pattern), 1.0);
}

TEST(Ssim, InvertedCheckerboardIsNegative) {
  const Image cb = checkerboard(32, 32, 4);
  EXPECT_LT(ssim(cb, inverted(cb)), 0.0);
}

TEST(Ssim, MatchesReferenceImplementationOnNaturalPair) {
  const Image a = read_image(lfz::testing::data_dir() / "ssim_a.png");
  const Image b = read_image(lfz::testing::data_dir() / "ssim_b.png");
  std::ifstream ref(lfz::testing::data_dir() / "ssim_reference.txt");
  double expected = 0;
  ASSERT_TRUE(ref >> expected);
  EXPECT_NEAR(ssim(a, b), expected, 1e-6);
}

TEST(Ssim, ShapeMismatchIsAnError) {
  EXPECT_THROW(ssim(Image(8, 8), Image(8, 9)), DataError);
  EXPECT_THROW(ssim(constant(Tensor<double>(Shape{1, 8, 8, 3})), constant(Tensor<double>(Shape{1, 8, 8, 1}))),
               UsageError);
}

TEST(Ssim, SmallImagesUseShrunkenWindow) {
  const SsimWindow win;
  EXPECT_EQ(win.effective_size(64, 64), 11u);
  EXPECT_EQ(win.effective_size(8, 20), 7u);
  EXPECT_EQ(win.effective_size(5, 5), 5u);
  const Image a = lfz::testing::noise_image(6, 6, 1);
  const double s = ssim(a, lfz::testing::noise_image(6, 6, 2));
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_LT(s, 1.0);
}

TEST(Psi, TrivialValues) {
  const auto a = constant(image_to_tensor<double>(lfz::testing::noise_image(16, 16, 4)));
  EXPECT_EQ(psi(a, a).item(), 0.0);
  const auto zeros = constant(Tensor<double>(Shape{1, 12, 12, 3}, 0.0));
  const auto ones = constant(Tensor<double>(Shape{1, 12, 12, 3}, 1.0));
  EXPECT_DOUBLE_EQ(psi(zeros, ones, 0.0).item(), 1.0);
}

TEST(Psi, PureSsimReducesToDssim) {
  const Image x = lfz::testing::noise_image(24, 24, 5), y = lfz::testing::noise_image(24, 24, 6);
  const auto a = constant(image_to_tensor<double>(x)), b = constant(image_to_tensor<double>(y));
  EXPECT_NEAR(psi(a, b, 1.0).item(), (1.0 - ssim(x, y)) / 2.0, 1e-12);
}

TEST(Psi, SymmetricForL1) {
  const auto a = constant(image_to_tensor<double>(lfz::testing::noise_image(16, 16, 7)));
  const auto b = constant(image_to_tensor<double>(lfz::testing::noise_image(16, 16, 8)));
  EXPECT_EQ(psi(a, b, 0.0).item(), psi(b, a, 0.0).item());
  EXPECT_NEAR(psi(a, b).item(), psi(b, a).item(), 1e-12);
}

TEST(Photometric, VanishesForTrivialLightFields) {
  const synth::ViewGeometry g({3, 3});
  const LightField flat = constant_lf(3, 16, 16, 0.4f);
  const auto v = lf_var(flat);
  EXPECT_EQ(loss_photometric(v, v, disp_var(9, 16, 16, 0.0), g).item(), 0.0);

  const Image c = lfz::testing::test_pattern(16, 16);
  const auto same = lf_var(LightField({3, 3}, std::vector<Image>(9, c)));
  const auto pred = synth::warp_views(constant(image_to_tensor<double>(c)), disp_var(9, 16, 16, 0.0), g);
  EXPECT_EQ(loss_photometric(pred, same, disp_var(9, 16, 16, 0.0), g).item(), 0.0);
}

TEST(Photometric, OracleDisparityBeatsPerturbedDisparity) {
  const LightField gt = lfz::testing::analytic_planar_lf(5, 48, 48, 0.75);
  const synth::ViewGeometry g({5, 5});
  const auto views = lf_var(gt);
  const auto center = center_var(gt);
  auto loss_at = [&](double d) {
    const auto disp = disp_var(25, 48, 48, d);
    return loss_photometric(synth::warp_views(center, disp, g), views, disp, g).item();
  };
  EXPECT_LT(loss_at(0.75), loss_at(1.25));
  EXPECT_LT(loss_at(0.75), loss_at(0.25));
}

TEST(Photometric, AngularMismatchIsAnError) {
  const synth::ViewGeometry g({3, 3});
  const auto v = lf_var(constant_lf(3, 12, 12, 0.5f));
  EXPECT_THROW(loss_photometric(v, v, disp_var(25, 12, 12, 0.0), g), UsageError);
}

TEST(Defocus, OracleDisparityOnPlanarSceneIsNearZero) {
  const LightField gt = lfz::testing::analytic_planar_lf(5, 48, 48, 0.5);
  const synth::ViewGeometry g({5, 5});
  const double l = loss_defocus(lf_var(gt), disp_var(25, 48, 48, 0.5), g).item();
  EXPECT_GE(l, 0.0);
  EXPECT_LE(l, 1e-3);
}

TEST(Defocus, TrivialCases) {
  const synth::ViewGeometry g({3, 3});
  const Image c = lfz::testing::test_pattern(16, 16);
  EXPECT_EQ(loss_defocus(lf_var(LightField({3, 3}, std::vector<Image>(9, c))), disp_var(9, 16, 16, 0.0), g).item(),
            0.0);
  Tensor<double> d(Shape{1, 16, 16, 9});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double& x : d.data()) x = u(rng);
  EXPECT_EQ(loss_defocus(lf_var(constant_lf(3, 16, 16, 0.3f)), constant(d), g).item(), 0.0);
}

TEST(Consistency, TrivialCases) {
  const synth::ViewGeometry g({3, 3});
  EXPECT_EQ(loss_consistency(disp_var(9, 12, 12, 1.7), g).item(), 0.0);
  EXPECT_EQ(loss_consistency(disp_var(9, 12, 12, 0.0), g).item(), 0.0);
  Tensor<double> d(Shape{1, 12, 12, 9}, 0.0);
  for (std::size_t p = 0; p < 144; ++p) d[p * 9 + 2] = 1.0;
  EXPECT_DOUBLE_EQ(loss_consistency(constant(d), g).item(), 1.0);
}

TEST(DofLoss, TrivialCases) {
  const synth::ViewGeometry g({3, 3});
  const auto v = lf_var(lfz::testing::analytic_planar_lf(3, 16, 16, 1.0));
  EXPECT_EQ(loss_dof(v, v, g).item(), 0.0);
  const auto lo = lf_var(constant_lf(3, 16, 16, 0.0f)), hi = lf_var(constant_lf(3, 16, 16, 1.0f));
  EXPECT_DOUBLE_EQ(loss_dof(lo, hi, g, 0.0).item(), 1.0);
  EXPECT_THROW(loss_dof(lo, lf_var(constant_lf(3, 16, 12, 1.0f)), g), UsageError);
}

TEST(DofLoss, OracleReconstructionOfPlanarScene) {
  const LightField gt = lfz::testing::analytic_planar_lf(5, 48, 48, 0.5);
  const synth::ViewGeometry g({5, 5});
  const auto pred = synth::warp_views(center_var(gt), disp_var(25, 48, 48, 0.5), g);
  EXPECT_LE(loss_dof(pred, lf_var(gt), g).item(), 1e-3);
}

TEST(TotalLoss, FixedCombination) {
  const LossWeights w;
  EXPECT_EQ(loss_total({0, 0, 0, 0}, w), 0.0);
  EXPECT_NEAR(loss_total({1, 1, 1, 1}, w), 112.02, 1e-12);
  EXPECT_THROW(loss_total({1, std::nan(""), 1, 1}, w), DataError);
  EXPECT_THROW(loss_total({1, 1, INFINITY, 1}, w), DataError);
  const auto one = constant(Tensor<double>::scalar(1.0));
  EXPECT_NEAR(loss_total(one, one, one, one, w).item(), 112.02, 1e-12);
  const auto bad = constant(Tensor<double>::scalar(std::nan("")));
  EXPECT_THROW(loss_total(one, bad, one, one, w), DataError);
}

TEST(TotalLoss, ComputeLossesIsNonNegative) {
  const LightField gt = lfz::testing::analytic_planar_lf(3, 16, 16, 1.0);
  const synth::ViewGeometry g({3, 3});
  const auto terms = compute_losses(center_var(gt), disp_var(9, 16, 16, 0.3), lf_var(gt), g, LossWeights{});
  for (const auto* t : {&terms.photometric, &terms.defocus, &terms.consistency, &terms.dof})
    EXPECT_GE(t->item(), 0.0);
  EXPECT_NEAR(terms.total.item(),
              2 * terms.photometric.item() + 100 * terms.defocus.item() + 0.02 * terms.consistency.item() +
                  10 * terms.dof.item(),
              1e-9);
}

TEST(LossGradients, FiniteDifferenceSuite) {
  const auto results = loss_gradient_suite();
  EXPECT_GE(results.size(), 20u);
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed) << r.name << " max rel error " << r.max_rel_error << " tol " << r.tolerance;
    EXPECT_GE(r.coordinates, 50u) << r.name;
  }
}

TEST(Metrics, MssimAndMpsnr) {
  const LightField lf = lfz::testing::analytic_planar_lf(3, 24, 24, 1.0);
  EXPECT_EQ(mssim(lf, lf), 1.0);
  const auto self = mpsnr_detail(lf, lf);
  EXPECT_TRUE(std::isinf(self.value));
  EXPECT_EQ(self.infinite_views, 9u);

  // Every sample moved by one 8-bit step: MSE = 1/255^2 in every view.
  std::vector<Image> shifted;
  for (const Image& v : lf.views()) {
    Image s(v.height(), v.width());
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = (i % 2 ? 0.25f : 0.75f);
    shifted.push_back(s);
  }
  const LightField a({3, 3}, shifted);
  std::vector<Image> moved = shifted;
  for (Image& m : moved)
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] += (i % 3 ? 1.0f : -1.0f) / 255.0f;
  EXPECT_NEAR(mpsnr(a, LightField({3, 3}, moved)), 20 * std::log10(255.0), 1e-4);
}

TEST(Metrics, SingleViewAndPermutationInvariance) {
  const Image x = lfz::testing::test_pattern(24, 24, 1), y = lfz::testing::test_pattern(24, 24, 2);
  EXPECT_EQ(mssim(LightField({1, 1}, {x}), LightField({1, 1}, {y})), ssim(x, y));

  std::vector<Image> a, b;
  for (unsigned i = 0; i < 9; ++i) {
    a.push_back(lfz::testing::noise_image(16, 16, i));
    b.push_back(lfz::testing::noise_image(16, 16, 100 + i));
  }
  const double m1 = mssim(LightField({3, 3}, a), LightField({3, 3}, b));
  const double p1 = mpsnr(LightField({3, 3}, a), LightField({3, 3}, b));
  std::reverse(a.begin(), a.end());
  std::reverse(b.begin(), b.end());
  EXPECT_NEAR(mssim(LightField({3, 3}, a), LightField({3, 3}, b)), m1, 1e-12);
  EXPECT_NEAR(mpsnr(LightField({3, 3}, a), LightField({3, 3}, b)), p1, 1e-12);
}

TEST(Metrics, InfiniteViewsAreExcludedFromMean) {
  std::vector<Image> a(9, Image(8, 8, 0.5f)), b = a;
  b[4] = Image(8, 8, 0.6f);
  const auto r = mpsnr_detail(LightField({3, 3}, a), LightField({3, 3}, b));
  EXPECT_EQ(r.infinite_views, 8u);
  EXPECT_NEAR(r.value, 20.0, 1e-5);
}

TEST(Metrics, DimensionMismatchIsAnError) {
  EXPECT_THROW(mssim(constant_lf(3, 8, 8, 0.5f), constant_lf(3, 8, 9, 0.5f)), DataError);
  EXPECT_THROW(mpsnr(constant_lf(3, 8, 8, 0.5f), constant_lf(1, 8, 8, 0.5f)), DataError);
}

TEST(Bpp, Arithmetic) {
  EXPECT_NEAR(bpp(5830, {7, 7}, {375, 540}), 0.00470, 0.000005);
  EXPECT_EQ(bpp(0, {7, 7}, {375, 540}), 0.0);
  EXPECT_DOUBLE_EQ(bpp(11660, {7, 7}, {375, 540}), 2 * bpp(5830, {7, 7}, {375, 540}));
  EXPECT_THROW(bpp(10, {0, 7}, {375, 540}), UsageError);
}

TEST(MetricRecord, JsonLineRoundTripWithInfinity) {
  MetricRecord r{"scene_01", 0.91, kInfinity, 0.0047, 0.99, 41.5, {{0.15, 0.97, 38.0}, {1.5, 0.8, kInfinity}}};
  r.compress_seconds = 0.01;
  r.decompress_seconds = 1.25;
  const std::string line = to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"mpsnr\":\"inf\""), std::string::npos);
  const MetricRecord back = parse_metric_record(line);
  EXPECT_EQ(back.id, "scene_01");
  EXPECT_EQ(back.mssim, 0.91);
  EXPECT_TRUE(std::isinf(back.mpsnr));
  EXPECT_EQ(back.decompress_seconds, 1.25);
  EXPECT_EQ(back.compress_seconds, 0.01);
  EXPECT_FALSE(back.model_load_seconds.has_value());
  ASSERT_EQ(back.refocus.size(), 2u);
  EXPECT_EQ(back.refocus[0].alpha, 0.15);
  EXPECT_TRUE(std::isinf(back.refocus[1].psnr));
  EXPECT_THROW(parse_metric_record("{\"id\":1}"), DataError);
  EXPECT_THROW(parse_metric_record("not json"), DataError);
}
