#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "lfz/nets/models.hpp"
#include "support/test_images.hpp"

using namespace lfz;
using namespace lfz::nets;
using ad::Shape;
using ad::Tensor;
using ad::Var;

namespace {

Var<float> pattern_input(std::size_t n, std::size_t h, std::size_t w) {
  Tensor<float> t(Shape{n, h, w, 3});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t c = 0; c < 3; ++c)
          t.at(b, y, x, c) = static_cast<float>((y * 7 + x * 3 + c * 5 + b * 11) % 17) / 16.0f;
  return ad::constant(t);
}

std::uint64_t fnv1a(const Tensor<float>& t) {
  std::uint64_t h = 1469598103934665603ull;
  for (float v : t.data()) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      h ^= (u >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  }
  return h;
}

void randomize(std::vector<NamedVar<float>>& entries, unsigned seed, double amp) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  for (auto& e : entries)
    if (e.trainable)
      for (float& v : e.var.mutable_value().data()) v += static_cast<float>(d(rng));
}

}  // namespace

TEST(ParameterCount, JpegHanceNearTarget) {
  const JpegHance<float> net(HanceConfig::full(), 1);
  const double n = static_cast<double>(net.parameter_count());
  EXPECT_NEAR(n / 202435.0, 1.0, 0.10) << n;
}

TEST(ParameterCount, DepthNetNearTarget) {
  const DepthNet<float> net(DepthConfig::full(), 1);
  const double n = static_cast<double>(net.parameter_count());
  EXPECT_NEAR(n / 38.2e6, 1.0, 0.15) << n;
}

TEST(JpegHance, FreshNetworkIsIdentity) {
  JpegHance<float> net(HanceConfig::desk(), 3);
  const Image img = lfz::testing::test_pattern(24, 40, 2);
  Tensor<float> t(Shape{1, 24, 40, 3}, std::vector<float>(img.data().begin(), img.data().end()));
  for (bool training : {false, true}) {
    net.set_training(training);
    const auto out = net.forward(ad::constant(t));
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_NEAR(out.value()[i], t[i], 1e-6f);
  }
}

TEST(JpegHance, FullyConvolutionalShapes) {
  JpegHance<float> full(HanceConfig::full(), 1);
  EXPECT_EQ(full.forward(pattern_input(1, 128, 128)).shape(), (Shape{1, 128, 128, 3}));
  JpegHance<float> desk(HanceConfig::desk(), 1);
  EXPECT_EQ(desk.forward(pattern_input(1, 375, 540)).shape(), (Shape{1, 375, 540, 3}));
  EXPECT_EQ(desk.forward(pattern_input(2, 34, 20)).shape(), (Shape{2, 34, 20, 3}));
}

TEST(JpegHance, OutputStaysInUnitRange) {
  JpegHance<float> net(HanceConfig::desk(), 5);
  randomize(net.entries(), 5, 2.0);
  const auto out = net.forward(pattern_input(2, 16, 16));
  for (float v : out.value().data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(JpegHance, RejectsWrongChannelCount) {
  JpegHance<float> net(HanceConfig::desk(), 1);
  EXPECT_THROW(net.forward(ad::constant(Tensor<float>(Shape{1, 8, 8, 1}))), UsageError);
}

TEST(DepthNet, OutputGeometry) {
  const DepthNet<float> net(DepthConfig::desk(), 2);
  EXPECT_EQ(net.forward(pattern_input(1, 384, 544)).shape(), (Shape{1, 384, 544, 49}));
  EXPECT_EQ(net.forward(pattern_input(1, 32, 48)).shape(), (Shape{1, 32, 48, 49}));
  EXPECT_EQ(net.forward(pattern_input(1, 64, 48)).shape(), (Shape{1, 64, 48, 49}));
  const DepthNet<float> nine(DepthConfig::desk(9), 2);
  EXPECT_EQ(nine.forward(pattern_input(2, 16, 32)).shape(), (Shape{2, 16, 32, 9}));
}

TEST(DepthNet, RejectsIndivisibleInput) {
  const DepthNet<float> net(DepthConfig::desk(), 2);
  EXPECT_THROW(net.forward(pattern_input(1, 375, 540)), UsageError);
  EXPECT_THROW(net.forward(pattern_input(1, 24, 32)), UsageError);
}

TEST(DepthNet, DisparityBoundedByDMax) {
  DepthNet<float> net(DepthConfig::desk(), 4);
  randomize(net.entries(), 4, 3.0);
  const auto d = net.forward(pattern_input(1, 32, 32));
  float peak = 0;
  for (float v : d.value().data()) {
    EXPECT_LE(std::abs(v), 4.0f);
    peak = std::max(peak, std::abs(v));
  }
  EXPECT_GT(peak, 2.0f);  // the bound is actually reached toward, not trivially met
}

TEST(DepthNet, MidGrayInputGivesConstantMaps) {
  // Mid-gray is zero in the network domain, which agrees with the zero
  // padding, so every map is spatially constant for any kernels.
  DepthNet<float> net(DepthConfig::desk(), 6);
  for (auto& e : net.entries())
    if (e.name.ends_with("/kernel")) {
      std::mt19937 rng(7);
      std::uniform_real_distribution<float> d(-0.5f, 0.5f);
      for (float& v : e.var.mutable_value().data()) v += d(rng);
    }
  const auto d = net.forward(ad::constant(Tensor<float>(Shape{1, 32, 32, 3}, 0.5f)));
  for (std::size_t v = 0; v < 49; ++v)
    for (std::size_t p = 0; p < 32 * 32; ++p) ASSERT_NEAR(d.value()[p * 49 + v], d.value()[v], 1e-5f);
}

TEST(WeightArchive, RoundTripIsBitwise) {
  Models<float> m(HanceConfig::desk(), DepthConfig::desk(9), 11);
  randomize(m.hance.entries(), 12, 0.05);
  const auto bytes = save_weights(m).serialize();
  const Models<float> back = load_weights<float>(WeightArchive::parse(bytes));
  ASSERT_EQ(back.hance.entries().size(), m.hance.entries().size());
  for (std::size_t i = 0; i < m.hance.entries().size(); ++i)
    EXPECT_EQ(back.hance.entries()[i].var.value(), m.hance.entries()[i].var.value());
  for (std::size_t i = 0; i < m.depth.entries().size(); ++i)
    EXPECT_EQ(back.depth.entries()[i].var.value(), m.depth.entries()[i].var.value());
  EXPECT_EQ(back.depth.config(), m.depth.config());
  EXPECT_EQ(back.hance.config(), m.hance.config());

  Models<float> copy = load_weights<float>(WeightArchive::parse(bytes));
  const auto x = pattern_input(1, 32, 32);
  EXPECT_EQ(copy.hance.forward(x).value(), m.hance.forward(x).value());
  EXPECT_EQ(copy.depth.forward(x).value(), m.depth.forward(x).value());
  EXPECT_EQ(save_weights(copy).serialize(), bytes);
}

TEST(WeightArchive, LayoutIsLittleEndian) {
  WeightArchive a;
  a.add({"ab", {2}, {1.0f, -2.0f}});
  const std::vector<std::uint8_t> expect{'L', 'F', 'W', '1', 1, 0, 0, 0, 2, 0, 0, 0, 'a', 'b', 1, 0, 0, 0,
                                         2,   0,   0,   0,   0, 0, 0x80, 0x3F, 0, 0, 0, 0xC0};
  EXPECT_EQ(a.serialize(), expect);
}

TEST(WeightArchive, ErrorsNameTheProblem) {
  Models<float> m(HanceConfig::desk(), DepthConfig::desk(9), 1);
  const WeightArchive full = save_weights(m);

  WeightArchive missing;
  for (const auto& t : full.tensors())
    if (t.name != "hance/block1/bn2/gamma") missing.add(t);
  try {
    load_weights<float>(missing);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("hance/block1/bn2/gamma"), std::string::npos) << e.what();
  }

  WeightArchive wrong_dims;
  for (auto t : full.tensors()) {
    if (t.name == "depth/head/bias") {
      t.dims = {3, 3};
      t.data.resize(9);
    }
    wrong_dims.add(t);
  }
  EXPECT_THROW(load_weights<float>(wrong_dims), DataError);

  auto bytes = full.serialize();
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(WeightArchive::parse(bytes), DataError);
  bytes = full.serialize();
  bytes[0] = 'X';
  EXPECT_THROW(WeightArchive::parse(bytes), DataError);
  EXPECT_THROW(WeightArchive::parse(std::vector<std::uint8_t>{'L', 'F'}), DataError);

  WeightArchive dup;
  dup.add({"x", {1}, {1.0f}});
  EXPECT_THROW(dup.add({"x", {1}, {2.0f}}), DataError);
}

TEST(WeightArchive, CommittedFixtureReproducesForwardHash) {
  const auto dir = lfz::testing::data_dir();
  if (std::getenv("LFZ_REGENERATE_FIXTURES")) {
    Models<float> m(HanceConfig::desk(), DepthConfig::desk(9), 2024);
    randomize(m.hance.entries(), 2025, 0.05);
    save_weights(m).save(dir / "desk_weights.lfw");
    const auto x = pattern_input(1, 32, 32);
    std::ofstream(dir / "desk_weights.hash") << fnv1a(m.hance.forward(x).value()) << " "
                                             << fnv1a(m.depth.forward(x).value()) << "\n";
  }
  Models<float> m = load_weights<float>(dir / "desk_weights.lfw");
  std::uint64_t hance_hash = 0, depth_hash = 0;
  std::ifstream(dir / "desk_weights.hash") >> hance_hash >> depth_hash;
  const auto x = pattern_input(1, 32, 32);
  EXPECT_EQ(fnv1a(m.hance.forward(x).value()), hance_hash);
  EXPECT_EQ(fnv1a(m.depth.forward(x).value()), depth_hash);
}
