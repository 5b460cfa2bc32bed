// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "lfz/autodiff/gradient_suite.hpp"
#include "lfz/cli/run.hpp"
#include "lfz/core/image_io.hpp"
#include "lfz/objectives/gradient_suite.hpp"
#include "lfz/objectives/metrics.hpp"
#include "lfz/pipeline/pipeline.hpp"
#include "lfz/synthesis/synthesis.hpp"
#include "lfz/trainer/trainer.hpp"
#include "support/libjpeg_reference.hpp"
#include "support/test_images.hpp"

using namespace lfz;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += !o.pass;
  std::printf("%s  %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Annex K example tables, natural (row-major) order.
constexpr std::array<int, 64> kLuma{16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                                    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                                    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                                    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr std::array<int, 64> kChroma{17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
                                      24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
                                      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
                                      99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// Zigzag position k -> natural index, by walking the anti-diagonals.
std::array<int, 64> zigzag() {
  std::array<int, 64> z{};
  int k = 0;
  for (int s = 0; s < 15; ++s)
    for (int i = 0; i <= s; ++i) {
      const int r = s % 2 ? i : s - i, c = s - r;
      if (r < 8 && c < 8) z[k++] = r * 8 + c;
    }
  return z;
}

std::vector<std::array<int, 64>> stream_tables(const jpeg::JpegBytes& b) {
  const auto z = zigzag();
  std::vector<std::array<int, 64>> out;
  for (std::size_t i = 2; i + 4 < b.size();) {
    const int m = b[i + 1];
    const std::size_t len = (std::size_t(b[i + 2]) << 8) | b[i + 3];
    if (m == 0xDB)
      for (std::size_t p = i + 4; p + 65 <= i + 2 + len; p += 65) {
        std::array<int, 64> t{};
        for (int k = 0; k < 64; ++k) t[z[k]] = b[p + 1 + k];
        out.push_back(t);
      }
    if (m == 0xDA) break;
    i += 2 + len;
  }
  return out;
}

// Brute-force integer shift: view(y,x) = tex(y + du*d, x + dv*d).
bool warp_matches_oracle(const Image& tex, int d, int du, int dv) {
  const int h = int(tex.height()), w = int(tex.width());
  const Image out = warp_center_to_view(tex, std::vector<float>(h * w, float(d)), {double(du), double(dv)});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int sy = y + du * d, sx = x + dv * d;
      if (sy < 0 || sx < 0 || sy >= h || sx >= w) continue;
      for (int c = 0; c < 3; ++c)
        if (out.at(y, x, c) != tex.at(sy, sx, c)) return false;
    }
  return true;
}

nets::Models<float> clone(const nets::Models<float>& m) {
  return nets::load_weights<float>(nets::WeightArchive::parse(nets::save_weights(m).serialize()));
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "lfz");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
  const fs::path tmp = fs::temp_directory_path() / ("lfz_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  report(1, "warp oracle", [] {
    const auto t0 = Clock::now();
    const Image tex = lfz::testing::noise_image(32, 32, 11);
    int bad = 0;
    for (int d = -2; d <= 2; ++d)
      for (int du = -3; du <= 3; ++du)
        for (int dv = -3; dv <= 3; ++dv) bad += !warp_matches_oracle(tex, d, du, dv);
    const double t = since(t0);
    return Outcome{bad == 0 && t < 5.0, fmt("%d/245 mismatching warps, %.2f s (limit 5 s)", bad, t)};
  });

  report(2, "gradient suite", [] {
    const auto t0 = Clock::now();
    auto results = ad::op_gradient_suite(1e-4);
    const auto losses = loss_gradient_suite(1e-4, 1e-3);
    results.insert(results.end(), losses.begin(), losses.end());
    std::size_t failed = 0;
    double worst = 0;
    std::string first;
    for (const auto& r : results) {
      if (!r.passed && first.empty()) first = " first failure: " + r.name;
      failed += !r.passed;
      worst = std::max(worst, r.max_rel_error / r.tolerance);
    }
    const double t = since(t0);
    return Outcome{failed == 0 && t < 120.0,
                   fmt("%zu/%zu checks pass, worst error %.3g of tolerance, %.1f s (limit 120 s)%s",
                       results.size() - failed, results.size(), worst, t, first.c_str())};
  });

  report(3, "SSIM fidelity", [] {
    const Image a = read_image(lfz::testing::data_dir() / "ssim_a.png");
    const Image b = read_image(lfz::testing::data_dir() / "ssim_b.png");
    std::ifstream f(lfz::testing::data_dir() / "ssim_reference.txt");
    double expected = 0;
    if (!(f >> expected)) return Outcome{false, "missing reference value"};
    const double got = ssim(a, b), self = ssim(a, a);
    return Outcome{std::abs(got - expected) <= 1e-6 && self == 1.0,
                   fmt("|ssim - reference| = %.2e (limit 1e-6), ssim(I,I) = %.17g", std::abs(got - expected), self)};
  });

  report(4, "JPEG conformance", [] {
    std::vector<Image> imgs{read_image(lfz::testing::data_dir() / "natural_center.png")};
    for (unsigned s = 1; s <= 4; ++s) imgs.push_back(lfz::testing::test_pattern(17 * s + 3, 23 * s + 1, s));
    imgs.push_back(lfz::testing::noise_image(40, 56, 3));
    int worst = 0, streams = 0;
    for (const Image& img : imgs)
      for (auto chroma : {jpeg::ChromaSubsampling::s420, jpeg::ChromaSubsampling::s444})
        for (int q : {10, 50, 90}) {
          const auto bytes = jpeg::encode(img, jpeg::JpegConfig{q, chroma, 0});
          lfz::testing::RgbBuffer ref;
          if (!lfz::testing::reference_decode(bytes, ref)) return Outcome{false, "reference decoder rejected a stream"};
          const Image ours = jpeg::decode(bytes);
          for (std::size_t i = 0; i < ours.size(); ++i)
            worst = std::max(worst, std::abs(int(to_u8(ours.data()[i])) - int(ref.rgb[i])));
          ++streams;
        }
    const auto tables = stream_tables(jpeg::encode(imgs[1], jpeg::JpegConfig{50}));
    const bool base = tables.size() == 2 && tables[0] == kLuma && tables[1] == kChroma;
    return Outcome{worst <= 1 && base, fmt("%d streams, max deviation %d (limit 1), q=50 tables %s", streams, worst,
                                           base ? "equal the base tables" : "differ from the base tables")};
  });

  report(5, "rate check", [] {
    const Image center = read_image(lfz::testing::data_dir() / "natural_center.png");
    const LfzContainer c = compress(LightField({7, 7}, std::vector<Image>(49, center)), jpeg::JpegConfig{50});
    const double rate = container_bpp(c);
    return Outcome{rate >= 0.002 && rate <= 0.010,
                   fmt("7x7x%zux%zu at q=50: %zu payload bytes, bpp %.5f (bracket [0.002, 0.010])", center.height(),
                       center.width(), c.payload.size(), rate)};
  });

  // Criterion 6 trains the networks that 7 and 9 evaluate.
  TrainConfig cfg = TrainConfig::desk(Phase::joint, 200);
  std::optional<Trainer> trainer;
  report(6, "desk-scale learning", [&] {
    const auto t0 = Clock::now();
    trainer.emplace(cfg);
    const auto log = trainer->run();
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      first += log[i].total / 20;
      last += log[log.size() - 20 + i].total / 20;
    }
    double mae = 0;
    for (std::size_t i = 0; i < trainer->scenes().size(); ++i) {
      const auto& s = trainer->scenes()[i];
      const Image ce = enhance(trainer->models().hance, trainer->decoded_center(i));
      mae += constant_region_mae(estimate_depth(trainer->models().depth, ce, s.lf.angular()), s.depth);
    }
    mae /= double(trainer->scenes().size());
    const double drop = 1.0 - last / first, t = since(t0);
    return Outcome{drop >= 0.5 && mae < 0.5 && t < 900.0,
                   fmt("smoothed total %.3f -> %.3f (%.0f%% reduction, need 50%%), constant-region MAE %.3f px "
                       "(limit 0.5), %.0f s (limit 900 s)",
                       first, last, 100 * drop, mae, t)};
  });

  report(7, "end-to-end quality ordering", [&] {
    if (!trainer) return Outcome{false, "no trained networks"};
    nets::Models<float> trained = clone(trainer->models());
    nets::Models<float> stub = clone(trainer->models());
    zero_disparity_stub(stub.depth);
    double ours = 0, base = 0, worst_gt = kInfinity, worst_rec = kInfinity;
    std::size_t integer = 0;
    for (const auto& s : trainer->scenes()) {
      const LfzContainer c = compress(s.lf, jpeg::JpegConfig{cfg.quality});
      const LightField rec = decompress(c, trained);
      ours += mssim(s.lf, rec);
      base += mssim(s.lf, decompress(c, stub));
      if (!s.single_plane()) continue;
      ++integer;
      const double a = s.layout.background_disparity;
      const std::size_t m = static_cast<std::size_t>(std::ceil(3 * std::abs(a)));
      const std::size_t h = s.lf.height() - 2 * m, w = s.lf.width() - 2 * m;
      auto interior = [&](const Image& img) { return crop_image(img, m, m, h, w); };
      worst_gt = std::min(worst_gt, psnr(interior(refocus(s.lf, a)), interior(center_view(s.lf))));
      worst_rec = std::min(worst_rec, psnr(interior(refocus(rec, a)), interior(center_view(rec))));
    }
    const double n = double(trainer->scenes().size());
    ours /= n;
    base /= n;
    return Outcome{ours > base && worst_gt >= 40.0,
                   fmt("MSSIM trained %.5f vs replicate-center %.5f; refocus at true disparity on %zu integer scenes: "
                       "min interior PSNR %.1f dB (need 40), reconstructed LF %.1f dB (info)",
                       ours, base, integer, worst_gt, worst_rec)};
  });

  report(8, "parameter counts", [] {
    const double h = double(nets::JpegHance<float>(nets::HanceConfig::full(), 1).parameter_count());
    const double d = double(nets::DepthNet<float>(nets::DepthConfig::full(), 1).parameter_count());
    const double eh = h / 202435.0 - 1, ed = d / 38.2e6 - 1;
    return Outcome{std::abs(eh) <= 0.10 && std::abs(ed) <= 0.15,
                   fmt("JPEG-Hance %.0f (%+.2f%%, limit 10%%), Depth-Net %.0f (%+.2f%%, limit 15%%)", h, 100 * eh, d,
                       100 * ed)};
  });

  report(9, "timing harness", [&] {
    if (!trainer) return Outcome{false, "no trained networks"};
    const fs::path weights = tmp / "desk.lfw", report_path = tmp / "eval.txt";
    nets::save_weights(trainer->models()).save(weights);
    std::vector<std::string> args{"eval", "--weights", weights.string(), "--report", report_path.string()};
    for (std::size_t i = 0; i < 3; ++i) {
      const fs::path gt = tmp / ("scene" + std::to_string(i)), lfz = tmp / ("scene" + std::to_string(i) + ".lfz");
      save_light_field(trainer->scenes()[i].lf, gt, LightFieldLayout::view_directory);
      if (run_cli({"compress", "--in", gt.string(), "--out", lfz.string()}) != 0) return Outcome{false, "compress failed"};
      args.insert(args.end(), {"--gt", gt.string(), "--in", lfz.string()});
    }
    const int code = run_cli(args);
    std::ifstream f(report_path);
    std::string line, times;
    bool ordered = true;
    std::size_t n = 0;
    while (std::getline(f, line)) {
      const MetricRecord r = parse_metric_record(line);
      if (!r.compress_seconds || !r.decompress_seconds) return Outcome{false, "report lacks timings"};
      ordered = ordered && *r.compress_seconds < *r.decompress_seconds;
      times += fmt(" %.4f/%.4f", *r.compress_seconds, *r.decompress_seconds);
      ++n;
    }
    const bool plots = fs::exists(tmp / "eval_mssim.png") && fs::exists(tmp / "eval_mpsnr.png");
    return Outcome{code == 0 && n == 3 && ordered && plots,
                   fmt("eval exit %d, %zu records, compress/decompress s:%s, plots %s", code, n, times.c_str(),
                       plots ? "written" : "missing")};
  });

  report(10, "determinism", [&] {
    const fs::path a = tmp / "train_a.jsonl", b = tmp / "train_b.jsonl";
    for (const auto& log : {a, b})
      if (run_cli({"train", "--seed", "7", "--steps", "50", "--log", log.string()}) != 0)
        return Outcome{false, "train failed"};
    const std::string la = slurp(a), lb = slurp(b);
    const std::size_t lines = static_cast<std::size_t>(std::count(la.begin(), la.end(), '\n'));
    const fs::path gt = tmp / "det_scene";
    save_light_field(make_scenes(cfg.scenes, 99).front().lf, gt, LightFieldLayout::view_directory);
    const fs::path c1 = tmp / "det1.lfz", c2 = tmp / "det2.lfz";
    for (const auto& c : {c1, c2})
      if (run_cli({"compress", "--in", gt.string(), "--out", c.string()}) != 0) return Outcome{false, "compress failed"};
    const bool logs = la == lb && lines == 50, bytes = slurp(c1) == slurp(c2) && !slurp(c1).empty();
    return Outcome{logs && bytes, fmt("train logs %s (%zu lines each), .lfz bytes %s", la == lb ? "identical" : "differ",
                                      lines, bytes ? "identical" : "differ")};
  });

  std::error_code ec;
  fs::remove_all(tmp, ec);
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
