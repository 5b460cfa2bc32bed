#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lfz/autodiff/gradient_suite.hpp"
#include "lfz/core/image_io.hpp"
#include "lfz/core/view_order.hpp"
#include "lfz/objectives/gradient_suite.hpp"
#include "lfz/objectives/metrics.hpp"
#include "lfz/pipeline/container.hpp"
#include "lfz/pipeline/pipeline.hpp"
#include "lfz/trainer/trainer.hpp"

namespace lfz::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Raised when a self-check inside a subcommand fails (gradient suite,
/// timing assertion).
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline AngularSize parse_grid(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("");
    std::size_t a = 0, b = 0;
    const std::size_t u = std::stoul(s.substr(0, x), &a), v = std::stoul(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) throw std::invalid_argument("");
    return {u, v};
  } catch (const std::logic_error&) {
    throw UsageError("angular grid must look like UxV, got '" + s + "'");
  }
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw UsageError("not a number list: '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

inline bool is_container(const fs::path& p) { return p.extension() == ".lfz"; }

inline LightField load_lf(const fs::path& path, const std::string& grid) {
  if (!fs::exists(path)) throw DataError("no such file or directory: " + path.string());
  const LightFieldLayout layout = detect_layout(path);
  std::optional<AngularSize> g;
  if (!grid.empty()) g = parse_grid(grid);
  return load_light_field(path, layout, g);
}

inline nets::Models<float> baseline_models(std::size_t views) {
  nets::Models<float> m(nets::HanceConfig::desk(), nets::DepthConfig::desk(views), 0);
  zero_disparity_stub(m.depth);
  return m;
}

inline nets::Models<float> load_models(const std::string& weights, std::size_t views) {
  if (weights.empty()) return baseline_models(views);
  return nets::load_weights<float>(fs::path(weights));
}

/// A light field from either a view directory / grid image or an .lfz
/// container decoded with `weights` (replicated center when none given).
inline LightField load_any(const fs::path& path, const std::string& grid, const std::string& weights) {
  if (!is_container(path)) return load_lf(path, grid);
  const LfzContainer c = load_container(path);
  auto m = load_models(weights, c.angular.u * c.angular.v);
  return decompress(c, m);
}

inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LFZ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v < 1) throw std::invalid_argument("");
      n = static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw UsageError("LFZ_THREADS must be a positive integer");
    }
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Bar chart of one metric across light fields, drawn as a static image:
/// one bar per light field on a white canvas, scaled to [0, max].
inline Image bar_chart(const std::vector<double>& values) {
  const std::size_t bar = 24, gap = 8, margin = 16, height = 160;
  const std::size_t w = 2 * margin + values.size() * (bar + gap);
  Image img(height + 2 * margin, w, 1.0f);
  double top = 0;
  for (double v : values)
    if (std::isfinite(v)) top = std::max(top, v);
  for (std::size_t x = margin - 2; x < w - margin / 2; ++x)
    for (int c = 0; c < 3; ++c) img.at(height + margin, x, c) = 0.0f;
  for (std::size_t y = margin / 2; y <= height + margin; ++y)
    for (int c = 0; c < 3; ++c) img.at(y, margin - 2, c) = 0.0f;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const bool inf = std::isinf(v) && v > 0;
    const double frac = inf ? 1.0 : (top > 0 && std::isfinite(v) ? std::clamp(v / top, 0.0, 1.0) : 0.0);
    const std::size_t len = static_cast<std::size_t>(std::lround(frac * height));
    const std::size_t x0 = margin + i * (bar + gap) + gap / 2;
    const float rgb[3] = {inf ? 0.85f : 0.2f, inf ? 0.4f : 0.4f, inf ? 0.2f : 0.8f};
    for (std::size_t y = height + margin - len; y < height + margin; ++y)
      for (std::size_t x = x0; x < x0 + bar; ++x)
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = rgb[c];
  }
  return img;
}

inline void write_plots(const std::vector<MetricRecord>& recs, const fs::path& report) {
  auto series = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(get(r));
    return v;
  };
  const fs::path dir = report.parent_path();
  const std::string stem = report.stem().string();
  auto out = [&](const std::string& metric) { return dir / (stem + "_" + metric + ".png"); };
  write_image(out("mssim"), bar_chart(series([](const MetricRecord& r) { return r.mssim; })));
  write_image(out("mpsnr"), bar_chart(series([](const MetricRecord& r) { return r.mpsnr; })));
  write_image(out("bpp"), bar_chart(series([](const MetricRecord& r) { return r.bpp; })));
  write_image(out("dof_psnr"), bar_chart(series([](const MetricRecord& r) { return r.dof_psnr; })));
}

struct EvalJob {
  fs::path gt, in;
  MetricRecord record;
  std::exception_ptr error;
};

inline void run_eval_job(EvalJob& job, const std::string& grid, const std::string& weights, const EvalOptions& base) {
  EvalOptions opt = base;
  opt.id = job.gt.filename().string();
  const LightField gt = load_lf(job.gt, grid);
  if (!is_container(job.in)) {
    const LightField rec = load_lf(job.in, grid);
    job.record = score(gt, rec, 0, opt);
    job.record.bpp = std::nan("");
    return;
  }
  const LfzContainer c = load_container(job.in);
  const auto t0 = std::chrono::steady_clock::now();
  auto models = load_models(weights, c.angular.u * c.angular.v);
  const double load = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  job.record = evaluate(gt, c, models, opt);
  job.record.model_load_seconds = load;
}

inline void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  for (const auto& l : lines) f << l << '\n';
  if (!f) throw DataError("write failed for " + path.string());
}

}  // namespace detail

/// Runs the command line `args` (args[0] is the program name). Output goes
/// to `out`, diagnostics to `err` prefixed with "E<code>:".
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Light-field compression: JPEG center view plus learned depth warping", "lfz"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  // compress
  std::string c_in, c_out, c_grid, c_chroma = "420";
  int c_quality = 50;
  auto* compress_cmd = app.add_subcommand("compress", "Store the JPEG-coded center view and light-field dimensions");
  compress_cmd->add_option("--in", c_in, "Input light field (view directory or grid image)")->required();
  compress_cmd->add_option("--out", c_out, "Output .lfz container")->required();
  compress_cmd->add_option("--quality", c_quality, "JPEG quality 1..100")->capture_default_str();
  compress_cmd->add_option("--chroma", c_chroma, "Chroma subsampling: 420 or 444")->capture_default_str();
  compress_cmd->add_option("--grid", c_grid, "Angular grid UxV (grid-image input only)");

  // decompress
  std::string d_in, d_out, d_weights, d_layout = "dir", d_depth_out;
  auto* decompress_cmd = app.add_subcommand("decompress", "Reconstruct every view from an .lfz container");
  decompress_cmd->add_option("--in", d_in, "Input .lfz container")->required();
  decompress_cmd->add_option("--out", d_out, "Output directory (or grid image with --layout grid)")->required();
  decompress_cmd->add_option("--weights", d_weights, "Trained network weights (.lfw); omitted = replicate center");
  decompress_cmd->add_option("--layout", d_layout, "Output layout: dir or grid")->capture_default_str();
  decompress_cmd->add_option("--depth-out", d_depth_out, "Also write the center-view disparity as a grey PNG");

  // eval
  std::vector<std::string> e_gt, e_in;
  std::string e_weights, e_alphas = "0.15,1.5", e_report, e_grid;
  bool e_skip_timing = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score reconstructions against ground truth and time both directions");
  eval_cmd->add_option("--gt", e_gt, "Ground-truth light field (repeatable)")->required();
  eval_cmd->add_option("--in", e_in, "Matching .lfz container or reconstructed light field (repeatable)")->required();
  eval_cmd->add_option("--weights", e_weights, "Trained network weights (.lfw); omitted = replicate center");
  eval_cmd->add_option("--alphas", e_alphas, "Comma-separated refocus parameters")->capture_default_str();
  eval_cmd->add_option("--report", e_report, "Report file: one JSON line per light field; plots written beside it");
  eval_cmd->add_option("--grid", e_grid, "Angular grid UxV (grid-image inputs only)");
  eval_cmd->add_flag("--skip-timing-check", e_skip_timing, "Do not fail when compress is not faster than decompress");

  // refocus / dof
  std::string r_in, r_out, r_weights, r_grid;
  double r_alpha = 0;
  auto* refocus_cmd = app.add_subcommand("refocus", "Shift-and-add refocused image");
  refocus_cmd->add_option("--in", r_in, "Light field or .lfz container")->required();
  refocus_cmd->add_option("--alpha", r_alpha, "Refocus parameter (pixels per unit angular offset)")->required();
  refocus_cmd->add_option("--out", r_out, "Output image (.png or .ppm)")->required();
  refocus_cmd->add_option("--weights", r_weights, "Network weights when --in is a container");
  refocus_cmd->add_option("--grid", r_grid, "Angular grid UxV (grid-image input only)");

  std::string f_in, f_out, f_weights, f_grid;
  auto* dof_cmd = app.add_subcommand("dof", "Depth-of-field image (mean of all views)");
  dof_cmd->add_option("--in", f_in, "Light field or .lfz container")->required();
  dof_cmd->add_option("--out", f_out, "Output image (.png or .ppm)")->required();
  dof_cmd->add_option("--weights", f_weights, "Network weights when --in is a container");
  dof_cmd->add_option("--grid", f_grid, "Angular grid UxV (grid-image input only)");

  // pseudoseq
  std::string p_in, p_out, p_order = "raster", p_weights, p_grid;
  auto* pseudo_cmd = app.add_subcommand("pseudoseq", "Write views as numbered frames for an external video encoder");
  pseudo_cmd->add_option("--in", p_in, "Light field or .lfz container")->required();
  pseudo_cmd->add_option("--out", p_out, "Output directory for frame_NNN.png")->required();
  pseudo_cmd->add_option("--order", p_order, "Frame order: raster or spiral")->capture_default_str();
  pseudo_cmd->add_option("--weights", p_weights, "Network weights when --in is a container");
  pseudo_cmd->add_option("--grid", p_grid, "Angular grid UxV (grid-image input only)");

  // train
  std::string t_phase = "joint", t_log, t_checkpoint, t_weights_out, t_init, t_resume;
  std::uint64_t t_seed = 7;
  std::size_t t_steps = 200, t_scenes = 0;
  std::optional<std::size_t> t_batch;
  auto* train_cmd = app.add_subcommand("train", "Desk-scale training on synthetic scenes");
  train_cmd->add_option("--phase", t_phase, "hance_pretrain, depth_pretrain, joint or finetune_fullres")
      ->capture_default_str();
  train_cmd->add_option("--seed", t_seed, "Seed for weights, scenes and batches")->capture_default_str();
  train_cmd->add_option("--steps", t_steps, "Optimizer steps")->capture_default_str();
  train_cmd->add_option("--batch", t_batch, "Batch size (default 4)");
  train_cmd->add_option("--scenes", t_scenes, "Number of synthetic scenes (default 16)");
  train_cmd->add_option("--log", t_log, "Training log, one JSON line per step (default stdout)");
  train_cmd->add_option("--checkpoint", t_checkpoint, "Checkpoint written at every epoch end");
  train_cmd->add_option("--resume", t_resume, "Continue from a checkpoint");
  train_cmd->add_option("--init-weights", t_init, "Start from these network weights (.lfw)");
  train_cmd->add_option("--weights-out", t_weights_out, "Write the trained weights (.lfw)");

  // gradcheck
  double g_tol = 1e-4, g_composite = 1e-3;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every op and loss");
  grad_cmd->add_option("--tol", g_tol, "Per-op relative tolerance")->capture_default_str();
  grad_cmd->add_option("--composite-tol", g_composite, "Composite relative tolerance")->capture_default_str();

  // info
  std::string i_in, i_grid;
  auto* info_cmd = app.add_subcommand("info", "Describe a container, weight archive or light field");
  info_cmd->add_option("--in", i_in, "File or directory")->required();
  info_cmd->add_option("--grid", i_grid, "Angular grid UxV (grid-image input only)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("lfz");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "E1: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*compress_cmd) {
      jpeg::JpegConfig cfg;
      cfg.quality = c_quality;
      cfg.chroma_subsampling = jpeg::parse_subsampling(c_chroma);
      cfg.validate();
      const LightField lf = detail::load_lf(c_in, c_grid);
      const LfzContainer c = compress(lf, cfg);
      save_container(c, c_out);
      out << "wrote " << c_out << ": " << serialize(c).size() << " bytes, bpp " << container_bpp(c) << "\n";
    } else if (*decompress_cmd) {
      LightFieldLayout layout;
      if (d_layout == "dir") layout = LightFieldLayout::view_directory;
      else if (d_layout == "grid") layout = LightFieldLayout::grid_image;
      else throw UsageError("--layout must be dir or grid");
      const LfzContainer c = load_container(d_in);
      auto models = detail::load_models(d_weights, c.angular.u * c.angular.v);
      const Reconstruction r = reconstruct(c, models);
      save_light_field(r.lf, d_out, layout);
      if (!d_depth_out.empty()) {
        const std::size_t k = r.depth.center_linear();
        const double dmax = std::max(1e-6, static_cast<double>(r.depth.max_abs()));
        Image d(r.depth.height(), r.depth.width());
        for (std::size_t y = 0; y < d.height(); ++y)
          for (std::size_t x = 0; x < d.width(); ++x)
            for (int ch = 0; ch < 3; ++ch) d.at(y, x, ch) = static_cast<float>(0.5 + 0.5 * r.depth.at(k, y, x) / dmax);
        write_image(d_depth_out, d);
      }
      out << "wrote " << r.lf.view_count() << " views of " << r.lf.height() << "x" << r.lf.width() << " to "
          << d_out << "\n";
    } else if (*eval_cmd) {
      if (e_gt.size() != e_in.size()) throw UsageError("--gt and --in must be given the same number of times");
      EvalOptions opt;
      opt.alphas = detail::parse_list(e_alphas);
      std::vector<detail::EvalJob> jobs(e_gt.size());
      for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i] = {e_gt[i], e_in[i], {}, nullptr};
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
          try {
            detail::run_eval_job(jobs[i], e_grid, e_weights, opt);
          } catch (...) {
            jobs[i].error = std::current_exception();
          }
        }
      };
      const std::size_t n = detail::worker_count(jobs.size());
      if (n == 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      std::vector<std::string> lines;
      std::vector<MetricRecord> recs;
      std::vector<std::string> slow;
      for (auto& j : jobs) {
        if (j.error) std::rethrow_exception(j.error);
        lines.push_back(to_json_line(j.record));
        recs.push_back(j.record);
        if (j.record.compress_seconds && !(*j.record.compress_seconds < *j.record.decompress_seconds))
          slow.push_back(j.record.id);
      }
      for (const auto& l : lines) out << l << "\n";
      if (!e_report.empty()) {
        detail::write_lines(e_report, lines);
        detail::write_plots(recs, e_report);
      }
      if (!slow.empty() && !e_skip_timing)
        throw CheckFailed("compress was not faster than decompress for " + slow.front());
    } else if (*refocus_cmd) {
      if (!std::isfinite(r_alpha)) throw UsageError("--alpha must be finite");
      write_image(r_out, refocus(detail::load_any(r_in, r_grid, r_weights), r_alpha));
    } else if (*dof_cmd) {
      write_image(f_out, dof(detail::load_any(f_in, f_grid, f_weights)));
    } else if (*pseudo_cmd) {
      const ViewOrdering order = parse_view_ordering(p_order);
      const LightField lf = detail::load_any(p_in, p_grid, p_weights);
      const auto frames = pseudo_sequence(lf, order);
      fs::create_directories(p_out);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        std::ostringstream name;
        name << "frame_" << std::setw(3) << std::setfill('0') << i << ".png";
        write_image(fs::path(p_out) / name.str(), frames[i]);
      }
      out << "wrote " << frames.size() << " frames to " << p_out << "\n";
    } else if (*train_cmd) {
      TrainConfig cfg = TrainConfig::desk(parse_phase(t_phase), t_steps);
      cfg.seed = t_seed;
      if (t_batch) cfg.batch = *t_batch;
      if (t_scenes) cfg.scenes.count = t_scenes;
      std::optional<Trainer> trainer;
      if (!t_init.empty()) {
        auto m = nets::load_weights<float>(fs::path(t_init));
        cfg.hance = m.hance.config();
        cfg.depth = m.depth.config();
        trainer.emplace(cfg, std::move(m));
      } else {
        trainer.emplace(cfg);
      }
      if (!t_resume.empty()) trainer->load_checkpoint(t_resume);
      std::ofstream log_file;
      if (!t_log.empty()) {
        log_file.open(t_log, trainer->step() > 0 ? std::ios::app : std::ios::trunc);
        if (!log_file) throw DataError("cannot write " + t_log);
      }
      std::ostream& log = t_log.empty() ? out : log_file;
      std::optional<fs::path> ckpt;
      if (!t_checkpoint.empty()) ckpt = t_checkpoint;
      trainer->run([&](const StepRecord& r) { log << to_json_line(r) << "\n" << std::flush; }, ckpt);
      if (!t_weights_out.empty()) nets::save_weights(trainer->models()).save(t_weights_out);
    } else if (*grad_cmd) {
      auto results = ad::op_gradient_suite(g_tol);
      const auto losses = loss_gradient_suite(g_tol, g_composite);
      results.insert(results.end(), losses.begin(), losses.end());
      std::size_t failed = 0;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_rel_error=" << r.max_rel_error
            << " tol=" << r.tolerance << " coords=" << r.coordinates << "\n";
        failed += !r.passed;
      }
      out << results.size() - failed << "/" << results.size() << " gradient checks passed\n";
      if (failed) throw CheckFailed(std::to_string(failed) + " gradient checks failed");
    } else if (*info_cmd) {
      const fs::path p = i_in;
      if (detail::is_container(p)) {
        const LfzContainer c = load_container(p);
        out << "container v" << int(c.version) << " angular " << c.angular.u << "x" << c.angular.v << " spatial "
            << c.spatial.height << "x" << c.spatial.width << " quality " << int(c.quality) << " payload "
            << c.payload.size() << " bytes bpp " << container_bpp(c) << "\n";
      } else if (p.extension() == ".lfw") {
        auto m = nets::load_weights<float>(p);
        out << "weights: JPEG-Hance " << m.hance.parameter_count() << " parameters, Depth-Net "
            << m.depth.parameter_count() << " parameters, " << m.depth.config().views << " views\n";
      } else {
        const LightField lf = detail::load_lf(p, i_grid);
        out << "light field angular " << lf.angular().u << "x" << lf.angular().v << " spatial " << lf.height()
            << "x" << lf.width() << "\n";
      }
    }
  } catch (const UsageError& e) {
    err << "E1: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "E2: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "E3: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}

}  // namespace lfz::cli
