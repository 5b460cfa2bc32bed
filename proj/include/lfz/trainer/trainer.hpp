#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfz/jpeg/jpeg.hpp"
#include "lfz/nets/models.hpp"
#include "lfz/objectives/losses.hpp"
#include "lfz/pipeline/pipeline.hpp"
#include "lfz/synthesis/batched.hpp"
#include "lfz/trainer/augment.hpp"
#include "lfz/trainer/scenes.hpp"
#include "lfz/trainer/schedule.hpp"

namespace lfz {

enum class Phase { hance_pretrain, depth_pretrain, joint, finetune_fullres };

inline Phase parse_phase(const std::string& s) {
  if (s == "hance_pretrain") return Phase::hance_pretrain;
  if (s == "depth_pretrain") return Phase::depth_pretrain;
  if (s == "joint") return Phase::joint;
  if (s == "finetune_fullres") return Phase::finetune_fullres;
  throw UsageError("unknown training phase '" + s + "'");
}

inline std::string phase_name(Phase p) {
  switch (p) {
    case Phase::hance_pretrain: return "hance_pretrain";
    case Phase::depth_pretrain: return "depth_pretrain";
    case Phase::joint: return "joint";
    case Phase::finetune_fullres: return "finetune_fullres";
  }
  return "?";
}

struct TrainConfig {
  Phase phase = Phase::joint;
  std::size_t steps = 200;
  std::size_t steps_per_epoch = 20;
  std::size_t batch = 4;
  LrSchedule lr;
  std::size_t crop = 32;         // JPEG-Hance pretraining crops
  std::size_t crop_stride = 8;
  AugmentProbs augment = AugmentProbs::none();
  SceneSetConfig scenes;
  std::uint64_t seed = 7;
  int quality = 50;
  LossWeights weights;
  nets::HanceConfig hance = nets::HanceConfig::desk();
  nets::DepthConfig depth = nets::DepthConfig::desk(49);

  std::size_t epochs() const { return (steps + steps_per_epoch - 1) / steps_per_epoch; }

  /// Desk-scale settings for a phase, with learning rates sized to make
  /// progress in a few hundred steps. JPEG-Hance pretraining decays
  /// geometrically over the whole run; the joint phases decay to a floor.
  static TrainConfig desk(Phase phase, std::size_t steps = 200) {
    TrainConfig c;
    c.phase = phase;
    c.steps = steps;
    const std::size_t epochs = std::max<std::size_t>(1, c.epochs());
    switch (phase) {
      case Phase::hance_pretrain:
        c.lr = {1e-3, 1e-5, epochs, 0};
        c.scenes.count = 8;
        c.scenes.stripes = 0.3;
        break;
      case Phase::depth_pretrain:
        c.lr = LrSchedule::constant(1e-3, epochs);
        break;
      case Phase::joint:
        c.lr = {1e-3, 1e-5, epochs, std::min<std::size_t>(epochs / 4, 5)};
        break;
      case Phase::finetune_fullres:
        c.lr = {5e-4, 1e-5, epochs, std::min<std::size_t>(epochs / 4, 5)};
        c.scenes.height = 72;
        c.scenes.width = 88;
        c.augment = AugmentProbs::finetune();
        break;
    }
    return c;
  }

  void validate() const {
    if (steps_per_epoch == 0 || batch == 0) throw UsageError("steps per epoch and batch must be positive");
    lr.validate();
    augment.validate();
    weights.validate();
    hance.validate();
    if (depth.views != scenes.angular.u * scenes.angular.v)
      throw UsageError("Depth-Net view count does not match the scene angular grid");
    if (phase == Phase::hance_pretrain && (crop > scenes.height || crop > scenes.width))
      throw UsageError("crop larger than the training images");
  }
};

/// One line of the training log.
struct StepRecord {
  Phase phase = Phase::joint;
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0;
  double total = 0;
  double photometric = 0, defocus = 0, consistency = 0, dof = 0;  // depth phases
  double mse = 0;                                                // hance pretraining
};

inline std::string to_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["phase"] = phase_name(r.phase);
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  if (r.phase == Phase::hance_pretrain) {
    j["mse"] = r.mse;
  } else {
    j["photometric"] = r.photometric;
    j["defocus"] = r.defocus;
    j["consistency"] = r.consistency;
    j["dof"] = r.dof;
  }
  j["total"] = r.total;
  return j.dump();
}

/// Generator for everything random in step `step`: independent of how many
/// steps ran before, so resumed runs draw the same batches.
inline std::mt19937_64 step_rng(std::uint64_t seed, std::uint64_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), 0x4c465a31u};
  return std::mt19937_64(seq);
}

/// Desk-scale training loop over synthetic scenes. Single-threaded and fully
/// determined by the config and the initial weights.
class Trainer {
 public:
  Trainer(TrainConfig cfg, nets::Models<float> models)
      : cfg_(std::move(cfg)), models_(std::move(models)), geometry_(cfg_.scenes.angular) {
    cfg_.validate();
    if (models_.depth.config().views != geometry_.views())
      throw UsageError("Depth-Net view count does not match the scene angular grid");
    scenes_ = make_scenes(cfg_.scenes, cfg_.seed);
    jpeg_cache_.resize(scenes_.size());
    if (cfg_.phase == Phase::hance_pretrain)
      crops_ = crop_origins(cfg_.scenes.height, cfg_.scenes.width, cfg_.crop, cfg_.crop_stride);
    for (const auto& e : trainable_entries()) names_.push_back(e.name);
    std::vector<ad::Var<float>> params;
    for (const auto& e : trainable_entries()) params.push_back(e.var);
    adam_ = ad::Adam<float>(std::move(params));
  }

  /// Fresh desk networks seeded from the config seed.
  explicit Trainer(TrainConfig cfg)
      : Trainer(cfg, nets::Models<float>(cfg.hance, cfg.depth, cfg.seed)) {}

  const TrainConfig& config() const { return cfg_; }
  nets::Models<float>& models() { return models_; }
  const std::vector<SyntheticScene>& scenes() const { return scenes_; }
  const synth::ViewGeometry& geometry() const { return geometry_; }
  std::size_t step() const { return step_; }

  double lr_at(std::size_t step) const { return cfg_.lr.at_epoch(step / cfg_.steps_per_epoch); }

  /// Runs one optimizer step and returns its log record.
  StepRecord train_step() {
    StepRecord r;
    r.phase = cfg_.phase;
    r.step = step_;
    r.epoch = step_ / cfg_.steps_per_epoch;
    r.lr = lr_at(step_);
    auto rng = step_rng(cfg_.seed, step_);
    adam_.zero_grad();
    if (cfg_.phase == Phase::hance_pretrain) {
      const ad::Var<float> loss = hance_loss(rng);
      r.mse = r.total = loss.item();
      check_finite(r.total);
      loss.backward();
    } else {
      LossTerms<float> t;
      try {
        t = depth_losses(rng);
      } catch (const DataError& e) {
        throw DataError("training diverged at step " + std::to_string(step_) + " (" + e.what() + ")");
      }
      r.photometric = t.photometric.item();
      r.defocus = t.defocus.item();
      r.consistency = t.consistency.item();
      r.dof = t.dof.item();
      r.total = t.total.item();
      check_finite(r.total);
      t.total.backward();
    }
    adam_.step(r.lr);
    ++step_;
    return r;
  }

  /// Trains until `cfg.steps` optimizer steps have run in total. `on_step`
  /// sees every record; a checkpoint is written at each epoch end when
  /// `checkpoint` is set.
  std::vector<StepRecord> run(const std::function<void(const StepRecord&)>& on_step = {},
                              const std::optional<std::filesystem::path>& checkpoint = std::nullopt) {
    std::vector<StepRecord> log;
    while (step_ < cfg_.steps) {
      log.push_back(train_step());
      if (on_step) on_step(log.back());
      if (checkpoint && (step_ % cfg_.steps_per_epoch == 0 || step_ == cfg_.steps)) save_checkpoint(*checkpoint);
    }
    return log;
  }

  /// Weight archive followed by "LFO1" | u64 step | archive of Adam moments.
  std::vector<std::uint8_t> checkpoint_bytes() {
    std::vector<std::uint8_t> out = nets::save_weights(models_).serialize();
    out.insert(out.end(), {'L', 'F', 'O', '1'});
    nets::bytes::put_u64(out, step_);
    nets::WeightArchive moments;
    for (std::size_t k = 0; k < names_.size(); ++k) {
      moments.add(moment_tensor("m/" + names_[k], adam_.first_moments()[k]));
      moments.add(moment_tensor("v/" + names_[k], adam_.second_moments()[k]));
    }
    const auto mb = moments.serialize();
    out.insert(out.end(), mb.begin(), mb.end());
    return out;
  }

  void restore_checkpoint(const std::vector<std::uint8_t>& data) {
    std::size_t used = 0;
    const nets::WeightArchive weights = nets::WeightArchive::parse(data, &used);
    nets::restore(weights, models_.hance.entries());
    nets::restore(weights, models_.depth.entries());
    const std::span<const std::uint8_t> rest(data.data() + used, data.size() - used);
    nets::bytes::Reader r(rest, "checkpoint optimizer section");
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), "LFO1", 4) != 0) throw DataError("checkpoint lacks an optimizer section");
    const std::uint64_t step = r.u64();
    std::size_t mused = 0;
    const nets::WeightArchive moments = nets::WeightArchive::parse(rest.subspan(r.position()), &mused);
    if (r.position() + mused != rest.size()) throw DataError("trailing bytes after checkpoint");
    for (std::size_t k = 0; k < names_.size(); ++k) {
      load_moment(moments.get("m/" + names_[k]), adam_.first_moments()[k]);
      load_moment(moments.get("v/" + names_[k]), adam_.second_moments()[k]);
    }
    adam_.set_steps(step);
    step_ = static_cast<std::size_t>(step);
  }

  void save_checkpoint(const std::filesystem::path& path) { nets::bytes::write_file(path, checkpoint_bytes()); }
  void load_checkpoint(const std::filesystem::path& path) { restore_checkpoint(nets::bytes::read_file(path)); }

  /// The JPEG-decoded center view of scene `i` (unaugmented).
  const Image& decoded_center(std::size_t i) {
    if (!jpeg_cache_.at(i)) jpeg_cache_[i] = jpeg_roundtrip(center_view(scenes_[i].lf));
    return *jpeg_cache_[i];
  }

 private:
  std::vector<nets::NamedVar<float>> trainable_entries() {
    std::vector<nets::NamedVar<float>> out;
    auto take = [&](const std::vector<nets::NamedVar<float>>& es) {
      for (const auto& e : es)
        if (e.trainable) out.push_back(e);
    };
    if (cfg_.phase != Phase::depth_pretrain) take(models_.hance.entries());
    if (cfg_.phase != Phase::hance_pretrain) take(models_.depth.entries());
    return out;
  }

  Image jpeg_roundtrip(const Image& img) const {
    jpeg::JpegConfig jc;
    jc.quality = cfg_.quality;
    return jpeg::decode(jpeg::encode(img, jc));
  }

  void check_finite(double v) const {
    if (!std::isfinite(v))
      throw DataError("training diverged at step " + std::to_string(step_) + " (loss is " + std::to_string(v) + ")");
  }

  static nets::ArchiveTensor moment_tensor(const std::string& name, const ad::Tensor<float>& t) {
    nets::ArchiveTensor a{name, {}, {t.data().begin(), t.data().end()}};
    for (auto d : t.shape()) a.dims.push_back(static_cast<std::uint32_t>(d));
    return a;
  }

  static void load_moment(const nets::ArchiveTensor& a, ad::Tensor<float>& t) {
    if (a.data.size() != t.size()) throw DataError("optimizer moment '" + a.name + "' does not match the network");
    std::copy(a.data.begin(), a.data.end(), t.data().begin());
  }

  ad::Var<float> hance_loss(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick_scene(0, scenes_.size() - 1), pick_crop(0, crops_.size() - 1);
    std::vector<Image> inputs, targets;
    for (std::size_t b = 0; b < cfg_.batch; ++b) {
      const std::size_t s = pick_scene(rng);
      const auto [y, x] = crops_[pick_crop(rng)];
      const Augmentation a = draw_augmentation(cfg_.augment, rng);
      const Image gt = apply_augmentation(center_view(scenes_[s].lf), a);
      const Image cj = a.kind == AugmentKind::original ? decoded_center(s) : jpeg_roundtrip(gt);
      inputs.push_back(crop_image(cj, y, x, cfg_.crop, cfg_.crop));
      targets.push_back(crop_image(gt, y, x, cfg_.crop, cfg_.crop));
    }
    models_.hance.set_training(true);
    const auto out = models_.hance.forward(ad::constant(images_to_tensor<float>(pointers(inputs))));
    const auto target = ad::constant(images_to_tensor<float>(pointers(targets)));
    return ad::mean(ad::square(ad::sub(out, target)));
  }

  LossTerms<float> depth_losses(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick_scene(0, scenes_.size() - 1);
    std::vector<Image> centers;
    std::vector<Image> views;
    for (std::size_t b = 0; b < cfg_.batch; ++b) {
      const std::size_t s = pick_scene(rng);
      const Augmentation a = draw_augmentation(cfg_.augment, rng);
      const LightField lf = apply_augmentation(scenes_[s].lf, a);
      centers.push_back(a.kind == AugmentKind::original ? decoded_center(s) : jpeg_roundtrip(center_view(lf)));
      for (const Image& v : lf.views()) views.push_back(v);
    }
    const auto cj = ad::constant(images_to_tensor<float>(pointers(centers)));
    const auto gt = ad::constant(images_to_tensor<float>(pointers(views)));

    ad::Var<float> ce;
    if (cfg_.phase == Phase::depth_pretrain) {
      models_.hance.set_training(false);
      ad::NoGradGuard frozen;
      ce = models_.hance.forward(cj);
    } else {
      models_.hance.set_training(true);
      ce = models_.hance.forward(cj);
    }
    const std::size_t h = cfg_.scenes.height, w = cfg_.scenes.width;
    const auto padded = ad::pad_spatial(ce, padded_extent(h) - h, padded_extent(w) - w);
    const auto disp = ad::crop_spatial(models_.depth.forward(padded), 0, 0, h, w);
    return compute_losses(ce, disp, gt, geometry_, cfg_.weights);
  }

  static std::vector<const Image*> pointers(const std::vector<Image>& v) {
    std::vector<const Image*> p;
    for (const Image& i : v) p.push_back(&i);
    return p;
  }

  TrainConfig cfg_;
  nets::Models<float> models_;
  synth::ViewGeometry geometry_;
  std::vector<SyntheticScene> scenes_;
  std::vector<std::optional<Image>> jpeg_cache_;
  std::vector<std::pair<std::size_t, std::size_t>> crops_;
  std::vector<std::string> names_;
  ad::Adam<float> adam_;
  std::size_t step_ = 0;
};

}  // namespace lfz
