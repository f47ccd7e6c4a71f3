#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kpst/core/rng.hpp"
#include "kpst/data/image.hpp"
#include "kpst/data/manifest.hpp"
#include "kpst/landmarks/masks.hpp"
#include "kpst/losses/losses.hpp"
#include "kpst/networks/discriminator.hpp"
#include "kpst/networks/generator.hpp"
#include "kpst/nn/adam.hpp"
#include "kpst/perceptual/feature_extractor.hpp"

namespace kpst::training {

// Which auxiliary generator terms a run removes. Cycle is never dropped; the
// ablation study varies the other four.
struct AblationFlags {
  bool drop_lc = false;  // content
  bool drop_ls = false;  // style
  bool drop_ll = false;  // landmark
  bool drop_lh = false;  // head
};

struct TrainConfig {
  int epochs = 200;
  float lr0 = 1e-4f;
  float decay_start_fraction = 0.5f;  // constant lr until this point
  int batch_size = 1;
  uint64_t seed = 1;
  int checkpoint_every = 10;  // epochs between checkpoints; the end always saves
  int mask_dilation_px = 3;
  losses::LossWeights weights;
  AblationFlags ablation;

  void validate() const;  // throws UsageError on any bad field
};

// Constant at lr0 until epochs * decay_start_fraction, then linear down to 0
// at `epochs`. The endpoint itself is a valid query (returns 0); anything
// outside [0, epochs] throws UsageError.
float lr_schedule(int epoch, const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;
  losses::LossReport mean;  // per-step means; absent fields were ablated
  double seconds = 0.0;
  float lr = 0.0f;
};

// Alternating optimizer for the translator and its two critics. Owns the
// networks, their Adam states, and the shuffle stream; writes a JSONL log and
// periodic checkpoints under out_dir.
class Trainer {
 public:
  Trainer(TrainConfig cfg, data::DatasetManifest manifest, data::LandmarkCache lms,
          std::shared_ptr<perceptual::FeatureExtractor> features,
          std::filesystem::path out_dir);

  // One critic update (reals toward 1, detached fakes toward 0) followed by
  // one generator update against the refreshed critics. Batches are id lists
  // of equal size. Throws DataError naming the batch when a loss goes
  // non-finite.
  losses::LossReport train_step(const std::vector<std::string>& x_ids,
                                const std::vector<std::string>& y_ids, float lr);

  // Runs from the current epoch to cfg.epochs. Each epoch reshuffles the two
  // domains independently and pairs them positionally, dropping the ragged
  // tail. Returns one entry per epoch run.
  std::vector<EpochStats> train_loop();

  // Restores networks, optimizers, epoch index, and shuffle stream. The next
  // epoch trained is snapshot.epoch, so the resumed lr is lr_schedule(epoch).
  void resume(const std::filesystem::path& checkpoint);

  int epoch() const { return epoch_; }
  float current_lr() const { return lr_schedule(epoch_, cfg_); }
  const TrainConfig& config() const { return cfg_; }
  const networks::Generator& generator() const { return g_; }
  const networks::Discriminator& critic_x() const { return dx_; }
  const networks::Discriminator& critic_y() const { return dy_; }

  static std::string checkpoint_name(int epochs_completed);

 private:
  struct FeaturePlan {
    std::vector<perceptual::VggLayer> layers;  // union pass per image
    std::vector<size_t> style_idx;
    size_t content_idx = 0;
  };

  bool use_land() const;
  bool use_head() const;
  bool use_style() const;
  bool use_content() const;
  int64_t steps_per_epoch() const;
  nn::Var load_input(const std::string& id, char domain) const;
  std::optional<landmarks::MaskBundle> masks_for(const std::string& id, int h, int w) const;
  void save_now(int epochs_completed);

  TrainConfig cfg_;
  data::DatasetManifest manifest_;
  data::LandmarkCache lms_;
  std::shared_ptr<perceptual::FeatureExtractor> features_;
  std::filesystem::path out_dir_;
  networks::Generator g_;
  networks::Discriminator dx_, dy_;
  nn::Adam g_opt_, dx_opt_, dy_opt_;
  Rng rng_;
  FeaturePlan plan_;
  int epoch_ = 0;
};

// One ablation study arm: the flag set it trains with.
struct AblationVariant {
  std::string slug;
  AblationFlags flags;
};

// The four single-drop arms plus the full objective, in report order.
const std::vector<AblationVariant>& ablation_variants();

// Base config with the variant's flags substituted (base flags are ignored:
// the suite defines each arm absolutely).
TrainConfig variant_config(const TrainConfig& base, const AblationVariant& v);

// Trains every variant with the shared seed and dataset; each lands in
// out_root/<slug> with its checkpoints, log, and a variant.json tag. Returns
// the five directories in variant order.
std::vector<std::filesystem::path> run_ablation_suite(
    const TrainConfig& base, const data::DatasetManifest& manifest,
    const data::LandmarkCache& lms, std::shared_ptr<perceptual::FeatureExtractor> features,
    const std::filesystem::path& out_root);

// Highest-numbered ckpt_*.kpst in a model directory; empty path when none.
std::filesystem::path latest_checkpoint(const std::filesystem::path& model_dir);

}  // namespace kpst::training
