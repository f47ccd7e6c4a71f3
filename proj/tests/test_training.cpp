#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "kpst/core/errors.hpp"
#include "kpst/data/manifest.hpp"
#include "kpst/data/synthetic.hpp"
#include "kpst/training/trainer.hpp"
#include "toy_extractor.hpp"

using namespace kpst;
namespace fs = std::filesystem;

namespace {

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (int64_t i = 0; i < a.numel(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

bool same_parameters(const networks::Generator& a, const networks::Generator& b) {
  auto pa = a.named_parameters();
  auto pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first) return false;
    if (!bitwise_equal(pa[i].second.val(), pb[i].second.val())) return false;
  }
  return true;
}

// Tiny two-pair dataset shared by the expensive cases; written once.
struct Fixture {
  fs::path root;
  data::DatasetManifest manifest;
  data::LandmarkCache lms;

  Fixture() {
    root = fs::temp_directory_path() / "kpst_test_training";
    static bool written = false;
    if (!written) {
      fs::remove_all(root);
      data::write_synthetic_dataset(root / "data", 2, 1, 32, 77);
      written = true;
    }
    manifest = data::DatasetManifest::scan(root / "data");
    lms = data::LandmarkCache::load(root / "data" / "landmarks_truth.json");
  }

  training::TrainConfig config(int epochs, uint64_t seed = 5) const {
    training::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.batch_size = 1;
    cfg.checkpoint_every = 2;
    return cfg;
  }

  training::Trainer trainer(const training::TrainConfig& cfg, const std::string& run) const {
    return training::Trainer(cfg, manifest, lms, std::make_shared<ToyExtractor>(),
                             root / "runs" / run);
  }
};

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST_CASE("learning rate: constant half, then linear to zero") {
  training::TrainConfig cfg;  // 200 epochs, lr0 1e-4, decay from half
  CHECK(training::lr_schedule(0, cfg) == 1e-4f);
  CHECK(training::lr_schedule(99, cfg) == 1e-4f);
  CHECK(training::lr_schedule(100, cfg) == 1e-4f);  // decay segment start, still lr0
  CHECK(training::lr_schedule(150, cfg) == doctest::Approx(5e-5).epsilon(1e-6));
  CHECK(training::lr_schedule(175, cfg) == doctest::Approx(2.5e-5).epsilon(1e-6));
  CHECK(training::lr_schedule(200, cfg) == 0.0f);

  float prev = cfg.lr0;
  for (int e = 0; e <= cfg.epochs; ++e) {
    const float lr = training::lr_schedule(e, cfg);
    CHECK(lr <= prev);
    prev = lr;
  }

  CHECK_THROWS_AS(training::lr_schedule(-1, cfg), UsageError);
  CHECK_THROWS_AS(training::lr_schedule(201, cfg), UsageError);

  training::TrainConfig late = cfg;
  late.decay_start_fraction = 1.0f;  // never decays inside the run
  CHECK(training::lr_schedule(199, late) == 1e-4f);
  CHECK(training::lr_schedule(200, late) == 0.0f);

  training::TrainConfig early = cfg;
  early.decay_start_fraction = 0.0f;  // decays from the very first epoch
  CHECK(training::lr_schedule(0, early) == 1e-4f);
  CHECK(training::lr_schedule(100, early) == doctest::Approx(5e-5).epsilon(1e-6));
}

TEST_CASE("config validation rejects each bad field") {
  training::TrainConfig good;
  CHECK_NOTHROW(good.validate());

  auto reject = [](auto mutate) {
    training::TrainConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), UsageError);
  };
  reject([](auto& c) { c.epochs = 0; });
  reject([](auto& c) { c.lr0 = 0.0f; });
  reject([](auto& c) { c.lr0 = -1e-4f; });
  reject([](auto& c) { c.decay_start_fraction = -0.1f; });
  reject([](auto& c) { c.decay_start_fraction = 1.5f; });
  reject([](auto& c) { c.batch_size = 0; });
  reject([](auto& c) { c.checkpoint_every = 0; });
  reject([](auto& c) { c.mask_dilation_px = -1; });
  reject([](auto& c) { c.weights.lambda_s = -0.5f; });
}

TEST_CASE("first step is bitwise deterministic across same-seed runs") {
  Fixture fx;
  auto cfg = fx.config(4);
  auto t1 = fx.trainer(cfg, "det_a");
  auto t2 = fx.trainer(cfg, "det_b");
  REQUIRE(same_parameters(t1.generator(), t2.generator()));

  auto r1 = t1.train_step({"xf000"}, {"yf000"}, 1e-4f);
  auto r2 = t2.train_step({"xf000"}, {"yf000"}, 1e-4f);
  CHECK(r1.to_json() == r2.to_json());
  CHECK(same_parameters(t1.generator(), t2.generator()));

  // The step moved the generator away from a third, untouched copy.
  auto t3 = fx.trainer(cfg, "det_c");
  CHECK_FALSE(same_parameters(t1.generator(), t3.generator()));

  // All loss terms participate under the default config.
  CHECK(r1.cycle.has_value());
  CHECK(r1.land.has_value());
  CHECK(r1.head.has_value());
  CHECK(r1.style.has_value());
  CHECK(r1.content.has_value());
  CHECK(r1.adversarial_g.has_value());
  CHECK(r1.discriminator_total.has_value());
}

TEST_CASE("all ablation flags plus zero adversarial leave only cycle") {
  Fixture fx;
  auto cfg = fx.config(1);
  cfg.ablation = {.drop_lc = true, .drop_ls = true, .drop_ll = true, .drop_lh = true};
  cfg.weights.lambda_adv = 0.0f;
  auto t = fx.trainer(cfg, "cycle_only");
  auto r = t.train_step({"xf000"}, {"yf000"}, 1e-4f);

  REQUIRE(r.cycle.has_value());
  CHECK_FALSE(r.land.has_value());
  CHECK_FALSE(r.land_eye.has_value());
  CHECK_FALSE(r.head.has_value());
  CHECK_FALSE(r.style.has_value());
  CHECK_FALSE(r.content.has_value());
  CHECK_FALSE(r.adversarial_g.has_value());
  CHECK(r.discriminator_total.has_value());  // critics always train
  CHECK(r.generator_total == doctest::Approx(50.0 * *r.cycle).epsilon(1e-12));
}

TEST_CASE("single-drop run omits exactly that report entry") {
  Fixture fx;
  auto cfg = fx.config(1);
  cfg.ablation.drop_lh = true;
  auto t = fx.trainer(cfg, "drop_head");
  auto r = t.train_step({"xf001"}, {"yf001"}, 1e-4f);
  CHECK_FALSE(r.head.has_value());
  CHECK(r.cycle.has_value());
  CHECK(r.land.has_value());
  CHECK(r.style.has_value());
  CHECK(r.content.has_value());
  CHECK(r.adversarial_g.has_value());
}

TEST_CASE("empty or undersized datasets are rejected before any work") {
  Fixture fx;
  auto cfg = fx.config(1);

  auto empty = fx.manifest;
  empty.train_y.clear();
  training::Trainer t(cfg, empty, fx.lms, std::make_shared<ToyExtractor>(),
                      fx.root / "runs" / "empty");
  CHECK_THROWS_AS(t.train_loop(), DataError);
  CHECK_FALSE(fs::exists(fx.root / "runs" / "empty" / "train_log.jsonl"));

  auto big_batch = fx.config(1);
  big_batch.batch_size = 3;  // only two pairs exist
  auto t2 = fx.trainer(big_batch, "big_batch");
  CHECK_THROWS_AS(t2.train_loop(), UsageError);
}

TEST_CASE("non-finite loss aborts naming the offending batch") {
  Fixture fx;
  auto t = fx.trainer(fx.config(1), "poisoned");
  // Poison the output head's bias: it feeds tanh directly, so the NaN reaches
  // the translated image (inner relu layers clamp NaN to 0).
  for (auto& [name, v] : t.generator().named_parameters()) {
    if (name == "out_x.bias") {
      nn::Var handle = v;  // shares storage with the live network
      handle.val()[0] = std::numeric_limits<float>::quiet_NaN();
    }
  }
  CHECK_THROWS_WITH_AS(t.train_step({"xf000"}, {"yf000"}, 1e-4f),
                       doctest::Contains("xf000"), DataError);
}

TEST_CASE("loop shuffles, logs, checkpoints, and reports per-epoch stats") {
  Fixture fx;
  auto cfg = fx.config(3);  // checkpoints at 2 and the final 3
  auto run = fx.root / "runs" / "loop";
  fs::remove_all(run);
  auto t = fx.trainer(cfg, "loop");
  auto stats = t.train_loop();

  REQUIRE(stats.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(stats[e].epoch == e);
    CHECK(stats[e].lr == training::lr_schedule(e, cfg));
    CHECK(stats[e].mean.finite());
    CHECK(stats[e].seconds > 0.0);
  }

  CHECK(fs::exists(run / "ckpt_0002.kpst"));
  CHECK(fs::exists(run / "ckpt_0003.kpst"));
  CHECK_FALSE(fs::exists(run / "ckpt_0001.kpst"));
  CHECK(training::latest_checkpoint(run).filename() == "ckpt_0003.kpst");

  // 2 steps per epoch plus one epoch summary line, 3 epochs.
  const auto log_path = run / "train_log.jsonl";
  REQUIRE(fs::exists(log_path));
  CHECK(count_lines(log_path) == 3 * (2 + 1));
  std::ifstream in(log_path);
  std::string line;
  int steps_seen = 0, epochs_seen = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.at("kind") == "step") {
      ++steps_seen;
      auto r = losses::LossReport::from_json(j.at("losses").dump());
      CHECK(r.finite());
      CHECK(r.cycle.has_value());
    } else {
      CHECK(j.at("kind") == "epoch");
      ++epochs_seen;
      CHECK(j.at("steps") == 2);
    }
  }
  CHECK(steps_seen == 6);
  CHECK(epochs_seen == 3);
}

TEST_CASE("resume continues the schedule and the exact weights") {
  Fixture fx;
  auto cfg2 = fx.config(2);
  auto run_a = fx.root / "runs" / "resume_a";
  fs::remove_all(run_a);
  training::Trainer a(cfg2, fx.manifest, fx.lms, std::make_shared<ToyExtractor>(), run_a);
  a.train_loop();
  const auto ckpt = training::latest_checkpoint(run_a);
  REQUIRE(ckpt.filename() == "ckpt_0002.kpst");

  auto cfg4 = fx.config(4);
  cfg4.decay_start_fraction = 0.5f;
  auto b = fx.trainer(cfg4, "resume_b");
  CHECK_FALSE(same_parameters(a.generator(), b.generator()));  // b starts fresh
  b.resume(ckpt);
  CHECK(b.epoch() == 2);
  CHECK(b.current_lr() == training::lr_schedule(2, cfg4));
  CHECK(same_parameters(a.generator(), b.generator()));

  auto stats = b.train_loop();
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].epoch == 2);
  CHECK(stats[1].epoch == 3);
  CHECK(stats[0].lr == training::lr_schedule(2, cfg4));
  CHECK(stats[1].lr == training::lr_schedule(3, cfg4));

  // A checkpoint whose epoch exceeds the configured run is unusable.
  auto c = fx.trainer(fx.config(1), "resume_c");
  CHECK_THROWS_AS(c.resume(ckpt), CheckpointError);
}

TEST_CASE("ablation grid: five arms, one flag each, shared initialization") {
  const auto& variants = training::ablation_variants();
  REQUIRE(variants.size() == 5);
  CHECK(variants[0].slug == "wo_Lc");
  CHECK(variants[1].slug == "wo_Ls");
  CHECK(variants[2].slug == "wo_Ll");
  CHECK(variants[3].slug == "wo_Lh");
  CHECK(variants[4].slug == "L_Total");

  training::TrainConfig base;
  for (size_t i = 0; i < variants.size(); ++i) {
    auto cfg = training::variant_config(base, variants[i]);
    const int set = int(cfg.ablation.drop_lc) + int(cfg.ablation.drop_ls) +
                    int(cfg.ablation.drop_ll) + int(cfg.ablation.drop_lh);
    CHECK(set == (variants[i].slug == "L_Total" ? 0 : 1));
    CHECK(cfg.seed == base.seed);
    CHECK(cfg.epochs == base.epochs);
  }

  Fixture fx;
  auto cfg = fx.config(1, 42);
  auto t_full = fx.trainer(training::variant_config(cfg, variants[4]), "init_full");
  auto t_drop = fx.trainer(training::variant_config(cfg, variants[0]), "init_drop");
  CHECK(same_parameters(t_full.generator(), t_drop.generator()));
}

TEST_CASE("ablation suite trains five tagged model directories") {
  Fixture fx;
  auto cfg = fx.config(1, 9);
  auto out_root = fx.root / "runs" / "suite";
  fs::remove_all(out_root);
  auto dirs = training::run_ablation_suite(cfg, fx.manifest, fx.lms,
                                           std::make_shared<ToyExtractor>(), out_root);
  REQUIRE(dirs.size() == 5);
  for (size_t i = 0; i < dirs.size(); ++i) {
    const auto& v = training::ablation_variants()[i];
    CHECK(dirs[i].filename() == v.slug);
    CHECK(fs::exists(dirs[i] / "ckpt_0001.kpst"));
    CHECK(fs::exists(dirs[i] / "train_log.jsonl"));
    std::ifstream in(dirs[i] / "variant.json");
    REQUIRE(in.good());
    auto j = nlohmann::json::parse(in);
    CHECK(j.at("variant") == v.slug);
    const auto& f = j.at("flags");
    const int set = int(f.at("drop_Lc").get<bool>()) + int(f.at("drop_Ls").get<bool>()) +
                    int(f.at("drop_Ll").get<bool>()) + int(f.at("drop_Lh").get<bool>());
    CHECK(set == (v.slug == "L_Total" ? 0 : 1));
  }

  // drop_Lh arm: the head entry is absent from every step record.
  std::ifstream in(out_root / "wo_Lh" / "train_log.jsonl");
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    const auto& body = j.at("kind") == "step" ? j.at("losses") : j.at("mean");
    CHECK_FALSE(body.contains("head"));
    CHECK(body.contains("style"));
    ++checked;
  }
  CHECK(checked == 3);
}
