#include "kpst/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "kpst/core/errors.hpp"
#include "kpst/data/image_io.hpp"
#include "kpst/networks/checkpoint.hpp"

namespace kpst::training {

namespace {

std::vector<nn::Var> params_of(const std::vector<std::pair<std::string, nn::Var>>& named) {
  std::vector<nn::Var> out;
  out.reserve(named.size());
  for (const auto& [name, v] : named) out.push_back(v);
  return out;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ",";
    s += ids[i];
  }
  return s;
}

nn::Var mean_vars(const std::vector<nn::Var>& vs) {
  nn::Var acc = vs[0];
  for (size_t i = 1; i < vs.size(); ++i) acc = nn::add(acc, vs[i]);
  if (vs.size() == 1) return acc;
  return nn::scale(acc, 1.0f / static_cast<float>(vs.size()));
}

losses::GeneratorLossParts mean_parts(const std::vector<losses::GeneratorLossParts>& items) {
  if (items.size() == 1) return items[0];
  losses::GeneratorLossParts out;
  auto gather = [&items](std::optional<nn::Var> losses::GeneratorLossParts::*field)
      -> std::optional<nn::Var> {
    std::vector<nn::Var> vs;
    for (const auto& p : items)
      if (p.*field) vs.push_back(*(p.*field));
    if (vs.empty()) return std::nullopt;
    return mean_vars(vs);
  };
  out.cycle = gather(&losses::GeneratorLossParts::cycle);
  std::vector<nn::Var> eyes, noses, lips, totals;
  for (const auto& p : items) {
    if (!p.land) continue;
    eyes.push_back(p.land->eye);
    noses.push_back(p.land->nose);
    lips.push_back(p.land->lip);
    totals.push_back(p.land->total);
  }
  if (!eyes.empty()) {
    out.land = losses::LandTerms{mean_vars(eyes), mean_vars(noses), mean_vars(lips),
                                 mean_vars(totals)};
  }
  out.head = gather(&losses::GeneratorLossParts::head);
  out.style = gather(&losses::GeneratorLossParts::style);
  out.content = gather(&losses::GeneratorLossParts::content);
  out.adv = gather(&losses::GeneratorLossParts::adv);
  return out;
}

losses::LossReport mean_reports(const std::vector<losses::LossReport>& rs) {
  losses::LossReport out;
  auto avg = [&rs](std::optional<double> losses::LossReport::*field)
      -> std::optional<double> {
    double sum = 0.0;
    int64_t n = 0;
    for (const auto& r : rs) {
      if (r.*field) {
        sum += *(r.*field);
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  out.cycle = avg(&losses::LossReport::cycle);
  out.land = avg(&losses::LossReport::land);
  out.land_eye = avg(&losses::LossReport::land_eye);
  out.land_nose = avg(&losses::LossReport::land_nose);
  out.land_lip = avg(&losses::LossReport::land_lip);
  out.head = avg(&losses::LossReport::head);
  out.style = avg(&losses::LossReport::style);
  out.content = avg(&losses::LossReport::content);
  out.adversarial_g = avg(&losses::LossReport::adversarial_g);
  out.discriminator_total = avg(&losses::LossReport::discriminator_total);
  double sum = 0.0;
  for (const auto& r : rs) sum += r.generator_total;
  out.generator_total = rs.empty() ? 0.0 : sum / static_cast<double>(rs.size());
  return out;
}

std::vector<nn::Var> pick(const std::vector<nn::Var>& all, const std::vector<size_t>& idx) {
  std::vector<nn::Var> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(lr0 > 0.0f) || !std::isfinite(lr0)) throw UsageError("lr0 must be positive and finite");
  if (!(decay_start_fraction >= 0.0f && decay_start_fraction <= 1.0f)) {
    throw UsageError("decay_start_fraction must lie in [0, 1]");
  }
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (checkpoint_every < 1) throw UsageError("checkpoint_every must be >= 1");
  if (mask_dilation_px < 0) throw UsageError("mask_dilation_px must be >= 0");
  weights.validate();
}

float lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch > cfg.epochs) {
    throw UsageError("epoch " + std::to_string(epoch) + " outside schedule range [0, " +
                     std::to_string(cfg.epochs) + "]");
  }
  if (epoch == cfg.epochs) return 0.0f;
  const double start = static_cast<double>(cfg.decay_start_fraction) * cfg.epochs;
  if (static_cast<double>(epoch) < start) return cfg.lr0;
  const double frac = (cfg.epochs - epoch) / (static_cast<double>(cfg.epochs) - start);
  return static_cast<float>(cfg.lr0 * frac);
}

Trainer::Trainer(TrainConfig cfg, data::DatasetManifest manifest, data::LandmarkCache lms,
                 std::shared_ptr<perceptual::FeatureExtractor> features,
                 std::filesystem::path out_dir)
    : cfg_(cfg),
      manifest_(std::move(manifest)),
      lms_(std::move(lms)),
      features_(std::move(features)),
      out_dir_(std::move(out_dir)),
      g_(cfg.seed),
      dx_(cfg.seed ^ 0x4458),
      dy_(cfg.seed ^ 0x4459),
      g_opt_(params_of(g_.named_parameters())),
      dx_opt_(params_of(dx_.named_parameters())),
      dy_opt_(params_of(dy_.named_parameters())),
      rng_(Rng::splitmix(cfg.seed ^ 0x747261696eULL)) {
  cfg_.validate();
  manifest_.validate();
  if ((use_style() || use_content()) && !features_) {
    throw UsageError("style/content terms are active but no feature extractor was given");
  }
  if (use_style()) {
    for (auto l : {perceptual::VggLayer::conv2_2, perceptual::VggLayer::conv3_2}) {
      plan_.style_idx.push_back(plan_.layers.size());
      plan_.layers.push_back(l);
    }
  }
  if (use_content()) {
    const auto l = perceptual::VggLayer::conv4_1;
    auto it = std::find(plan_.layers.begin(), plan_.layers.end(), l);
    plan_.content_idx = static_cast<size_t>(it - plan_.layers.begin());
    if (it == plan_.layers.end()) plan_.layers.push_back(l);
  }
}

bool Trainer::use_land() const {
  return !cfg_.ablation.drop_ll && cfg_.weights.lambda_l > 0.0f;
}
bool Trainer::use_head() const {
  return !cfg_.ablation.drop_lh && cfg_.weights.lambda_h > 0.0f;
}
bool Trainer::use_style() const {
  return !cfg_.ablation.drop_ls && cfg_.weights.lambda_s > 0.0f;
}
bool Trainer::use_content() const {
  return !cfg_.ablation.drop_lc && cfg_.weights.lambda_c > 0.0f;
}

int64_t Trainer::steps_per_epoch() const {
  const auto n = std::min(manifest_.train_x.size(), manifest_.train_y.size());
  return static_cast<int64_t>(n) / cfg_.batch_size;
}

nn::Var Trainer::load_input(const std::string& id, char domain) const {
  data::RawImage raw = data::read_image(manifest_.path_of(id, domain));
  raw.domain = domain == 'x' ? data::Domain::X_photo : data::Domain::Y_portrait;
  return nn::Var(data::normalize(raw, id).pixels);
}

std::optional<landmarks::MaskBundle> Trainer::masks_for(const std::string& id, int h,
                                                        int w) const {
  auto lm = lms_.find(id);
  if (!lm) return std::nullopt;
  return landmarks::build_masks(*lm, h, w, cfg_.mask_dilation_px);
}

losses::LossReport Trainer::train_step(const std::vector<std::string>& x_ids,
                                       const std::vector<std::string>& y_ids, float lr) {
  if (x_ids.empty() || x_ids.size() != y_ids.size()) {
    throw UsageError("train_step needs equal-sized, nonempty id batches");
  }
  const std::string batch_tag = "batch x=[" + join_ids(x_ids) + "] y=[" + join_ids(y_ids) + "]";

  struct Item {
    nn::Var x, y;
    landmarks::MaskBundle mx, my;
  };
  std::vector<Item> items;
  items.reserve(x_ids.size());
  for (size_t i = 0; i < x_ids.size(); ++i) {
    Item it;
    it.x = load_input(x_ids[i], 'x');
    it.y = load_input(y_ids[i], 'y');
    const auto& sx = it.x.val().shape();
    const auto& sy = it.y.val().shape();
    if (sx != sy) {
      throw DataError("images '" + x_ids[i] + "' and '" + y_ids[i] + "' disagree in size");
    }
    if (use_land() || use_head()) {
      const int h = static_cast<int>(sx[1]), w = static_cast<int>(sx[2]);
      it.mx = masks_for(x_ids[i], h, w);
      it.my = masks_for(y_ids[i], h, w);
    }
    items.push_back(std::move(it));
  }

  // Critic phase: fresh spectral estimates, then reals toward 1 and detached
  // fakes toward 0.
  dx_.power_iterate();
  dy_.power_iterate();
  std::vector<nn::Var> d_losses;
  for (const auto& it : items) {
    nn::Var fake_xy, fake_yx;
    {
      nn::NoGradGuard ng;
      auto out = g_.forward(it.x, it.y);
      fake_xy = out.x_y;
      fake_yx = out.y_x;
    }
    d_losses.push_back(losses::discriminator_loss(dx_.forward(it.y), dx_.forward(fake_xy),
                                                  dy_.forward(it.x), dy_.forward(fake_yx)));
  }
  nn::Var d_loss = mean_vars(d_losses);
  if (!std::isfinite(d_loss.scalar())) {
    throw DataError("non-finite critic loss on " + batch_tag);
  }
  dx_opt_.zero_grad();
  dy_opt_.zero_grad();
  nn::backward(d_loss);
  dx_opt_.step(lr);
  dy_opt_.step(lr);

  // Generator phase against the refreshed critics.
  std::vector<losses::GeneratorLossParts> item_parts;
  item_parts.reserve(items.size());
  for (const auto& it : items) {
    auto out = g_.forward(it.x, it.y);
    losses::GeneratorLossParts p;
    if (cfg_.weights.lambda_cy > 0.0f) {
      auto rec = g_.forward(out.x_y, out.y_x);
      p.cycle = losses::cycle_loss(it.x, it.y, rec.x_y, rec.y_x);
    }
    if (use_land()) p.land = losses::land_loss(out.x_y, it.x, out.y_x, it.y, it.mx, it.my);
    if (use_head()) p.head = losses::head_loss(out.x_y, it.y, out.y_x, it.x, it.my.head, it.mx.head);
    if (!plan_.layers.empty()) {
      auto f_xy = features_->extract_features(out.x_y, plan_.layers);
      auto f_yx = features_->extract_features(out.y_x, plan_.layers);
      std::vector<nn::Var> f_x, f_y;
      {
        // Real-image features are constants; keep them off the tape.
        nn::NoGradGuard ng;
        f_x = features_->extract_features(it.x, plan_.layers);
        f_y = features_->extract_features(it.y, plan_.layers);
      }
      if (use_style()) {
        p.style = losses::style_loss_features(pick(f_xy, plan_.style_idx),
                                              pick(f_y, plan_.style_idx),
                                              pick(f_yx, plan_.style_idx),
                                              pick(f_x, plan_.style_idx));
      }
      if (use_content()) {
        p.content = losses::content_loss_features(f_xy[plan_.content_idx], f_x[plan_.content_idx],
                                                  f_yx[plan_.content_idx], f_y[plan_.content_idx]);
      }
    }
    if (cfg_.weights.lambda_adv > 0.0f) {
      p.adv = losses::generator_adversarial(dx_.forward(out.x_y), dy_.forward(out.y_x));
    }
    item_parts.push_back(std::move(p));
  }
  losses::GeneratorLossParts parts = mean_parts(item_parts);
  losses::LossReport report = losses::make_report(parts, cfg_.weights, d_loss);
  if (!report.finite()) {
    throw DataError("non-finite generator loss on " + batch_tag);
  }
  const bool any_term = parts.cycle || parts.land || parts.head || parts.style ||
                        parts.content || parts.adv;
  if (any_term) {
    nn::Var total = losses::generator_total(parts, cfg_.weights);
    g_opt_.zero_grad();
    nn::backward(total);
    g_opt_.step(lr);
  }
  return report;
}

std::vector<EpochStats> Trainer::train_loop() {
  if (manifest_.train_x.empty() || manifest_.train_y.empty()) {
    throw DataError("training set is empty in at least one domain");
  }
  const int64_t steps = steps_per_epoch();
  if (steps <= 0) {
    throw UsageError("batch_size exceeds the smaller training domain");
  }
  if (use_land() || use_head()) {
    for (const auto* ids : {&manifest_.train_x, &manifest_.train_y}) {
      for (const auto& id : *ids) {
        if (!lms_.has(id)) throw DataError("no cached landmarks for '" + id + "'");
      }
    }
  }
  std::filesystem::create_directories(out_dir_);
  std::ofstream log(out_dir_ / "train_log.jsonl", std::ios::app);
  if (!log) throw IoError("cannot open training log under " + out_dir_.string());

  std::vector<EpochStats> stats;
  for (; epoch_ < cfg_.epochs; ++epoch_) {
    const auto t0 = std::chrono::steady_clock::now();
    const float lr = lr_schedule(epoch_, cfg_);
    auto xs = manifest_.train_x;
    auto ys = manifest_.train_y;
    rng_.shuffle(xs);
    rng_.shuffle(ys);

    std::vector<losses::LossReport> reports;
    reports.reserve(static_cast<size_t>(steps));
    for (int64_t s = 0; s < steps; ++s) {
      const size_t at = static_cast<size_t>(s) * cfg_.batch_size;
      std::vector<std::string> bx(xs.begin() + at, xs.begin() + at + cfg_.batch_size);
      std::vector<std::string> by(ys.begin() + at, ys.begin() + at + cfg_.batch_size);
      losses::LossReport r;
      try {
        r = train_step(bx, by, lr);
      } catch (const DataError& e) {
        throw DataError("epoch " + std::to_string(epoch_) + " step " + std::to_string(s) +
                        ": " + e.what());
      }
      reports.push_back(r);

      nlohmann::ordered_json line;
      line["kind"] = "step";
      line["epoch"] = epoch_;
      line["step"] = s;
      line["lr"] = lr;
      line["x"] = bx;
      line["y"] = by;
      line["losses"] = nlohmann::ordered_json::parse(r.to_json());
      log << line.dump() << "\n";
    }

    EpochStats st;
    st.epoch = epoch_;
    st.mean = mean_reports(reports);
    st.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.lr = lr;
    stats.push_back(st);

    nlohmann::ordered_json line;
    line["kind"] = "epoch";
    line["epoch"] = epoch_;
    line["lr"] = lr;
    line["steps"] = steps;
    line["seconds"] = st.seconds;
    line["mean"] = nlohmann::ordered_json::parse(st.mean.to_json());
    log << line.dump() << "\n";
    log.flush();

    const int completed = epoch_ + 1;
    if (completed % cfg_.checkpoint_every == 0 || completed == cfg_.epochs) {
      save_now(completed);
    }
  }
  return stats;
}

void Trainer::resume(const std::filesystem::path& checkpoint) {
  networks::TrainerSnapshot snap =
      networks::load_checkpoint(checkpoint, g_, &dx_, &dy_, &g_opt_, &dx_opt_, &dy_opt_);
  if (snap.epoch < 0 || snap.epoch > cfg_.epochs) {
    throw CheckpointError("checkpoint epoch " + std::to_string(snap.epoch) +
                          " does not fit a run of " + std::to_string(cfg_.epochs) + " epochs");
  }
  epoch_ = snap.epoch;
  rng_.set_state(snap.rng_state);
}

std::string Trainer::checkpoint_name(int epochs_completed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%04d.kpst", epochs_completed);
  return buf;
}

void Trainer::save_now(int epochs_completed) {
  networks::TrainerSnapshot snap;
  snap.epoch = epochs_completed;
  snap.rng_state = rng_.state();
  networks::save_checkpoint(out_dir_ / checkpoint_name(epochs_completed), g_, dx_, dy_, g_opt_,
                            dx_opt_, dy_opt_, snap);
}

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants = {
      {"wo_Lc", {.drop_lc = true}},
      {"wo_Ls", {.drop_ls = true}},
      {"wo_Ll", {.drop_ll = true}},
      {"wo_Lh", {.drop_lh = true}},
      {"L_Total", {}},
  };
  return variants;
}

TrainConfig variant_config(const TrainConfig& base, const AblationVariant& v) {
  TrainConfig cfg = base;
  cfg.ablation = v.flags;
  return cfg;
}

std::vector<std::filesystem::path> run_ablation_suite(
    const TrainConfig& base, const data::DatasetManifest& manifest,
    const data::LandmarkCache& lms, std::shared_ptr<perceptual::FeatureExtractor> features,
    const std::filesystem::path& out_root) {
  base.validate();
  std::vector<std::filesystem::path> dirs;
  for (const auto& v : ablation_variants()) {
    const auto dir = out_root / v.slug;
    std::filesystem::create_directories(dir);
    const TrainConfig cfg = variant_config(base, v);
    nlohmann::ordered_json tag;
    tag["variant"] = v.slug;
    tag["flags"] = {{"drop_Lc", cfg.ablation.drop_lc},
                    {"drop_Ls", cfg.ablation.drop_ls},
                    {"drop_Ll", cfg.ablation.drop_ll},
                    {"drop_Lh", cfg.ablation.drop_lh}};
    tag["seed"] = cfg.seed;
    tag["epochs"] = cfg.epochs;
    std::ofstream tf(dir / "variant.json");
    if (!tf) throw IoError("cannot write variant tag under " + dir.string());
    tf << tag.dump(2) << "\n";
    tf.close();

    Trainer trainer(cfg, manifest, lms, features, dir);
    trainer.train_loop();
    dirs.push_back(dir);
  }
  return dirs;
}

std::filesystem::path latest_checkpoint(const std::filesystem::path& model_dir) {
  std::filesystem::path best;
  int best_n = -1;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(model_dir, ec)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || entry.path().extension() != ".kpst") continue;
    const std::string digits = name.substr(5, name.size() - 5 - 5);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) continue;
    const int n = std::stoi(digits);
    if (n > best_n) {
      best_n = n;
      best = entry.path();
    }
  }
  return best;
}

}  // namespace kpst::training
