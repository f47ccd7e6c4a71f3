#include "kpst/losses/losses.hpp"

#include <cmath>

#include "json.hpp"

#include "kpst/core/errors.hpp"

namespace kpst::losses {

namespace {

nn::Var zero_scalar() { return nn::Var(Tensor::scalar(0.0f), false); }

void check_image(const nn::Var& v, const char* what) {
  if (!v.defined() || v.val().ndim() != 3) {
    throw UsageError(std::string(what) + ": expected a {C,H,W} tensor");
  }
}

}  // namespace

void LossWeights::validate() const {
  for (float l : {lambda_cy, lambda_l, lambda_h, lambda_s, lambda_c, lambda_adv}) {
    if (!(l >= 0.0f) || !std::isfinite(l)) {
      throw UsageError("loss weights must be finite and >= 0");
    }
  }
}

nn::Var masked_l1_mean(const nn::Var& a, const nn::Var& b, const Tensor& mask) {
  check_image(a, "masked_l1_mean");
  const int64_t ones = landmarks::mask_ones(mask);
  if (ones == 0) return zero_scalar();
  nn::Var diff = nn::abs_val(nn::mul_mask(nn::sub(a, b), mask));
  const float denom = static_cast<float>(a.val().dim(0)) * static_cast<float>(ones);
  return nn::scale(nn::sum_all(diff), 1.0f / denom);
}

nn::Var cycle_loss(const nn::Var& x, const nn::Var& y, const nn::Var& x_x,
                   const nn::Var& y_y) {
  check_image(x, "cycle_loss");
  check_image(y, "cycle_loss");
  return nn::add(nn::mean_all(nn::abs_val(nn::sub(x_x, x))),
                 nn::mean_all(nn::abs_val(nn::sub(y_y, y))));
}

LandTerms land_loss(const nn::Var& x_y, const nn::Var& x, const nn::Var& y_x,
                    const nn::Var& y, const landmarks::MaskBundle& masks_x,
                    const landmarks::MaskBundle& masks_y) {
  LandTerms t;
  t.eye = nn::add(masked_l1_mean(x_y, x, masks_x.eye), masked_l1_mean(y_x, y, masks_y.eye));
  t.nose = nn::add(masked_l1_mean(x_y, x, masks_x.nose), masked_l1_mean(y_x, y, masks_y.nose));
  t.lip = nn::add(masked_l1_mean(x_y, x, masks_x.lip), masked_l1_mean(y_x, y, masks_y.lip));
  t.total = nn::add(nn::add(t.eye, t.nose), t.lip);
  return t;
}

nn::Var head_loss(const nn::Var& x_y, const nn::Var& y, const nn::Var& y_x,
                  const nn::Var& x, const Tensor& m_ht, const Tensor& m_hr) {
  return nn::add(masked_l1_mean(x_y, y, m_ht), masked_l1_mean(y_x, x, m_hr));
}

nn::Var style_loss_features(const std::vector<nn::Var>& f_x_y,
                            const std::vector<nn::Var>& f_y,
                            const std::vector<nn::Var>& f_y_x,
                            const std::vector<nn::Var>& f_x) {
  if (f_y.size() != f_x_y.size() || f_y_x.size() != f_x_y.size() ||
      f_x.size() != f_x_y.size()) {
    throw UsageError("style_loss_features: per-layer lists must align");
  }
  nn::Var total = zero_scalar();
  for (size_t i = 0; i < f_x_y.size(); ++i) {
    const auto& sh = f_x_y[i].val().shape();
    const double n = sh[0];
    const double m = static_cast<double>(sh[1]) * sh[2];
    const float norm = static_cast<float>(1.0 / (4.0 * n * n * m * m));
    nn::Var d1 = nn::sum_all(nn::square(nn::sub(nn::gram(f_x_y[i]), nn::gram(f_y[i]))));
    nn::Var d2 = nn::sum_all(nn::square(nn::sub(nn::gram(f_y_x[i]), nn::gram(f_x[i]))));
    total = nn::add(total, nn::scale(nn::add(d1, d2), norm));
  }
  return total;
}

nn::Var style_loss(const nn::Var& x_y, const nn::Var& y, const nn::Var& y_x,
                   const nn::Var& x, perceptual::FeatureExtractor& features,
                   const std::vector<perceptual::VggLayer>& layers) {
  return style_loss_features(features.extract_features(x_y, layers),
                             features.extract_features(y, layers),
                             features.extract_features(y_x, layers),
                             features.extract_features(x, layers));
}

nn::Var content_loss_features(const nn::Var& f_x_y, const nn::Var& f_x,
                              const nn::Var& f_y_x, const nn::Var& f_y) {
  nn::Var d1 = nn::mean_all(nn::square(nn::sub(f_x_y, f_x)));
  nn::Var d2 = nn::mean_all(nn::square(nn::sub(f_y_x, f_y)));
  return nn::add(d1, d2);
}

nn::Var content_loss(const nn::Var& x_y, const nn::Var& x, const nn::Var& y_x,
                     const nn::Var& y, perceptual::FeatureExtractor& features,
                     perceptual::VggLayer layer) {
  const std::vector<perceptual::VggLayer> taps = {layer};
  return content_loss_features(
      features.extract_features(x_y, taps)[0], features.extract_features(x, taps)[0],
      features.extract_features(y_x, taps)[0], features.extract_features(y, taps)[0]);
}

nn::Var lsgan_loss(const nn::Var& scores, float target) {
  return nn::mean_all(nn::square(nn::add_scalar(scores, -target)));
}

nn::Var generator_adversarial(const nn::Var& d_x_on_x_y, const nn::Var& d_y_on_y_x) {
  return nn::add(lsgan_loss(d_x_on_x_y, 1.0f), lsgan_loss(d_y_on_y_x, 1.0f));
}

nn::Var discriminator_loss(const nn::Var& d_x_on_y, const nn::Var& d_x_on_x_y,
                           const nn::Var& d_y_on_x, const nn::Var& d_y_on_y_x) {
  nn::Var dx = nn::add(lsgan_loss(d_x_on_y, 1.0f), lsgan_loss(d_x_on_x_y, 0.0f));
  nn::Var dy = nn::add(lsgan_loss(d_y_on_x, 1.0f), lsgan_loss(d_y_on_y_x, 0.0f));
  return nn::add(dx, dy);
}

nn::Var generator_total(const GeneratorLossParts& parts, const LossWeights& w) {
  w.validate();
  nn::Var total = zero_scalar();
  auto accumulate = [&total](const std::optional<nn::Var>& part, float lambda) {
    if (part && lambda > 0.0f) total = nn::add(total, nn::scale(*part, lambda));
  };
  accumulate(parts.cycle, w.lambda_cy);
  if (parts.land) accumulate(parts.land->total, w.lambda_l);
  accumulate(parts.head, w.lambda_h);
  accumulate(parts.style, w.lambda_s);
  accumulate(parts.content, w.lambda_c);
  accumulate(parts.adv, w.lambda_adv);
  return total;
}

bool LossReport::finite() const {
  auto ok = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
  return std::isfinite(generator_total) && ok(cycle) && ok(land) && ok(land_eye) &&
         ok(land_nose) && ok(land_lip) && ok(head) && ok(style) && ok(content) &&
         ok(adversarial_g) && ok(discriminator_total);
}

std::string LossReport::to_json() const {
  nlohmann::ordered_json j;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("cycle", cycle);
  put("land_eye", land_eye);
  put("land_nose", land_nose);
  put("land_lip", land_lip);
  put("land", land);
  put("head", head);
  put("style", style);
  put("content", content);
  put("adversarial_g", adversarial_g);
  j["generator_total"] = generator_total;
  put("discriminator_total", discriminator_total);
  return j.dump();
}

LossReport LossReport::from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  LossReport r;
  auto get = [&j](const char* key) -> std::optional<double> {
    if (auto it = j.find(key); it != j.end()) return it->get<double>();
    return std::nullopt;
  };
  r.cycle = get("cycle");
  r.land_eye = get("land_eye");
  r.land_nose = get("land_nose");
  r.land_lip = get("land_lip");
  r.land = get("land");
  r.head = get("head");
  r.style = get("style");
  r.content = get("content");
  r.adversarial_g = get("adversarial_g");
  r.generator_total = j.at("generator_total").get<double>();
  r.discriminator_total = get("discriminator_total");
  return r;
}

LossReport make_report(const GeneratorLossParts& parts, const LossWeights& w,
                       const std::optional<nn::Var>& d_total) {
  LossReport r;
  double total = 0.0;
  auto take = [&total](std::optional<double>& field, const nn::Var& part, float lambda) {
    field = static_cast<double>(part.scalar());
    total += static_cast<double>(lambda) * *field;
  };
  if (parts.cycle) take(r.cycle, *parts.cycle, w.lambda_cy);
  if (parts.land) {
    r.land_eye = static_cast<double>(parts.land->eye.scalar());
    r.land_nose = static_cast<double>(parts.land->nose.scalar());
    r.land_lip = static_cast<double>(parts.land->lip.scalar());
    take(r.land, parts.land->total, w.lambda_l);
  }
  if (parts.head) take(r.head, *parts.head, w.lambda_h);
  if (parts.style) take(r.style, *parts.style, w.lambda_s);
  if (parts.content) take(r.content, *parts.content, w.lambda_c);
  if (parts.adv) take(r.adversarial_g, *parts.adv, w.lambda_adv);
  r.generator_total = total;
  if (d_total) r.discriminator_total = static_cast<double>(d_total->scalar());
  return r;
}

}  // namespace kpst::losses
