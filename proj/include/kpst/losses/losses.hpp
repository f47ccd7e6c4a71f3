#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpst/core/tensor.hpp"
#include "kpst/landmarks/masks.hpp"
#include "kpst/nn/ops.hpp"
#include "kpst/perceptual/feature_extractor.hpp"

namespace kpst::losses {

// Coefficients of the generator objective. lambda_adv = 0 removes the
// adversarial pull on the generator entirely (the discriminators still train).
struct LossWeights {
  float lambda_cy = 50.0f;
  float lambda_l = 0.2f;
  float lambda_h = 0.5f;
  float lambda_s = 1.0f;
  float lambda_c = 0.1f;
  float lambda_adv = 1.0f;

  void validate() const;  // throws UsageError when any weight is negative
};

// Mean |a - b| over the support of a binary {H,W} mask broadcast across
// channels. All-zero masks contribute exactly 0 (no graph).
nn::Var masked_l1_mean(const nn::Var& a, const nn::Var& b, const Tensor& mask);

// Round-trip reconstruction: mean|x_x - x| + mean|y_y - y|, per-element means.
nn::Var cycle_loss(const nn::Var& x, const nn::Var& y, const nn::Var& x_x,
                   const nn::Var& y_y);

struct LandTerms {
  nn::Var eye, nose, lip, total;
};

// Per-part masked L1 keeping each translation's facial features aligned with
// its own source, in both directions.
LandTerms land_loss(const nn::Var& x_y, const nn::Var& x, const nn::Var& y_x,
                    const nn::Var& y, const landmarks::MaskBundle& masks_x,
                    const landmarks::MaskBundle& masks_y);

// Forehead band: each translation is pulled toward the *other domain's* real
// image inside that image's own band (m_ht from y's landmarks, m_hr from x's).
nn::Var head_loss(const nn::Var& x_y, const nn::Var& y, const nn::Var& y_x,
                  const nn::Var& x, const Tensor& m_ht, const Tensor& m_hr);

// Sum over layers of 1/(4 N^2 M^2) * (squared Gram differences in both
// directions), N = channels and M = spatial size of that layer's features.
nn::Var style_loss(const nn::Var& x_y, const nn::Var& y, const nn::Var& y_x,
                   const nn::Var& x, perceptual::FeatureExtractor& features,
                   const std::vector<perceptual::VggLayer>& layers = {
                       perceptual::VggLayer::conv2_2, perceptual::VggLayer::conv3_2});

// Mean squared feature difference at one layer, both directions.
nn::Var content_loss(const nn::Var& x_y, const nn::Var& x, const nn::Var& y_x,
                     const nn::Var& y, perceptual::FeatureExtractor& features,
                     perceptual::VggLayer layer = perceptual::VggLayer::conv4_1);

// Same losses on already-extracted feature maps (one entry per layer, lists
// aligned by position). Lets a caller share one backbone pass per image
// between the style and content terms.
nn::Var style_loss_features(const std::vector<nn::Var>& f_x_y,
                            const std::vector<nn::Var>& f_y,
                            const std::vector<nn::Var>& f_y_x,
                            const std::vector<nn::Var>& f_x);
nn::Var content_loss_features(const nn::Var& f_x_y, const nn::Var& f_x,
                              const nn::Var& f_y_x, const nn::Var& f_y);

// Mean squared distance of a raw score grid from a constant target.
nn::Var lsgan_loss(const nn::Var& scores, float target);

// Generator-side least-squares term pushing both fake score grids toward 1.
nn::Var generator_adversarial(const nn::Var& d_x_on_x_y, const nn::Var& d_y_on_y_x);

// Both discriminators' least-squares objective: reals toward 1, fakes toward 0.
nn::Var discriminator_loss(const nn::Var& d_x_on_y, const nn::Var& d_x_on_x_y,
                           const nn::Var& d_y_on_x, const nn::Var& d_y_on_y_x);

// Computed parts of the generator objective. Absent entries are ablated: they
// join neither the weighted sum nor the report.
struct GeneratorLossParts {
  std::optional<nn::Var> cycle;
  std::optional<LandTerms> land;
  std::optional<nn::Var> head;
  std::optional<nn::Var> style;
  std::optional<nn::Var> content;
  std::optional<nn::Var> adv;
};

// Weighted sum of the present parts as a graph node (backprop reaches every
// part). Zero-weight terms are skipped rather than multiplied by 0.
nn::Var generator_total(const GeneratorLossParts& parts, const LossWeights& w);

// Scalar snapshot of one optimization step, one JSON object per line in the
// training log. Absent fields mean the term was ablated that run.
struct LossReport {
  std::optional<double> cycle;
  std::optional<double> land, land_eye, land_nose, land_lip;
  std::optional<double> head;
  std::optional<double> style;
  std::optional<double> content;
  std::optional<double> adversarial_g;
  double generator_total = 0.0;
  std::optional<double> discriminator_total;

  bool finite() const;
  std::string to_json() const;
  static LossReport from_json(const std::string& line);
};

// generator_total is recomputed here in double precision; the float graph
// value agrees within 1e-6 relative.
LossReport make_report(const GeneratorLossParts& parts, const LossWeights& w,
                       const std::optional<nn::Var>& d_total);

}  // namespace kpst::losses
