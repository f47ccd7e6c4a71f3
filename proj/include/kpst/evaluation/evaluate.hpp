#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kpst/data/manifest.hpp"
#include "kpst/evaluation/metrics.hpp"

namespace kpst::evaluation {

// Scores for one stylization: the translated image against its own content
// source (identity preservation) and against its style source.
struct MetricRecord {
  std::string pair_id;
  double p_content = 0.0;
  double p_style = 0.0;
  double s_content = 0.0;
  double s_style = 0.0;
};

// One metric family across the five study arms plus its balance errors.
struct BalanceColumn {
  std::array<double, 5> value{};  // in study-arm order
  double w_avg = 0.0;
  std::array<double, 5> error{};  // (w_avg - value_i)^2
};

BalanceColumn balance_column(const std::array<double, 5>& values);

// The full two-table summary: PSNR and SSIM families, content and style
// directions, with the per-arm combined errors.
struct AblationSet {
  std::array<std::string, 5> variant{};
  BalanceColumn p_content, p_style;
  BalanceColumn s_content, s_style;

  std::array<double, 5> e_psnr() const;  // content + style error, per arm
  std::array<double, 5> e_ssim() const;
};

struct VariantEvaluation {
  std::string slug;
  std::vector<MetricRecord> records;  // |test X| * |test Y| entries
  double mean_p_content = 0.0;
  double mean_p_style = 0.0;
  double mean_s_content = 0.0;
  double mean_s_style = 0.0;
};

struct TestsetEvaluation {
  std::vector<VariantEvaluation> variants;  // evaluated arms, study order
  std::vector<std::string> skipped;         // arms without a usable model
  std::optional<AblationSet> balance;       // present only when all 5 ran
};

// Loads each study arm's newest checkpoint from models_root/<slug>, stylizes
// every (test x, test y) combination, and scores the result against both
// sources on 8-bit images. Writes per-arm metric CSVs, one scatter CSV per
// metric family, and a JSON summary under out_dir. Arms without a checkpoint
// are skipped with a warning on stderr.
TestsetEvaluation evaluate_testset(const std::filesystem::path& models_root,
                                   const data::DatasetManifest& manifest,
                                   const std::filesystem::path& out_dir);

}  // namespace kpst::evaluation
