#pragma once

#include <array>
#include <filesystem>

#include "kpst/perceptual/feature_extractor.hpp"

namespace kpst::perceptual {

// The VGG-16 prefix through conv4_1, used as a frozen perceptual backbone.
// Weights load from an archive produced by tools/export_vgg16.py; with no
// path the network falls back to a fixed seeded He initialization, which
// keeps every shape/determinism/gradient property while carrying no
// pretrained prior.
class Vgg16 : public FeatureExtractor {
 public:
  explicit Vgg16(const std::filesystem::path& weights_path = {});

  std::vector<nn::Var> extract_features(const nn::Var& x,
                                        const std::vector<VggLayer>& layers) override;

  bool pretrained() const { return pretrained_; }

  // Writes the current weights in the loadable archive format.
  void save(const std::filesystem::path& path) const;

  static constexpr const char* kSchema = "vgg16-prefix-v1";
  static constexpr int kNumConvs = 8;

 private:
  struct Conv {
    nn::Var w, b;
    int in_ch = 0, out_ch = 0;
  };
  // conv1_1 conv1_2 | pool | conv2_1 conv2_2 | pool | conv3_1 conv3_2 conv3_3 | pool | conv4_1
  std::array<Conv, kNumConvs> convs_;
  bool pretrained_ = false;
};

}  // namespace kpst::perceptual
