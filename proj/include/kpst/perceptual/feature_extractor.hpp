#pragma once

#include <string>
#include <vector>

#include "kpst/nn/autograd.hpp"
#include "kpst/nn/ops.hpp"

namespace kpst::perceptual {

// Tappable backbone layers. conv3_1/conv3_3 exist inside the backbone but are
// not exposed; taps are taken after each layer's ReLU.
enum class VggLayer { conv1_1, conv1_2, conv2_1, conv2_2, conv3_2, conv4_1 };

const char* layer_name(VggLayer layer);

// Parses a canonical layer name; throws UsageError on anything else.
VggLayer layer_from_name(const std::string& name);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  // x: {3,H,W} in [-1,1]. Returns one feature map per requested layer, in
  // request order. Gradients flow into x; extractor weights stay fixed.
  virtual std::vector<nn::Var> extract_features(const nn::Var& x,
                                                const std::vector<VggLayer>& layers) = 0;
};

using nn::gram;

}  // namespace kpst::perceptual
