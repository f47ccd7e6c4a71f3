#include "kpst/perceptual/vgg16.hpp"

#include <algorithm>
#include <cmath>

#include "kpst/core/archive.hpp"
#include "kpst/core/errors.hpp"
#include "kpst/core/rng.hpp"

namespace kpst::perceptual {

namespace {

constexpr std::array<const char*, 6> kTapNames = {"conv1_1", "conv1_2", "conv2_1",
                                                  "conv2_2", "conv3_2", "conv4_1"};
// Position of each tappable layer in the conv stack.
constexpr std::array<int, 6> kTapConv = {0, 1, 2, 3, 5, 7};

constexpr std::array<const char*, Vgg16::kNumConvs> kConvNames = {
    "conv1_1", "conv1_2", "conv2_1", "conv2_2", "conv3_1", "conv3_2", "conv3_3", "conv4_1"};
constexpr std::array<int, Vgg16::kNumConvs> kConvIn = {3, 64, 64, 128, 128, 256, 256, 256};
constexpr std::array<int, Vgg16::kNumConvs> kConvOut = {64, 64, 128, 128, 256, 256, 256, 512};

// ImageNet statistics the pretrained weights were trained under, folded
// together with the [-1,1] -> [0,1] remap into one per-channel affine.
constexpr std::array<float, 3> kMean = {0.485f, 0.456f, 0.406f};
constexpr std::array<float, 3> kStd = {0.229f, 0.224f, 0.225f};

}  // namespace

const char* layer_name(VggLayer layer) { return kTapNames[static_cast<size_t>(layer)]; }

VggLayer layer_from_name(const std::string& name) {
  for (size_t i = 0; i < kTapNames.size(); ++i) {
    if (name == kTapNames[i]) return static_cast<VggLayer>(i);
  }
  throw UsageError("unknown feature layer '" + name + "'");
}

Vgg16::Vgg16(const std::filesystem::path& weights_path) {
  if (weights_path.empty()) {
    Rng rng(416);
    for (int i = 0; i < kNumConvs; ++i) {
      Conv& c = convs_[static_cast<size_t>(i)];
      c.in_ch = kConvIn[static_cast<size_t>(i)];
      c.out_ch = kConvOut[static_cast<size_t>(i)];
      Tensor w({c.out_ch, c.in_ch, 3, 3});
      float stddev = std::sqrt(2.0f / (static_cast<float>(c.in_ch) * 9.0f));
      for (int64_t k = 0; k < w.numel(); ++k) w[k] = rng.gaussian(0.0f, stddev);
      c.w = nn::Var(std::move(w), false);
      c.b = nn::Var(Tensor::zeros({c.out_ch}), false);
    }
    return;
  }
  Archive a = Archive::load(weights_path);
  std::string schema = a.string_or("schema", "");
  if (schema != kSchema) {
    throw CheckpointError("vgg16 weights: expected schema '" + std::string(kSchema) + "', got '" +
                          schema + "' in " + weights_path.string());
  }
  for (int i = 0; i < kNumConvs; ++i) {
    Conv& c = convs_[static_cast<size_t>(i)];
    c.in_ch = kConvIn[static_cast<size_t>(i)];
    c.out_ch = kConvOut[static_cast<size_t>(i)];
    std::string base = kConvNames[static_cast<size_t>(i)];
    Tensor w = a.tensor(base + ".weight");
    Tensor b = a.tensor(base + ".bias");
    if (w.shape() != std::vector<int>{c.out_ch, c.in_ch, 3, 3} ||
        b.shape() != std::vector<int>{c.out_ch}) {
      throw CheckpointError("vgg16 weights: bad shape for " + base + " in " +
                            weights_path.string());
    }
    c.w = nn::Var(std::move(w), false);
    c.b = nn::Var(std::move(b), false);
  }
  pretrained_ = true;
}

void Vgg16::save(const std::filesystem::path& path) const {
  Archive a;
  a.strings["schema"] = kSchema;
  for (int i = 0; i < kNumConvs; ++i) {
    const Conv& c = convs_[static_cast<size_t>(i)];
    std::string base = kConvNames[static_cast<size_t>(i)];
    a.tensors.emplace(base + ".weight", c.w.val());
    a.tensors.emplace(base + ".bias", c.b.val());
  }
  a.save(path);
}

std::vector<nn::Var> Vgg16::extract_features(const nn::Var& x,
                                             const std::vector<VggLayer>& layers) {
  if (x.val().ndim() != 3 || x.val().dim(0) != 3) {
    throw DataError("vgg16: expected a {3,H,W} input");
  }
  int deepest = -1;
  for (VggLayer l : layers) deepest = std::max(deepest, kTapConv[static_cast<size_t>(l)]);

  std::array<nn::Var, kNumConvs> taps;
  std::vector<float> scale(3), shift(3);
  for (int c = 0; c < 3; ++c) {
    scale[static_cast<size_t>(c)] = 0.5f / kStd[static_cast<size_t>(c)];
    shift[static_cast<size_t>(c)] = (0.5f - kMean[static_cast<size_t>(c)]) / kStd[static_cast<size_t>(c)];
  }
  nn::Var h = nn::channel_affine(x, scale, shift);
  for (int i = 0; i <= deepest; ++i) {
    if (i == 2 || i == 4 || i == 7) h = nn::maxpool2(h);
    const Conv& c = convs_[static_cast<size_t>(i)];
    h = nn::relu(nn::conv2d(h, c.w, c.b, 1, 1));
    taps[static_cast<size_t>(i)] = h;
  }

  std::vector<nn::Var> out;
  out.reserve(layers.size());
  for (VggLayer l : layers) out.push_back(taps[static_cast<size_t>(kTapConv[static_cast<size_t>(l)])]);
  return out;
}

}  // namespace kpst::perceptual
