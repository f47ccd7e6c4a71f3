#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kpst/core/archive.hpp"
#include "kpst/nn/ops.hpp"

namespace kpst::networks {

// PatchGAN critic: five 4x4 convs, strides 2,2,2,1,1, channels
// 3->64->128->256->512->1, LeakyReLU(0.2) between, raw scores out
// (30x30 for a 256x256 input). The first four kernels are spectrally
// normalized; power-iteration vectors are part of the model state.
class Discriminator {
 public:
  explicit Discriminator(uint64_t seed = 2);

  nn::Var forward(const nn::Var& img) const;

  // One power-iteration step per normalized kernel; call once per
  // optimization step before the forward passes that use the weights.
  void power_iterate();

  // Current top-singular-value estimate of kernel `layer` (0..3).
  float sigma_estimate(int layer) const;

  std::vector<std::pair<std::string, nn::Var>> named_parameters() const;

  void save_sn_state(Archive& a, const std::string& prefix) const;
  void load_sn_state(const Archive& a, const std::string& prefix);

  static constexpr int kLayers = 5;
  static constexpr int kNormalized = 4;

 private:
  std::array<nn::Var, kLayers> w_, b_;
  std::array<Tensor, kNormalized> u_, v_;
};

}  // namespace kpst::networks
