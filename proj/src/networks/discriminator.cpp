#include "kpst/networks/discriminator.hpp"

#include <cmath>

#include "kpst/core/errors.hpp"
#include "kpst/core/rng.hpp"

namespace kpst::networks {

namespace {

constexpr int kChannels[6] = {3, 64, 128, 256, 512, 1};
constexpr int kStride[5] = {2, 2, 2, 1, 1};

Tensor unit_vector(int n, Rng& rng) {
  Tensor t({n});
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    t[i] = static_cast<float>(rng.gaussian());
    norm2 += static_cast<double>(t[i]) * t[i];
  }
  float inv = static_cast<float>(1.0 / std::sqrt(norm2));
  for (int i = 0; i < n; ++i) t[i] *= inv;
  return t;
}

}  // namespace

Discriminator::Discriminator(uint64_t seed) {
  Rng rng(Rng::splitmix(seed ^ 0x64697363));
  for (int i = 0; i < kLayers; ++i) {
    Tensor w({kChannels[i + 1], kChannels[i], 4, 4});
    for (int64_t k = 0; k < w.numel(); ++k)
      w[k] = static_cast<float>(rng.gaussian(0.0, 0.02));
    w_[i] = nn::Var(w, true);
    b_[i] = nn::Var(Tensor::zeros({kChannels[i + 1]}), true);
  }
  for (int i = 0; i < kNormalized; ++i) {
    u_[i] = unit_vector(kChannels[i + 1], rng);
    v_[i] = unit_vector(kChannels[i] * 16, rng);
  }
}

nn::Var Discriminator::forward(const nn::Var& img) const {
  const Tensor& t = img.val();
  if (t.ndim() != 3 || t.dim(0) != 3) {
    throw DataError("discriminator: input must be {3,H,W}");
  }
  nn::Var h = img;
  for (int i = 0; i < kLayers; ++i) {
    nn::Var w = w_[i];
    if (i < kNormalized) {
      // sigma kept strictly positive so a degenerate kernel cannot divide by 0.
      nn::Var sigma = nn::add_scalar(nn::sn_sigma(w_[i], u_[i], v_[i]), 1e-12f);
      w = nn::div_scalar_var(w_[i], sigma);
    }
    h = nn::conv2d(h, w, b_[i], kStride[i], 1);
    if (i + 1 < kLayers) h = nn::leaky_relu(h, 0.2f);
  }
  return h;
}

void Discriminator::power_iterate() {
  for (int i = 0; i < kNormalized; ++i) {
    const Tensor& w = w_[i].val();
    nn::spectral_power_iteration(w, w.dim(0), static_cast<int>(w.numel() / w.dim(0)),
                                 u_[i], v_[i]);
  }
}

float Discriminator::sigma_estimate(int layer) const {
  nn::NoGradGuard ng;
  return nn::sn_sigma(w_[layer], u_[layer], v_[layer]).scalar();
}

std::vector<std::pair<std::string, nn::Var>> Discriminator::named_parameters() const {
  std::vector<std::pair<std::string, nn::Var>> out;
  for (int i = 0; i < kLayers; ++i) {
    out.emplace_back("conv" + std::to_string(i) + ".weight", w_[i]);
    out.emplace_back("conv" + std::to_string(i) + ".bias", b_[i]);
  }
  return out;
}

void Discriminator::save_sn_state(Archive& a, const std::string& prefix) const {
  for (int i = 0; i < kNormalized; ++i) {
    a.tensors[prefix + "sn" + std::to_string(i) + ".u"] = u_[i];
    a.tensors[prefix + "sn" + std::to_string(i) + ".v"] = v_[i];
  }
}

void Discriminator::load_sn_state(const Archive& a, const std::string& prefix) {
  for (int i = 0; i < kNormalized; ++i) {
    Tensor u = a.tensor(prefix + "sn" + std::to_string(i) + ".u");
    Tensor v = a.tensor(prefix + "sn" + std::to_string(i) + ".v");
    if (!u.same_shape(u_[i]) || !v.same_shape(v_[i])) {
      throw CheckpointError("power-iteration state has wrong shape: " + prefix);
    }
    u_[i] = u;
    v_[i] = v;
  }
}

}  // namespace kpst::networks
