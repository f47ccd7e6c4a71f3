#include "kpst/nn/adam.hpp"

#include <cmath>

namespace kpst::nn {

Adam::Adam(std::vector<Var> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Var& p : params_) {
    m_.push_back(Tensor::zeros(p.val().shape()));
    v_.push_back(Tensor::zeros(p.val().shape()));
  }
}

void Adam::step(float lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Var& p = params_[k];
    if (!p.has_grad()) continue;
    Tensor& value = p.val();
    const Tensor& g = p.grad();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (int64_t i = 0; i < value.numel(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
      float mhat = static_cast<float>(m[i] / bc1);
      float vhat = static_cast<float>(v[i] / bc2);
      value[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Var& p : params_) p.zero_grad();
}

void Adam::save_state(Archive& a, const std::string& prefix) const {
  a.strings[prefix + ".t"] = std::to_string(t_);
  for (size_t k = 0; k < params_.size(); ++k) {
    a.tensors[prefix + ".m" + std::to_string(k)] = m_[k];
    a.tensors[prefix + ".v" + std::to_string(k)] = v_[k];
  }
}

void Adam::load_state(const Archive& a, const std::string& prefix) {
  t_ = std::stoll(a.string_or(prefix + ".t", "0"));
  for (size_t k = 0; k < params_.size(); ++k) {
    m_[k] = a.tensor(prefix + ".m" + std::to_string(k));
    v_[k] = a.tensor(prefix + ".v" + std::to_string(k));
  }
}

}  // namespace kpst::nn
