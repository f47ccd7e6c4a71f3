#pragma once

#include <string>
#include <vector>

#include "kpst/core/archive.hpp"
#include "kpst/nn/autograd.hpp"

namespace kpst::nn {

struct AdamConfig {
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Adam with bias correction. Parameters are leaf Vars whose grads are
// accumulated by backward(); step() consumes and zeroes them.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamConfig cfg = {});

  void step(float lr);
  void zero_grad();
  int64_t steps_taken() const { return t_; }

  void save_state(Archive& a, const std::string& prefix) const;
  void load_state(const Archive& a, const std::string& prefix);

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

}  // namespace kpst::nn
