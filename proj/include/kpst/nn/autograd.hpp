#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kpst/core/tensor.hpp"

namespace kpst::nn {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One entry of the define-by-run tape. Backprop closures capture only plain
// data; parent handles live in `parents`, so no reference cycles form.
struct Node {
  Tensor value;
  Tensor grad;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;
  bool requires_grad = false;

  Tensor& ensure_grad() {
    if (!grad.defined()) grad = Tensor::zeros(value.shape());
    return grad;
  }
};

// Value-semantic handle to a Node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& val() const { return node_->value; }
  Tensor& val() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.defined(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() {
    if (node_ && node_->grad.defined()) node_->grad.zero();
  }
  // Value copy cut off from the graph.
  Var detach() const { return Var(node_->value, false); }
  float scalar() const { return node_->value[0]; }

  NodePtr node_;
};

bool grad_enabled();

// RAII scope that disables graph recording (evaluation mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();

 private:
  bool prev_;
};

// Builds an op node. When recording is off or no parent needs gradients the
// parents/backprop are dropped and the result behaves as a constant.
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop);

// Reverse-mode sweep from a scalar root. Gradients accumulate into every
// reachable node with requires_grad.
void backward(const Var& root);

}  // namespace kpst::nn
