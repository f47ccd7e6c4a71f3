#include "kpst/nn/autograd.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace kpst::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Var::Var(Tensor value, bool requires_grad) {
  node_ = std::make_shared<Node>();
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
  bool needs = false;
  if (g_grad_enabled) {
    for (const Var& p : parents) needs = needs || p.requires_grad();
  }
  Var out(std::move(value), needs);
  if (needs) {
    out.node_->parents.reserve(parents.size());
    for (Var& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backprop = std::move(backprop);
  }
  return out;
}

void backward(const Var& root) {
  if (!root.defined() || root.val().numel() != 1) {
    throw std::logic_error("backward: root must be a defined scalar");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS over the requires_grad subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.node_.get(), 0);
  visited.insert(root.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node_->ensure_grad()[0] = 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop && node->grad.defined()) node->backprop(*node);
  }
}

}  // namespace kpst::nn
