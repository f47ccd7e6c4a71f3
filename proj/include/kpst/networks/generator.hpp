#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kpst/nn/ops.hpp"

namespace kpst::networks {

struct GeneratorOutput {
  nn::Var x_y;  // content of x, style of y
  nn::Var y_x;  // content of y, style of x
};

// Bottleneck unit: conv-norm-relu-conv-norm plus the input, no activation
// after the sum. Convs are 3x3 pad 1, bias-free (normalization absorbs it).
nn::Var residual_block(const nn::Var& f, const nn::Var& w1, const nn::Var& w2);

// Dual-stream translator. Each domain has its own encoder and decoder; the
// two encodings are concatenated and shared through the residual bottleneck,
// then split into per-domain decoders. Fully convolutional: any input size
// divisible by 4 works, 256x256 in production.
class Generator {
 public:
  explicit Generator(uint64_t seed = 1);

  // One dual pass. Apply again to (x_y, y_x) for the reconstructions.
  GeneratorOutput forward(const nn::Var& x, const nn::Var& y) const;

  // Concatenated encoder features (what the residual stack consumes).
  nn::Var bottleneck_input(const nn::Var& x, const nn::Var& y) const;

  std::vector<std::pair<std::string, nn::Var>> named_parameters() const;
  int64_t parameter_count() const;

 private:
  nn::Var encode(const nn::Var& img, int branch) const;
  nn::Var decode(const nn::Var& f, int branch) const;

  // [branch]: 0 = photo (x) stream, 1 = portrait (y) stream.
  std::array<std::array<nn::Var, 3>, 2> enc_;   // 7x7 s1, 4x4 s2, 4x4 s2
  std::array<std::array<nn::Var, 2>, 9> res_;
  std::array<std::array<nn::Var, 2>, 2> dec_;   // two 4x4 s2 transposed convs
  std::array<nn::Var, 2> out_w_, out_b_;        // 7x7 head, tanh-bounded
};

}  // namespace kpst::networks
