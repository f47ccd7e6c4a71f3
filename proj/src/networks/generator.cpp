#include "kpst/networks/generator.hpp"

#include <cmath>

#include "kpst/core/errors.hpp"
#include "kpst/core/rng.hpp"

namespace kpst::networks {

namespace {

nn::Var init_conv(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<float>(rng.gaussian(0.0, 0.02));
  return nn::Var(t, true);
}

const nn::Var kNoBias;

}  // namespace

nn::Var residual_block(const nn::Var& f, const nn::Var& w1, const nn::Var& w2) {
  nn::Var h = nn::relu(nn::instance_norm(nn::conv2d(f, w1, kNoBias, 1, 1)));
  h = nn::instance_norm(nn::conv2d(h, w2, kNoBias, 1, 1));
  return nn::add(f, h);
}

Generator::Generator(uint64_t seed) {
  Rng rng(Rng::splitmix(seed ^ 0x67656e));
  for (int b = 0; b < 2; ++b) {
    enc_[b][0] = init_conv({32, 3, 7, 7}, rng);
    enc_[b][1] = init_conv({64, 32, 4, 4}, rng);
    enc_[b][2] = init_conv({128, 64, 4, 4}, rng);
    dec_[b][0] = init_conv({256, 128, 4, 4}, rng);
    dec_[b][1] = init_conv({128, 64, 4, 4}, rng);
    out_w_[b] = init_conv({3, 64, 7, 7}, rng);
    out_b_[b] = nn::Var(Tensor::zeros({3}), true);
  }
  for (auto& block : res_) {
    block[0] = init_conv({256, 256, 3, 3}, rng);
    block[1] = init_conv({256, 256, 3, 3}, rng);
  }
}

nn::Var Generator::encode(const nn::Var& img, int branch) const {
  const auto& e = enc_[branch];
  nn::Var h = nn::relu(nn::instance_norm(nn::conv2d(img, e[0], kNoBias, 1, 3)));
  h = nn::relu(nn::instance_norm(nn::conv2d(h, e[1], kNoBias, 2, 1)));
  return nn::relu(nn::instance_norm(nn::conv2d(h, e[2], kNoBias, 2, 1)));
}

nn::Var Generator::decode(const nn::Var& f, int branch) const {
  const auto& d = dec_[branch];
  nn::Var h = nn::relu(nn::instance_norm(nn::conv_transpose2d(f, d[0], kNoBias, 2, 1)));
  h = nn::relu(nn::instance_norm(nn::conv_transpose2d(h, d[1], kNoBias, 2, 1)));
  return nn::tanh_act(nn::conv2d(h, out_w_[branch], out_b_[branch], 1, 3));
}

nn::Var Generator::bottleneck_input(const nn::Var& x, const nn::Var& y) const {
  return nn::concat_channels(encode(x, 0), encode(y, 1));
}

GeneratorOutput Generator::forward(const nn::Var& x, const nn::Var& y) const {
  for (const nn::Var* v : {&x, &y}) {
    const Tensor& t = v->val();
    if (t.ndim() != 3 || t.dim(0) != 3 || t.dim(1) % 4 != 0 || t.dim(2) % 4 != 0) {
      throw DataError("generator: inputs must be {3,H,W} with H, W divisible by 4");
    }
  }
  if (!x.val().same_shape(y.val())) {
    throw DataError("generator: the two inputs must share one shape");
  }
  nn::Var h = nn::concat_channels(encode(x, 0), encode(y, 1));
  for (const auto& block : res_) h = residual_block(h, block[0], block[1]);
  return GeneratorOutput{decode(h, 0), decode(h, 1)};
}

std::vector<std::pair<std::string, nn::Var>> Generator::named_parameters() const {
  std::vector<std::pair<std::string, nn::Var>> out;
  const char* branch_tag[2] = {"x", "y"};
  for (int b = 0; b < 2; ++b) {
    std::string tag = branch_tag[b];
    for (int i = 0; i < 3; ++i)
      out.emplace_back("enc_" + tag + "." + std::to_string(i) + ".weight", enc_[b][i]);
    for (int i = 0; i < 2; ++i)
      out.emplace_back("dec_" + tag + "." + std::to_string(i) + ".weight", dec_[b][i]);
    out.emplace_back("out_" + tag + ".weight", out_w_[b]);
    out.emplace_back("out_" + tag + ".bias", out_b_[b]);
  }
  for (size_t i = 0; i < res_.size(); ++i) {
    out.emplace_back("res." + std::to_string(i) + ".conv1.weight", res_[i][0]);
    out.emplace_back("res." + std::to_string(i) + ".conv2.weight", res_[i][1]);
  }
  return out;
}

int64_t Generator::parameter_count() const {
  int64_t n = 0;
  for (const auto& [name, v] : named_parameters()) n += v.val().numel();
  return n;
}

}  // namespace kpst::networks
