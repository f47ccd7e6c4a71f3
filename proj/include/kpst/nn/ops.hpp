#pragma once

#include <vector>

#include "kpst/nn/autograd.hpp"

namespace kpst::nn {

// Elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_scalar(const Var& a, float s);
Var relu(const Var& a);
Var leaky_relu(const Var& a, float slope = 0.2f);
Var tanh_act(const Var& a);
Var abs_val(const Var& a);
Var square(const Var& a);

// Multiplies a {C,H,W} tensor by a constant {H,W} mask broadcast over channels.
Var mul_mask(const Var& a, const Tensor& mask);
// Per-channel y[c] = x[c] * scale[c] + shift[c] on a {C,H,W} tensor.
Var channel_affine(const Var& a, std::vector<float> scale, std::vector<float> shift);

// Reductions to a scalar {1}
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// Structure
Var concat_channels(const Var& a, const Var& b);

// x {C,H,W}, w {OC,IC,K,K}, optional bias {OC}. Zero padding.
Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int pad);
// x {C,H,W}, w {IC,OC,K,K}; output size (H-1)*stride - 2*pad + K.
Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int pad);
// Per-channel normalization over the spatial extent.
Var instance_norm(const Var& x, float eps = 1e-5f);
// 2x2 max pooling, stride 2 (spatial dims must be even).
Var maxpool2(const Var& x);

// Channel Gram matrix: flatten each channel of {C,H,W} and return V * V^T as {C,C}.
Var gram(const Var& f);

// sigma = u^T W_mat v with u, v held constant; gradient w.r.t. w is u v^T.
// w may have any shape; rows = dim(0), cols = numel/dim(0).
Var sn_sigma(const Var& w, const Tensor& u, const Tensor& v);
// Divides a tensor by a positive scalar Var (gradient flows through both).
Var div_scalar_var(const Var& a, const Var& s);

// One power-iteration step on W_mat (rows x cols); updates u, v in place and
// returns the current spectral-norm estimate u^T W v.
float spectral_power_iteration(const Tensor& w, int rows, int cols, Tensor& u, Tensor& v);

}  // namespace kpst::nn
