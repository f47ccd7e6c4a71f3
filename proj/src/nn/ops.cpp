#include "kpst/nn/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kpst::nn {

namespace {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.val().same_shape(b.val())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

Var elementwise_binary(const Var& a, const Var& b, float (*fwd)(float, float),
                       void (*bwd)(float, float, float, float&, float&), const char* name) {
  check_same_shape(a, b, name);
  Tensor out(a.val().shape());
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = fwd(av[i], bv[i]);
  return make_op(std::move(out), {a, b}, [bwd](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    Tensor* ga = pa.requires_grad ? &pa.ensure_grad() : nullptr;
    Tensor* gb = pb.requires_grad ? &pb.ensure_grad() : nullptr;
    for (int64_t i = 0; i < n.grad.numel(); ++i) {
      float da = 0, db = 0;
      bwd(pa.value[i], pb.value[i], n.grad[i], da, db);
      if (ga) (*ga)[i] += da;
      if (gb) (*gb)[i] += db;
    }
  });
}

// Samples im (C x imH x imW) on the sliding-window grid (gridH x gridW) into
// col with rows (c, ki, kj) and columns (gy, gx). Out-of-bounds taps are zero.
void im2col(const float* im, int C, int imH, int imW, int gridH, int gridW, int k, int stride,
            int pad, float* col) {
  const int64_t gsz = static_cast<int64_t>(gridH) * gridW;
  for (int c = 0; c < C; ++c) {
    const float* src = im + static_cast<int64_t>(c) * imH * imW;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* dst = col + ((static_cast<int64_t>(c) * k + ki) * k + kj) * gsz;
        for (int gy = 0; gy < gridH; ++gy) {
          int y = gy * stride - pad + ki;
          if (y < 0 || y >= imH) {
            for (int gx = 0; gx < gridW; ++gx) dst[gy * gridW + gx] = 0.0f;
            continue;
          }
          const float* row = src + static_cast<int64_t>(y) * imW;
          for (int gx = 0; gx < gridW; ++gx) {
            int x = gx * stride - pad + kj;
            dst[gy * gridW + gx] = (x < 0 || x >= imW) ? 0.0f : row[x];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds col back into im.
void col2im(const float* col, int C, int imH, int imW, int gridH, int gridW, int k, int stride,
            int pad, float* im) {
  const int64_t gsz = static_cast<int64_t>(gridH) * gridW;
  for (int c = 0; c < C; ++c) {
    float* dst = im + static_cast<int64_t>(c) * imH * imW;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* src = col + ((static_cast<int64_t>(c) * k + ki) * k + kj) * gsz;
        for (int gy = 0; gy < gridH; ++gy) {
          int y = gy * stride - pad + ki;
          if (y < 0 || y >= imH) continue;
          float* row = dst + static_cast<int64_t>(y) * imW;
          for (int gx = 0; gx < gridW; ++gx) {
            int x = gx * stride - pad + kj;
            if (x >= 0 && x < imW) row[x] += src[gy * gridW + gx];
          }
        }
      }
    }
  }
}

int conv_out_size(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

}  // namespace

Var add(const Var& a, const Var& b) {
  return elementwise_binary(
      a, b, [](float x, float y) { return x + y; },
      [](float, float, float g, float& da, float& db) {
        da = g;
        db = g;
      },
      "add");
}

Var sub(const Var& a, const Var& b) {
  return elementwise_binary(
      a, b, [](float x, float y) { return x - y; },
      [](float, float, float g, float& da, float& db) {
        da = g;
        db = -g;
      },
      "sub");
}

Var mul(const Var& a, const Var& b) {
  return elementwise_binary(
      a, b, [](float x, float y) { return x * y; },
      [](float x, float y, float g, float& da, float& db) {
        da = g * y;
        db = g * x;
      },
      "mul");
}

Var scale(const Var& a, float s) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a.val()[i] * s;
  return make_op(std::move(out), {a}, [s](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * s;
  });
}

Var add_scalar(const Var& a, float s) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a.val()[i] + s;
  return make_op(std::move(out), {a}, [](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

Var relu(const Var& a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a.val()[i] > 0 ? a.val()[i] : 0.0f;
  return make_op(std::move(out), {a}, [](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    const Tensor& x = n.parents[0]->value;
    for (int64_t i = 0; i < g.numel(); ++i) {
      if (x[i] > 0) g[i] += n.grad[i];
    }
  });
}

Var leaky_relu(const Var& a, float slope) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) {
    float x = a.val()[i];
    out[i] = x > 0 ? x : slope * x;
  }
  return make_op(std::move(out), {a}, [slope](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    const Tensor& x = n.parents[0]->value;
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * (x[i] > 0 ? 1.0f : slope);
  });
}

Var tanh_act(const Var& a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(a.val()[i]);
  return make_op(std::move(out), {a}, [](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    for (int64_t i = 0; i < g.numel(); ++i) {
      float y = n.value[i];
      g[i] += n.grad[i] * (1.0f - y * y);
    }
  });
}

Var abs_val(const Var& a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::fabs(a.val()[i]);
  return make_op(std::move(out), {a}, [](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    const Tensor& x = n.parents[0]->value;
    for (int64_t i = 0; i < g.numel(); ++i) {
      g[i] += n.grad[i] * (x[i] > 0 ? 1.0f : (x[i] < 0 ? -1.0f : 0.0f));
    }
  });
}

Var square(const Var& a) { return mul(a, a); }

Var mul_mask(const Var& a, const Tensor& mask) {
  const Tensor& av = a.val();
  if (av.ndim() != 3 || mask.ndim() != 2 || av.dim(1) != mask.dim(0) ||
      av.dim(2) != mask.dim(1)) {
    throw std::invalid_argument("mul_mask: expected {C,H,W} input and matching {H,W} mask");
  }
  const int64_t hw = mask.numel();
  Tensor out(av.shape());
  for (int c = 0; c < av.dim(0); ++c) {
    for (int64_t i = 0; i < hw; ++i) out[c * hw + i] = av[c * hw + i] * mask[i];
  }
  return make_op(std::move(out), {a}, [mask, hw](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    int C = n.value.dim(0);
    for (int c = 0; c < C; ++c) {
      for (int64_t i = 0; i < hw; ++i) g[c * hw + i] += n.grad[c * hw + i] * mask[i];
    }
  });
}

Var channel_affine(const Var& a, std::vector<float> scl, std::vector<float> shift) {
  const Tensor& av = a.val();
  if (av.ndim() != 3 || static_cast<int>(scl.size()) != av.dim(0) || scl.size() != shift.size()) {
    throw std::invalid_argument("channel_affine: bad per-channel coefficients");
  }
  const int64_t hw = static_cast<int64_t>(av.dim(1)) * av.dim(2);
  Tensor out(av.shape());
  for (int c = 0; c < av.dim(0); ++c) {
    for (int64_t i = 0; i < hw; ++i) out[c * hw + i] = av[c * hw + i] * scl[c] + shift[c];
  }
  return make_op(std::move(out), {a}, [scl = std::move(scl), hw](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    int C = n.value.dim(0);
    for (int c = 0; c < C; ++c) {
      for (int64_t i = 0; i < hw; ++i) g[c * hw + i] += n.grad[c * hw + i] * scl[c];
    }
  });
}

Var sum_all(const Var& a) {
  double acc = 0.0;
  for (int64_t i = 0; i < a.val().numel(); ++i) acc += a.val()[i];
  return make_op(Tensor::scalar(static_cast<float>(acc)), {a}, [](Node& n) {
    Tensor& g = n.parents[0]->ensure_grad();
    float go = n.grad[0];
    for (int64_t i = 0; i < g.numel(); ++i) g[i] += go;
  });
}

Var mean_all(const Var& a) {
  int64_t count = a.val().numel();
  double acc = 0.0;
  for (int64_t i = 0; i < count; ++i) acc += a.val()[i];
  return make_op(Tensor::scalar(static_cast<float>(acc / static_cast<double>(count))), {a},
                 [count](Node& n) {
                   Tensor& g = n.parents[0]->ensure_grad();
                   float go = n.grad[0] / static_cast<float>(count);
                   for (int64_t i = 0; i < g.numel(); ++i) g[i] += go;
                 });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  if (av.ndim() != 3 || bv.ndim() != 3 || av.dim(1) != bv.dim(1) || av.dim(2) != bv.dim(2)) {
    throw std::invalid_argument("concat_channels: spatial dims must match");
  }
  Tensor out({av.dim(0) + bv.dim(0), av.dim(1), av.dim(2)});
  std::copy(av.data(), av.data() + av.numel(), out.data());
  std::copy(bv.data(), bv.data() + bv.numel(), out.data() + av.numel());
  int64_t na = av.numel();
  return make_op(std::move(out), {a, b}, [na](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.ensure_grad();
      for (int64_t i = 0; i < na; ++i) g[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.ensure_grad();
      for (int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[na + i];
    }
  });
}

Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int pad) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  if (xv.ndim() != 3 || wv.ndim() != 4 || wv.dim(1) != xv.dim(0) || wv.dim(2) != wv.dim(3)) {
    throw std::invalid_argument("conv2d: expected x {C,H,W}, w {OC,C,K,K}");
  }
  const int C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  const int OC = wv.dim(0), K = wv.dim(2);
  const int OH = conv_out_size(H, K, stride, pad), OW = conv_out_size(W, K, stride, pad);
  const int64_t ckk = static_cast<int64_t>(C) * K * K;
  const int64_t osz = static_cast<int64_t>(OH) * OW;

  std::vector<float> col(ckk * osz);
  im2col(xv.data(), C, H, W, OH, OW, K, stride, pad, col.data());

  Tensor out({OC, OH, OW});
  {
    ECMap wm(wv.data(), OC, ckk);
    ECMap cm(col.data(), ckk, osz);
    EMap om(out.data(), OC, osz);
    om.noalias() = wm * cm;
  }
  if (bias.defined()) {
    const Tensor& bv = bias.val();
    for (int oc = 0; oc < OC; ++oc) {
      float b = bv[oc];
      for (int64_t i = 0; i < osz; ++i) out[oc * osz + i] += b;
    }
  }

  std::vector<Var> parents = {x, w};
  if (bias.defined()) parents.push_back(bias);
  return make_op(std::move(out), std::move(parents),
                 [C, H, W, OC, K, stride, pad, OH, OW, ckk, osz](Node& n) {
                   Node& px = *n.parents[0];
                   Node& pw = *n.parents[1];
                   ECMap gym(n.grad.data(), OC, osz);
                   // im2col is recomputed here to keep forward memory small.
                   std::vector<float> col(ckk * osz);
                   im2col(px.value.data(), C, H, W, OH, OW, K, stride, pad, col.data());
                   ECMap cm(col.data(), ckk, osz);
                   if (pw.requires_grad) {
                     EMap gwm(pw.ensure_grad().data(), OC, ckk);
                     gwm.noalias() += gym * cm.transpose();
                   }
                   if (px.requires_grad) {
                     std::vector<float> gcol(ckk * osz);
                     ECMap wm(pw.value.data(), OC, ckk);
                     EMap gcm(gcol.data(), ckk, osz);
                     gcm.noalias() = wm.transpose() * gym;
                     col2im(gcol.data(), C, H, W, OH, OW, K, stride, pad,
                            px.ensure_grad().data());
                   }
                   if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
                     Tensor& gb = n.parents[2]->ensure_grad();
                     for (int oc = 0; oc < OC; ++oc) {
                       double s = 0.0;
                       for (int64_t i = 0; i < osz; ++i) s += n.grad[oc * osz + i];
                       gb[oc] += static_cast<float>(s);
                     }
                   }
                 });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int pad) {
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  if (xv.ndim() != 3 || wv.ndim() != 4 || wv.dim(0) != xv.dim(0) || wv.dim(2) != wv.dim(3)) {
    throw std::invalid_argument("conv_transpose2d: expected x {C,H,W}, w {C,OC,K,K}");
  }
  const int C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  const int OC = wv.dim(1), K = wv.dim(2);
  const int OH = (H - 1) * stride - 2 * pad + K;
  const int OW = (W - 1) * stride - 2 * pad + K;
  const int64_t ockk = static_cast<int64_t>(OC) * K * K;
  const int64_t isz = static_cast<int64_t>(H) * W;

  // M = W^T x, scattered onto the upsampled grid.
  std::vector<float> m(ockk * isz);
  {
    ECMap wm(wv.data(), C, ockk);
    ECMap xm(xv.data(), C, isz);
    EMap mm(m.data(), ockk, isz);
    mm.noalias() = wm.transpose() * xm;
  }
  Tensor out({OC, OH, OW});
  col2im(m.data(), OC, OH, OW, H, W, K, stride, pad, out.data());
  if (bias.defined()) {
    const Tensor& bv = bias.val();
    int64_t osz = static_cast<int64_t>(OH) * OW;
    for (int oc = 0; oc < OC; ++oc) {
      float b = bv[oc];
      for (int64_t i = 0; i < osz; ++i) out[oc * osz + i] += b;
    }
  }

  std::vector<Var> parents = {x, w};
  if (bias.defined()) parents.push_back(bias);
  return make_op(std::move(out), std::move(parents),
                 [C, H, W, OC, K, stride, pad, OH, OW, ockk, isz](Node& n) {
                   Node& px = *n.parents[0];
                   Node& pw = *n.parents[1];
                   std::vector<float> gm(ockk * isz);
                   im2col(n.grad.data(), OC, OH, OW, H, W, K, stride, pad, gm.data());
                   ECMap gmm(gm.data(), ockk, isz);
                   if (px.requires_grad) {
                     ECMap wm(pw.value.data(), C, ockk);
                     EMap gxm(px.ensure_grad().data(), C, isz);
                     gxm.noalias() += wm * gmm;
                   }
                   if (pw.requires_grad) {
                     ECMap xm(px.value.data(), C, isz);
                     EMap gwm(pw.ensure_grad().data(), C, ockk);
                     gwm.noalias() += xm * gmm.transpose();
                   }
                   if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
                     Tensor& gb = n.parents[2]->ensure_grad();
                     int64_t osz = static_cast<int64_t>(OH) * OW;
                     for (int oc = 0; oc < OC; ++oc) {
                       double s = 0.0;
                       for (int64_t i = 0; i < osz; ++i) s += n.grad[oc * osz + i];
                       gb[oc] += static_cast<float>(s);
                     }
                   }
                 });
}

Var instance_norm(const Var& x, float eps) {
  const Tensor& xv = x.val();
  if (xv.ndim() != 3) throw std::invalid_argument("instance_norm: expected {C,H,W}");
  const int C = xv.dim(0);
  const int64_t hw = static_cast<int64_t>(xv.dim(1)) * xv.dim(2);

  Tensor out(xv.shape());
  std::vector<float> inv_std(C);
  for (int c = 0; c < C; ++c) {
    const float* src = xv.data() + c * hw;
    double mean = 0.0;
    for (int64_t i = 0; i < hw; ++i) mean += src[i];
    mean /= static_cast<double>(hw);
    double var = 0.0;
    for (int64_t i = 0; i < hw; ++i) {
      double d = src[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(hw);
    float is = static_cast<float>(1.0 / std::sqrt(var + eps));
    inv_std[c] = is;
    float* dst = out.data() + c * hw;
    float m = static_cast<float>(mean);
    for (int64_t i = 0; i < hw; ++i) dst[i] = (src[i] - m) * is;
  }

  return make_op(std::move(out), {x}, [C, hw, inv_std = std::move(inv_std)](Node& n) {
    Tensor& gx = n.parents[0]->ensure_grad();
    for (int c = 0; c < C; ++c) {
      const float* yh = n.value.data() + c * hw;
      const float* gy = n.grad.data() + c * hw;
      double sum_gy = 0.0, sum_gy_yh = 0.0;
      for (int64_t i = 0; i < hw; ++i) {
        sum_gy += gy[i];
        sum_gy_yh += gy[i] * yh[i];
      }
      float mg = static_cast<float>(sum_gy / static_cast<double>(hw));
      float mgy = static_cast<float>(sum_gy_yh / static_cast<double>(hw));
      float is = inv_std[c];
      float* dst = gx.data() + c * hw;
      for (int64_t i = 0; i < hw; ++i) dst[i] += is * (gy[i] - mg - yh[i] * mgy);
    }
  });
}

Var maxpool2(const Var& x) {
  const Tensor& xv = x.val();
  if (xv.ndim() != 3 || xv.dim(1) % 2 != 0 || xv.dim(2) % 2 != 0) {
    throw std::invalid_argument("maxpool2: expected {C,H,W} with even H, W");
  }
  const int C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  const int OH = H / 2, OW = W / 2;
  Tensor out({C, OH, OW});
  std::vector<int64_t> argmax(static_cast<size_t>(C) * OH * OW);
  for (int c = 0; c < C; ++c) {
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox) {
        int64_t best_idx = 0;
        float best = -std::numeric_limits<float>::infinity();
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            int64_t idx = (static_cast<int64_t>(c) * H + (2 * oy + dy)) * W + (2 * ox + dx);
            if (xv[idx] > best) {
              best = xv[idx];
              best_idx = idx;
            }
          }
        }
        int64_t o = (static_cast<int64_t>(c) * OH + oy) * OW + ox;
        out[o] = best;
        argmax[static_cast<size_t>(o)] = best_idx;
      }
    }
  }
  return make_op(std::move(out), {x}, [argmax = std::move(argmax)](Node& n) {
    Tensor& gx = n.parents[0]->ensure_grad();
    for (int64_t o = 0; o < n.grad.numel(); ++o) gx[argmax[static_cast<size_t>(o)]] += n.grad[o];
  });
}

Var gram(const Var& f) {
  const Tensor& fv = f.val();
  if (fv.ndim() != 3) throw std::invalid_argument("gram: expected {C,H,W}");
  const int C = fv.dim(0);
  const int64_t hw = static_cast<int64_t>(fv.dim(1)) * fv.dim(2);
  Tensor out({C, C});
  {
    ECMap vm(fv.data(), C, hw);
    EMap gmat(out.data(), C, C);
    gmat.noalias() = vm * vm.transpose();
    // GEMM rounding is order-dependent; enforce the exact symmetry the
    // product has in exact arithmetic.
    for (int i = 0; i < C; ++i) {
      for (int j = i + 1; j < C; ++j) {
        float s = 0.5f * (gmat(i, j) + gmat(j, i));
        gmat(i, j) = s;
        gmat(j, i) = s;
      }
    }
  }
  return make_op(std::move(out), {f}, [C, hw](Node& n) {
    Node& pf = *n.parents[0];
    Tensor& gf = pf.ensure_grad();
    ECMap vm(pf.value.data(), C, hw);
    ECMap gg(n.grad.data(), C, C);
    EMap gfm(gf.data(), C, hw);
    gfm.noalias() += (gg + gg.transpose()) * vm;
  });
}

Var sn_sigma(const Var& w, const Tensor& u, const Tensor& v) {
  const Tensor& wv = w.val();
  const int rows = wv.dim(0);
  const int64_t cols = wv.numel() / rows;
  if (u.numel() != rows || v.numel() != cols) {
    throw std::invalid_argument("sn_sigma: u/v size mismatch");
  }
  ECMap wm(wv.data(), rows, cols);
  ECMap um(u.data(), rows, 1);
  ECMap vm(v.data(), cols, 1);
  float sigma = (um.transpose() * (wm * vm))(0, 0);
  return make_op(Tensor::scalar(sigma), {w}, [u, v, rows, cols](Node& n) {
    Tensor& gw = n.parents[0]->ensure_grad();
    float g = n.grad[0];
    for (int r = 0; r < rows; ++r) {
      for (int64_t c = 0; c < cols; ++c) gw[r * cols + c] += g * u[r] * v[c];
    }
  });
}

Var div_scalar_var(const Var& a, const Var& s) {
  if (s.val().numel() != 1) throw std::invalid_argument("div_scalar_var: divisor must be scalar");
  float sv = s.val()[0];
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out[i] = a.val()[i] / sv;
  return make_op(std::move(out), {a, s}, [sv](Node& n) {
    Node& pa = *n.parents[0];
    Node& ps = *n.parents[1];
    if (pa.requires_grad) {
      Tensor& ga = pa.ensure_grad();
      for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += n.grad[i] / sv;
    }
    if (ps.requires_grad) {
      double acc = 0.0;
      for (int64_t i = 0; i < n.grad.numel(); ++i) acc += n.grad[i] * pa.value[i];
      ps.ensure_grad()[0] += static_cast<float>(-acc / (static_cast<double>(sv) * sv));
    }
  });
}

float spectral_power_iteration(const Tensor& w, int rows, int cols, Tensor& u, Tensor& v) {
  ECMap wm(w.data(), rows, cols);
  Eigen::Map<Eigen::VectorXf> uv(u.data(), rows);
  Eigen::Map<Eigen::VectorXf> vv(v.data(), cols);
  constexpr float kEps = 1e-12f;
  vv = wm.transpose() * uv;
  vv /= (vv.norm() + kEps);
  uv = wm * vv;
  uv /= (uv.norm() + kEps);
  return uv.transpose() * (wm * vv);
}

}  // namespace kpst::nn
