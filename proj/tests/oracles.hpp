#pragma once

// Independent reference implementations used as test oracles. Everything here
// is written the slow, obvious way (nested loops, per-element finite
// differences) and must stay decoupled from the library code it checks.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "kpst/core/rng.hpp"
#include "kpst/core/tensor.hpp"
#include "kpst/data/image.hpp"
#include "kpst/nn/autograd.hpp"

namespace oracles {

inline kpst::Tensor random_tensor(std::vector<int> shape, kpst::Rng& rng,
                                  float lo = -1.0f, float hi = 1.0f) {
  kpst::Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Direct convolution, zero padding: x {C,H,W}, w {OC,IC,K,K}, bias {OC} or empty.
inline kpst::Tensor conv2d_ref(const kpst::Tensor& x, const kpst::Tensor& w,
                               const std::vector<float>& bias, int stride, int pad) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int OC = w.dim(0), K = w.dim(2);
  const int OH = (H + 2 * pad - K) / stride + 1;
  const int OW = (W + 2 * pad - K) / stride + 1;
  kpst::Tensor y({OC, OH, OW});
  for (int oc = 0; oc < OC; ++oc)
    for (int oy = 0; oy < OH; ++oy)
      for (int ox = 0; ox < OW; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[static_cast<size_t>(oc)];
        for (int ic = 0; ic < C; ++ic)
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              int iy = oy * stride - pad + ky;
              int ix = ox * stride - pad + kx;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              acc += static_cast<double>(x.at(ic, iy, ix)) *
                     w[((static_cast<int64_t>(oc) * C + ic) * K + ky) * K + kx];
            }
        y.at(oc, oy, ox) = static_cast<float>(acc);
      }
  return y;
}

// Direct transposed convolution by scatter: x {C,H,W}, w {IC,OC,K,K}.
inline kpst::Tensor conv_transpose2d_ref(const kpst::Tensor& x, const kpst::Tensor& w,
                                         const std::vector<float>& bias, int stride, int pad) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int OC = w.dim(1), K = w.dim(2);
  const int OH = (H - 1) * stride - 2 * pad + K;
  const int OW = (W - 1) * stride - 2 * pad + K;
  kpst::Tensor y({OC, OH, OW});
  for (int oc = 0; oc < OC && !bias.empty(); ++oc)
    for (int oy = 0; oy < OH; ++oy)
      for (int ox = 0; ox < OW; ++ox) y.at(oc, oy, ox) = bias[static_cast<size_t>(oc)];
  for (int ic = 0; ic < C; ++ic)
    for (int iy = 0; iy < H; ++iy)
      for (int ix = 0; ix < W; ++ix) {
        float xv = x.at(ic, iy, ix);
        for (int oc = 0; oc < OC; ++oc)
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              int oy = iy * stride - pad + ky;
              int ox = ix * stride - pad + kx;
              if (oy < 0 || oy >= OH || ox < 0 || ox >= OW) continue;
              y.at(oc, oy, ox) += xv * w[((static_cast<int64_t>(ic) * OC + oc) * K + ky) * K + kx];
            }
      }
  return y;
}

// Triple-nested-loop Gram matrix of {C,H,W}.
inline kpst::Tensor gram_ref(const kpst::Tensor& f) {
  const int C = f.dim(0);
  const int64_t M = static_cast<int64_t>(f.dim(1)) * f.dim(2);
  kpst::Tensor g({C, C});
  for (int i = 0; i < C; ++i)
    for (int j = 0; j < C; ++j) {
      double acc = 0.0;
      for (int64_t k = 0; k < M; ++k)
        acc += static_cast<double>(f[i * M + k]) * static_cast<double>(f[j * M + k]);
      g[static_cast<int64_t>(i) * C + j] = static_cast<float>(acc);
    }
  return g;
}

// Largest singular value of w viewed as rows x cols, via double-precision
// one-sided Jacobi on w^T w (no dependence on the library's power iteration).
inline double sigma_max_ref(const kpst::Tensor& w, int rows, int cols) {
  std::vector<std::vector<double>> a(static_cast<size_t>(rows), std::vector<double>(static_cast<size_t>(cols)));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a[static_cast<size_t>(r)][static_cast<size_t>(c)] = w[static_cast<int64_t>(r) * cols + c];
  // Gram of columns, then symmetric Jacobi eigenvalue sweep.
  int n = cols;
  std::vector<std::vector<double>> s(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int r = 0; r < rows; ++r) acc += a[static_cast<size_t>(r)][static_cast<size_t>(i)] * a[static_cast<size_t>(r)][static_cast<size_t>(j)];
      s[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
    }
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += s[static_cast<size_t>(p)][static_cast<size_t>(q)] * s[static_cast<size_t>(p)][static_cast<size_t>(q)];
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        double spq = s[static_cast<size_t>(p)][static_cast<size_t>(q)];
        if (std::fabs(spq) < 1e-300) continue;
        double theta = (s[static_cast<size_t>(q)][static_cast<size_t>(q)] - s[static_cast<size_t>(p)][static_cast<size_t>(p)]) / (2.0 * spq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (int k = 0; k < n; ++k) {
          double skp = s[static_cast<size_t>(k)][static_cast<size_t>(p)], skq = s[static_cast<size_t>(k)][static_cast<size_t>(q)];
          s[static_cast<size_t>(k)][static_cast<size_t>(p)] = c * skp - sn * skq;
          s[static_cast<size_t>(k)][static_cast<size_t>(q)] = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          double spk = s[static_cast<size_t>(p)][static_cast<size_t>(k)], sqk = s[static_cast<size_t>(q)][static_cast<size_t>(k)];
          s[static_cast<size_t>(p)][static_cast<size_t>(k)] = c * spk - sn * sqk;
          s[static_cast<size_t>(q)][static_cast<size_t>(k)] = sn * spk + c * sqk;
        }
      }
  }
  double lmax = 0.0;
  for (int i = 0; i < n; ++i) lmax = std::max(lmax, s[static_cast<size_t>(i)][static_cast<size_t>(i)]);
  return std::sqrt(std::max(0.0, lmax));
}

// High-boost response at one pixel: direct 3x3 convolution in double with
// replicated borders.
inline double sharpen_ref_at(const kpst::data::RawImage& img, int c, int y, int x, double a) {
  double acc = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      double k = (dy == 0 && dx == 0) ? (9.0 * a - 1.0) / 9.0 : -1.0 / 9.0;
      int yy = std::clamp(y + dy, 0, img.h - 1);
      int xx = std::clamp(x + dx, 0, img.w - 1);
      acc += k * img.at(yy, xx, c);
    }
  }
  return acc;
}

// Direct 4-tap bilinear sample with center-aligned coordinates, in double.
inline double bilinear_ref_at(const kpst::data::RawImage& img, int c, int oy, int ox, int out_h,
                              int out_w) {
  double sy = (oy + 0.5) * (static_cast<double>(img.h) / out_h) - 0.5;
  double sx = (ox + 0.5) * (static_cast<double>(img.w) / out_w) - 0.5;
  int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
  double fy = sy - y0, fx = sx - x0;
  auto tap = [&](int y, int x) {
    return static_cast<double>(img.at(std::clamp(y, 0, img.h - 1), std::clamp(x, 0, img.w - 1), c));
  };
  return (1 - fy) * ((1 - fx) * tap(y0, x0) + fx * tap(y0, x0 + 1)) +
         fy * ((1 - fx) * tap(y0 + 1, x0) + fx * tap(y0 + 1, x0 + 1));
}

// Inclusive membership of an integer point in the convex hull of integer
// points, by exact integer arithmetic: p is in the hull iff it lies in some
// triangle of input points or on some segment between two of them.
inline bool point_in_hull_ref(long px, long py, const std::vector<std::array<long, 2>>& pts) {
  auto cross = [](long ox, long oy, long ax, long ay, long bx, long by) {
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
  };
  size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    if (pts[i][0] == px && pts[i][1] == py) return true;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (cross(pts[i][0], pts[i][1], pts[j][0], pts[j][1], px, py) != 0) continue;
      if (px >= std::min(pts[i][0], pts[j][0]) && px <= std::max(pts[i][0], pts[j][0]) &&
          py >= std::min(pts[i][1], pts[j][1]) && py <= std::max(pts[i][1], pts[j][1])) {
        return true;
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      for (size_t k = j + 1; k < n; ++k) {
        long d1 = cross(pts[i][0], pts[i][1], pts[j][0], pts[j][1], px, py);
        long d2 = cross(pts[j][0], pts[j][1], pts[k][0], pts[k][1], px, py);
        long d3 = cross(pts[k][0], pts[k][1], pts[i][0], pts[i][1], px, py);
        long area = cross(pts[i][0], pts[i][1], pts[j][0], pts[j][1], pts[k][0], pts[k][1]);
        if (area == 0) continue;
        if ((d1 >= 0 && d2 >= 0 && d3 >= 0) || (d1 <= 0 && d2 <= 0 && d3 <= 0)) return true;
      }
    }
  }
  return false;
}

// ---- Finite-difference gradient harness --------------------------------
//
// Checks analytic gradients of a scalar-valued graph against Richardson-
// extrapolated central differences (5-point, O(h^4) truncation) so the
// oracle's own noise sits well below the comparison tolerance.

// Worst element over all leaves: ratio = |a - d| / (atol + rtol * max(|a|,|d|)).
// Agreement means ratio <= 1. atol absorbs the float32 forward noise floor at
// true-zero gradient entries; rtol is the advertised relative tolerance.
struct FdWorst {
  float ratio = 0.0f;
  int leaf = -1;
  int64_t index = -1;
  float analytic = 0.0f;
  float numeric = 0.0f;
};

// f rebuilds the graph from the current leaf values and returns a scalar Var.
inline FdWorst fd_check(const std::function<kpst::nn::Var()>& f,
                        std::vector<kpst::nn::Var> leaves,
                        float h = 0.05f, float rtol = 1e-3f, float atol = 2e-5f) {
  using kpst::nn::backward;
  using kpst::nn::NoGradGuard;
  for (auto& l : leaves) l.zero_grad();
  kpst::nn::Var out = f();
  backward(out);
  std::vector<kpst::Tensor> analytic;
  analytic.reserve(leaves.size());
  for (auto& l : leaves)
    analytic.push_back(l.has_grad() ? l.grad() : kpst::Tensor::zeros(l.val().shape()));

  auto eval = [&]() {
    NoGradGuard ng;
    return static_cast<double>(f().scalar());
  };

  FdWorst worst;
  for (size_t li = 0; li < leaves.size(); ++li) {
    kpst::Tensor& x = leaves[li].val();
    for (int64_t i = 0; i < x.numel(); ++i) {
      float keep = x[i];
      x[i] = keep + h;
      double f1 = eval();
      x[i] = keep - h;
      double fm1 = eval();
      x[i] = keep + 2 * h;
      double f2 = eval();
      x[i] = keep - 2 * h;
      double fm2 = eval();
      x[i] = keep;
      double d = (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * static_cast<double>(h));
      float a = analytic[li][i];
      float scale = std::max(std::fabs(a), static_cast<float>(std::fabs(d)));
      float ratio = static_cast<float>(std::fabs(a - d)) / (atol + rtol * scale);
      if (ratio > worst.ratio) {
        worst.ratio = ratio;
        worst.leaf = static_cast<int>(li);
        worst.index = i;
        worst.analytic = a;
        worst.numeric = static_cast<float>(d);
      }
    }
  }
  return worst;
}

}  // namespace oracles
