#include "kpst/landmarks/masks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kpst::landmarks {

namespace {

using Pt = std::array<float, 2>;

double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (static_cast<double>(a[0]) - o[0]) * (static_cast<double>(b[1]) - o[1]) -
         (static_cast<double>(a[1]) - o[1]) * (static_cast<double>(b[0]) - o[0]);
}

// Andrew monotone chain; returns the hull in counter-clockwise order
// (image coordinates). Collinear inputs collapse to 2 points or fewer.
std::vector<Pt> convex_hull(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Pt> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

void plot(Tensor& mask, int h, int w, int y, int x) {
  if (y >= 0 && y < h && x >= 0 && x < w) mask[static_cast<int64_t>(y) * w + x] = 1.0f;
}

void bresenham(Tensor& mask, int h, int w, int x0, int y0, int x1, int y1) {
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    plot(mask, h, w, y0, x0);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

Tensor dilate_chebyshev(const Tensor& mask, int h, int w, int radius) {
  Tensor cur = mask;
  for (int pass = 0; pass < radius; ++pass) {
    Tensor next({h, w});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float v = 0.0f;
        for (int dy = -1; dy <= 1 && v == 0.0f; ++dy) {
          int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            if (cur[static_cast<int64_t>(yy) * w + xx] > 0.0f) {
              v = 1.0f;
              break;
            }
          }
        }
        next[static_cast<int64_t>(y) * w + x] = v;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

Tensor fill_hull_mask(const std::vector<Pt>& pts, int h, int w, int dilation_px) {
  Tensor mask({h, w});
  if (pts.empty()) return mask;

  std::vector<Pt> hull = convex_hull(pts);
  if (hull.size() <= 2) {
    // Degenerate (single point or collinear): 1-px polyline through the
    // original sequence, which covers the full collinear extent.
    int px = static_cast<int>(std::lround(pts[0][0]));
    int py = static_cast<int>(std::lround(pts[0][1]));
    plot(mask, h, w, py, px);
    for (size_t i = 1; i < pts.size(); ++i) {
      int qx = static_cast<int>(std::lround(pts[i][0]));
      int qy = static_cast<int>(std::lround(pts[i][1]));
      bresenham(mask, h, w, px, py, qx, qy);
      px = qx;
      py = qy;
    }
  } else {
    constexpr double kEps = 1e-6;
    double ymin = std::numeric_limits<double>::max(), ymax = -ymin;
    for (const Pt& p : hull) {
      ymin = std::min(ymin, static_cast<double>(p[1]));
      ymax = std::max(ymax, static_cast<double>(p[1]));
    }
    int y0 = std::max(0, static_cast<int>(std::ceil(ymin - kEps)));
    int y1 = std::min(h - 1, static_cast<int>(std::floor(ymax + kEps)));
    size_t n = hull.size();
    for (int y = y0; y <= y1; ++y) {
      double lo = std::numeric_limits<double>::max(), hi = -lo;
      for (size_t i = 0; i < n; ++i) {
        const Pt& p = hull[i];
        const Pt& q = hull[(i + 1) % n];
        double py = p[1], qy = q[1];
        if (std::fabs(py - qy) <= kEps) {
          if (std::fabs(y - py) <= kEps) {
            lo = std::min({lo, static_cast<double>(p[0]), static_cast<double>(q[0])});
            hi = std::max({hi, static_cast<double>(p[0]), static_cast<double>(q[0])});
          }
          continue;
        }
        if (y < std::min(py, qy) - kEps || y > std::max(py, qy) + kEps) continue;
        double t = (y - py) / (qy - py);
        double x = p[0] + t * (q[0] - p[0]);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      if (lo > hi) continue;
      int x0 = std::max(0, static_cast<int>(std::ceil(lo - kEps)));
      int x1 = std::min(w - 1, static_cast<int>(std::floor(hi + kEps)));
      for (int x = x0; x <= x1; ++x) mask[static_cast<int64_t>(y) * w + x] = 1.0f;
    }
  }

  if (dilation_px > 0) mask = dilate_chebyshev(mask, h, w, dilation_px);
  return mask;
}

namespace {

std::vector<Pt> slice(const LandmarkSet& lm, int begin, int end) {
  std::vector<Pt> pts;
  pts.reserve(static_cast<size_t>(end - begin));
  for (int i = begin; i < end; ++i) pts.push_back(lm.pts[static_cast<size_t>(i)]);
  return pts;
}

}  // namespace

Tensor build_eye_mask(const LandmarkSet& lm, int h, int w, int dilation_px) {
  Tensor right = fill_hull_mask(slice(lm, kRightEyeBegin, kRightEyeEnd), h, w, dilation_px);
  Tensor left = fill_hull_mask(slice(lm, kLeftEyeBegin, kLeftEyeEnd), h, w, dilation_px);
  for (int64_t i = 0; i < right.numel(); ++i) {
    if (left[i] > 0.0f) right[i] = 1.0f;
  }
  return right;
}

Tensor build_nose_mask(const LandmarkSet& lm, int h, int w, int dilation_px) {
  return fill_hull_mask(slice(lm, kNoseBegin, kNoseEnd), h, w, dilation_px);
}

Tensor build_lip_mask(const LandmarkSet& lm, int h, int w, int dilation_px) {
  return fill_hull_mask(slice(lm, kLipBegin, kLipEnd), h, w, dilation_px);
}

Tensor build_head_mask(const LandmarkSet& lm, int h, int w) {
  float y_top = std::numeric_limits<float>::max();
  for (int i = kBrowBegin; i < kBrowEnd; ++i) y_top = std::min(y_top, lm.y(i));
  Tensor mask({h, w});
  if (y_top <= 0.0f) return mask;  // nothing above the brows: empty band
  for (int y = 0; y < h && static_cast<float>(y) < y_top; ++y) {
    for (int x = 0; x < w; ++x) mask[static_cast<int64_t>(y) * w + x] = 1.0f;
  }
  return mask;
}

MaskBundle build_masks(const LandmarkSet& lm, int h, int w, int dilation_px) {
  MaskBundle b;
  b.eye = build_eye_mask(lm, h, w, dilation_px);
  b.nose = build_nose_mask(lm, h, w, dilation_px);
  b.lip = build_lip_mask(lm, h, w, dilation_px);
  b.head = build_head_mask(lm, h, w);
  return b;
}

int64_t mask_ones(const Tensor& mask) {
  int64_t n = 0;
  for (int64_t i = 0; i < mask.numel(); ++i) {
    if (mask[i] > 0.0f) ++n;
  }
  return n;
}

}  // namespace kpst::landmarks
