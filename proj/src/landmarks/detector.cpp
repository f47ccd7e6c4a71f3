#include "kpst/landmarks/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <queue>
#include <vector>

namespace kpst::landmarks {

namespace {

struct Blob {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive bbox
  double cx = 0.0, cy = 0.0;
  int area = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  double aspect() const { return height() > 0 ? static_cast<double>(width()) / height() : 0.0; }
};

std::vector<float> to_gray(const data::RawImage& img) {
  std::vector<float> g(static_cast<size_t>(img.h) * img.w);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      g[static_cast<size_t>(y) * img.w + x] =
          0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
    }
  }
  return g;
}

// Median color of the 1-px image border, per channel.
std::array<int, 3> border_median_color(const data::RawImage& img) {
  std::array<std::vector<uint8_t>, 3> ring;
  auto push = [&](int y, int x) {
    for (int c = 0; c < 3; ++c) ring[static_cast<size_t>(c)].push_back(img.at(y, x, c));
  };
  for (int x = 0; x < img.w; ++x) {
    push(0, x);
    push(img.h - 1, x);
  }
  for (int y = 1; y < img.h - 1; ++y) {
    push(y, 0);
    push(y, img.w - 1);
  }
  std::array<int, 3> med{};
  for (int c = 0; c < 3; ++c) {
    auto& v = ring[static_cast<size_t>(c)];
    size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    med[static_cast<size_t>(c)] = v[mid];
  }
  return med;
}

// Background segmentation by flood fill from the border over pixels matching
// the border color. Everything unreachable is foreground, so halos and
// features enclosed by the face can never fall out of it, no matter how close
// their values sit to the background's.
std::vector<uint8_t> foreground_mask(const data::RawImage& img, int tol) {
  const int h = img.h, w = img.w;
  const std::array<int, 3> bg = border_median_color(img);
  auto is_bg_like = [&](int y, int x) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(static_cast<int>(img.at(y, x, c)) - bg[static_cast<size_t>(c)]) > tol)
        return false;
    }
    return true;
  };
  std::vector<uint8_t> flooded(static_cast<size_t>(h) * w, 0);
  std::queue<std::pair<int, int>> q;
  auto seed = [&](int y, int x) {
    size_t i = static_cast<size_t>(y) * w + x;
    if (!flooded[i] && is_bg_like(y, x)) {
      flooded[i] = 1;
      q.push({y, x});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(0, x);
    seed(h - 1, x);
  }
  for (int y = 0; y < h; ++y) {
    seed(y, 0);
    seed(y, w - 1);
  }
  while (!q.empty()) {
    auto [y, x] = q.front();
    q.pop();
    const int dy[4] = {-1, 1, 0, 0};
    const int dx[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      int ny = y + dy[k], nx = x + dx[k];
      if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
      seed(ny, nx);
    }
  }
  std::vector<uint8_t> fg(flooded.size());
  for (size_t i = 0; i < fg.size(); ++i) fg[i] = flooded[i] ? 0 : 1;
  return fg;
}

// 4-connected labeling of set pixels; returns blobs sorted by area descending.
std::vector<Blob> label_blobs(const std::vector<uint8_t>& set, int h, int w,
                              std::vector<int>* labels_out = nullptr) {
  std::vector<int> labels(set.size(), -1);
  std::vector<Blob> blobs;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      size_t si = static_cast<size_t>(sy) * w + sx;
      if (!set[si] || labels[si] >= 0) continue;
      int id = static_cast<int>(blobs.size());
      Blob b;
      b.x0 = b.x1 = sx;
      b.y0 = b.y1 = sy;
      std::queue<std::pair<int, int>> q;
      q.push({sy, sx});
      labels[si] = id;
      double sumx = 0.0, sumy = 0.0;
      while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop();
        ++b.area;
        sumx += x;
        sumy += y;
        b.x0 = std::min(b.x0, x);
        b.x1 = std::max(b.x1, x);
        b.y0 = std::min(b.y0, y);
        b.y1 = std::max(b.y1, y);
        const int dy[4] = {-1, 1, 0, 0};
        const int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          size_t ni = static_cast<size_t>(ny) * w + nx;
          if (set[ni] && labels[ni] < 0) {
            labels[ni] = id;
            q.push({ny, nx});
          }
        }
      }
      b.cx = sumx / b.area;
      b.cy = sumy / b.area;
      blobs.push_back(b);
    }
  }
  if (labels_out) *labels_out = std::move(labels);
  return blobs;  // in label order: blobs[k] has label k
}

}  // namespace

std::optional<LandmarkSet> detect_landmarks(const data::RawImage& sharpened) {
  if (!sharpened.valid()) return std::nullopt;
  const int h = sharpened.h, w = sharpened.w;
  const float s = static_cast<float>(std::min(h, w));
  std::vector<float> gray = to_gray(sharpened);

  // Face blob: largest connected region distinct from the background.
  std::vector<uint8_t> fg = foreground_mask(sharpened, 1);
  std::vector<int> fg_labels;
  std::vector<Blob> fg_blobs = label_blobs(fg, h, w, &fg_labels);
  int face_id = -1;
  for (size_t k = 0; k < fg_blobs.size(); ++k) {
    if (face_id < 0 || fg_blobs[k].area > fg_blobs[static_cast<size_t>(face_id)].area) {
      face_id = static_cast<int>(k);
    }
  }
  if (face_id < 0) return std::nullopt;
  const Blob face = fg_blobs[static_cast<size_t>(face_id)];
  if (face.area < 0.02 * s * s) return std::nullopt;

  // Intensity statistics inside the face component.
  std::vector<float> vals;
  vals.reserve(static_cast<size_t>(face.area));
  for (size_t i = 0; i < gray.size(); ++i) {
    if (fg_labels[i] == face_id) vals.push_back(gray[i]);
  }
  if (vals.empty()) return std::nullopt;
  // Skin level: a high quantile of the blob. The median would land on a dark
  // garment or hat when those dominate the region; skin is always the
  // brightest large mass, well clear of the thin bright halo tail.
  size_t hi = vals.size() * 4 / 5;
  std::nth_element(vals.begin(), vals.begin() + static_cast<long>(hi), vals.end());
  const float skin = vals[hi];
  const float vmin = *std::min_element(vals.begin(), vals.end());
  if (skin - vmin < 10.0f) return std::nullopt;  // featureless blob

  const float thr_dark = vmin + 0.45f * (skin - vmin);
  const float thr_mid = vmin + 0.80f * (skin - vmin);

  std::vector<uint8_t> dark(gray.size());
  for (size_t i = 0; i < gray.size(); ++i) {
    dark[i] = (fg_labels[i] == face_id && gray[i] < thr_dark) ? 1 : 0;
  }
  std::vector<int> dark_labels;
  std::vector<Blob> parts = label_blobs(dark, h, w, &dark_labels);
  if (std::getenv("KPST_LM_DEBUG")) {
    std::fprintf(stderr, "face area=%d bbox=(%d,%d)-(%d,%d) vmin=%.1f skin=%.1f thr_dark=%.1f thr_mid=%.1f\n",
                 face.area, face.x0, face.y0, face.x1, face.y1, vmin, skin, thr_dark, thr_mid);
    for (const Blob& b : parts) {
      if (b.area > 20)
        std::fprintf(stderr, "  dark blob area=%d bbox=(%d,%d)-(%d,%d) c=(%.1f,%.1f) aspect=%.2f\n",
                     b.area, b.x0, b.y0, b.x1, b.y1, b.cx, b.cy, b.aspect());
    }
  }

  // Large dark regions (hat, costume) are opaque to the jaw rays; small ones
  // (eyes, lips) are facial features the rays may cross.
  const double feature_amax = 0.05 * s * s;
  std::vector<uint8_t> blocked(gray.size(), 0);
  for (size_t i = 0; i < gray.size(); ++i) {
    if (dark_labels[i] >= 0 &&
        parts[static_cast<size_t>(dark_labels[i])].area > feature_amax) {
      blocked[i] = 1;
    }
  }

  // Candidate filtering for eye-like parts.
  const double amin = 0.0003 * s * s, amax = 0.03 * s * s;
  std::vector<Blob> cands;
  for (const Blob& b : parts) {
    if (b.area < amin || b.area > amax) continue;
    if (b.aspect() < 0.8 || b.aspect() > 8.0) continue;
    cands.push_back(b);
  }

  // Best horizontal pair: similar row, plausible separation, similar area.
  int ei = -1, ej = -1;
  double best = -1.0;
  for (size_t i = 0; i < cands.size(); ++i) {
    for (size_t j = i + 1; j < cands.size(); ++j) {
      const Blob &a = cands[i], &b = cands[j];
      if (std::fabs(a.cy - b.cy) > 0.05 * s) continue;
      double sep = std::fabs(a.cx - b.cx);
      if (sep < 0.10 * s || sep > 0.55 * s) continue;
      double ar = static_cast<double>(std::max(a.area, b.area)) / std::min(a.area, b.area);
      if (ar > 3.0) continue;
      double score = a.area + b.area + a.cy + b.cy;  // prefer larger and lower (eyes under brows)
      if (score > best) {
        best = score;
        ei = static_cast<int>(i);
        ej = static_cast<int>(j);
      }
    }
  }
  if (ei < 0) return std::nullopt;
  Blob eye_r = cands[static_cast<size_t>(ei)];
  Blob eye_l = cands[static_cast<size_t>(ej)];
  if (eye_r.cx > eye_l.cx) std::swap(eye_r, eye_l);  // right eye = image left

  const double eye_y = 0.5 * (eye_r.cy + eye_l.cy);
  const double eye_cx = 0.5 * (eye_r.cx + eye_l.cx);
  const double eye_sep = eye_l.cx - eye_r.cx;

  // Brows: a matching pair above the eyes; otherwise synthesized.
  const Blob *brow_r = nullptr, *brow_l = nullptr;
  for (const Blob& b : cands) {
    if (b.cy >= eye_y - 0.03 * s) continue;  // must sit clearly above the eyes
    if (eye_y - b.cy > 0.30 * s) continue;
    if (std::fabs(b.cx - eye_r.cx) < 0.06 * s && (!brow_r || b.cy > brow_r->cy)) brow_r = &b;
    if (std::fabs(b.cx - eye_l.cx) < 0.06 * s && (!brow_l || b.cy > brow_l->cy)) brow_l = &b;
  }

  // Lips: dark component below the eyes near the face midline.
  const Blob* lips = nullptr;
  for (const Blob& b : parts) {
    if (b.area < amin || b.area > feature_amax) continue;
    if (b.cy < eye_y + 0.15 * s) continue;
    if (std::fabs(b.cx - eye_cx) > 0.12 * s) continue;
    if (!lips || b.area > lips->area) lips = &b;
  }

  // Nose: mid-dark component between eyes and lips (may be faint).
  std::vector<uint8_t> midmask(gray.size());
  for (size_t i = 0; i < gray.size(); ++i) {
    midmask[i] = (fg_labels[i] == face_id && gray[i] < thr_mid && gray[i] >= thr_dark) ? 1 : 0;
  }
  std::vector<Blob> midparts = label_blobs(midmask, h, w);
  const Blob* nose = nullptr;
  double lip_y = lips ? lips->cy : eye_y + 0.32 * s;
  for (const Blob& b : midparts) {
    if (b.area < amin) continue;
    if (b.cy < eye_y + 0.02 * s || b.cy > lip_y - 0.02 * s) continue;
    if (std::fabs(b.cx - eye_cx) > 0.08 * s) continue;
    if (!nose || b.area > nose->area) nose = &b;
  }

  LandmarkSet lm;

  // Jaw: rays from eye-level center through the lower half of the face blob.
  {
    const double cx0 = eye_cx, cy0 = eye_y;
    for (int i = 0; i < 17; ++i) {
      double t = M_PI - i * (M_PI / 16.0);  // pi..0 sweeps left->chin->right
      double dx = std::cos(t), dy = std::sin(t);
      double px = cx0, py = cy0;
      double lx = cx0, ly = cy0;
      for (int step = 0; step < 4 * static_cast<int>(s); ++step) {
        px += 0.5 * dx;
        py += 0.5 * dy;
        int ix = static_cast<int>(std::lround(px)), iy = static_cast<int>(std::lround(py));
        if (ix < 0 || ix >= w || iy < 0 || iy >= h) break;
        size_t pi = static_cast<size_t>(iy) * w + ix;
        if (fg_labels[pi] != face_id || blocked[pi]) break;
        lx = px;
        ly = py;
      }
      lm.set(i, static_cast<float>(lx), static_cast<float>(ly));
    }
  }

  // Brows 17-26: five points along each brow bar (top edge), synthesized
  // above the eyes when no bar was detected.
  auto put_brow = [&lm](int base, double bx0, double bx1, double by) {
    for (int k = 0; k < 5; ++k) {
      double t = k / 4.0;
      lm.set(base + k, static_cast<float>(bx0 + t * (bx1 - bx0)), static_cast<float>(by));
    }
  };
  if (brow_r) {
    put_brow(17, brow_r->x0, brow_r->x1, brow_r->y0);
  } else {
    put_brow(17, eye_r.cx - 0.35 * eye_sep, eye_r.cx + 0.35 * eye_sep, eye_y - 0.24 * eye_sep);
  }
  if (brow_l) {
    put_brow(22, brow_l->x0, brow_l->x1, brow_l->y0);
  } else {
    put_brow(22, eye_l.cx - 0.35 * eye_sep, eye_l.cx + 0.35 * eye_sep, eye_y - 0.24 * eye_sep);
  }

  // Nose 27-35: bridge column then base row.
  {
    double nx = nose ? nose->cx : eye_cx;
    double ny0 = nose ? nose->y0 : eye_y + 0.19 * eye_sep;
    double ny1 = nose ? nose->y1 : eye_y + 0.625 * (lip_y - eye_y);
    double nhw = nose ? 0.5 * nose->width() : 0.08 * eye_sep;
    for (int k = 0; k < 4; ++k) {
      double t = k / 3.0;
      lm.set(27 + k, static_cast<float>(nx), static_cast<float>(ny0 + t * (ny1 - ny0)));
    }
    for (int k = 0; k < 5; ++k) {
      double t = k / 4.0;
      lm.set(31 + k, static_cast<float>(nx - nhw + t * 2.0 * nhw), static_cast<float>(ny1));
    }
  }

  // Eyes 36-47: hexagon on each eye component's bbox.
  auto put_eye = [&lm](int base, const Blob& e) {
    double x0 = e.x0, x1 = e.x1, y0 = e.y0, y1 = e.y1, yc = 0.5 * (e.y0 + e.y1);
    double w3 = (x1 - x0) / 3.0;
    lm.set(base + 0, static_cast<float>(x0), static_cast<float>(yc));
    lm.set(base + 1, static_cast<float>(x0 + w3), static_cast<float>(y0));
    lm.set(base + 2, static_cast<float>(x0 + 2 * w3), static_cast<float>(y0));
    lm.set(base + 3, static_cast<float>(x1), static_cast<float>(yc));
    lm.set(base + 4, static_cast<float>(x0 + 2 * w3), static_cast<float>(y1));
    lm.set(base + 5, static_cast<float>(x0 + w3), static_cast<float>(y1));
  };
  put_eye(36, eye_r);
  put_eye(42, eye_l);

  // Lips 48-67: outer ring (12) then inner ring (8) on the lip bbox,
  // synthesized from proportions when not detected.
  {
    double lx0, lx1, ly0, ly1;
    if (lips) {
      lx0 = lips->x0;
      lx1 = lips->x1;
      ly0 = lips->y0;
      ly1 = lips->y1;
    } else {
      lx0 = eye_cx - 0.35 * eye_sep;
      lx1 = eye_cx + 0.35 * eye_sep;
      ly0 = lip_y - 0.08 * eye_sep;
      ly1 = lip_y + 0.08 * eye_sep;
    }
    double lyc = 0.5 * (ly0 + ly1);
    lm.set(48, static_cast<float>(lx0), static_cast<float>(lyc));
    for (int k = 0; k < 5; ++k) {
      double t = (k + 1) / 6.0;
      lm.set(49 + k, static_cast<float>(lx0 + t * (lx1 - lx0)), static_cast<float>(ly0));
    }
    lm.set(54, static_cast<float>(lx1), static_cast<float>(lyc));
    for (int k = 0; k < 5; ++k) {
      double t = (k + 1) / 6.0;
      lm.set(55 + k, static_cast<float>(lx1 - t * (lx1 - lx0)), static_cast<float>(ly1));
    }
    double in = 0.25 * (ly1 - ly0);
    double ix0 = lx0 + 0.15 * (lx1 - lx0), ix1 = lx1 - 0.15 * (lx1 - lx0);
    lm.set(60, static_cast<float>(ix0), static_cast<float>(lyc));
    lm.set(61, static_cast<float>(ix0 + (ix1 - ix0) / 3.0), static_cast<float>(ly0 + in));
    lm.set(62, static_cast<float>(ix0 + 2.0 * (ix1 - ix0) / 3.0), static_cast<float>(ly0 + in));
    lm.set(63, static_cast<float>(ix1), static_cast<float>(lyc));
    lm.set(64, static_cast<float>(ix1 - (ix1 - ix0) / 3.0), static_cast<float>(ly1 - in));
    lm.set(65, static_cast<float>(ix0 + (ix1 - ix0) / 3.0), static_cast<float>(ly1 - in));
    lm.set(66, static_cast<float>(ix0), static_cast<float>(lyc));
    lm.set(67, static_cast<float>(ix1), static_cast<float>(lyc));
  }

  // Clamp everything into the frame.
  for (int i = 0; i < 68; ++i) {
    lm.set(i, std::clamp(lm.x(i), 0.0f, static_cast<float>(w - 1)),
           std::clamp(lm.y(i), 0.0f, static_cast<float>(h - 1)));
  }
  return lm;
}

}  // namespace kpst::landmarks
