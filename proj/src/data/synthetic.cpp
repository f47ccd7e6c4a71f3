#include "kpst/data/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "kpst/data/image_io.hpp"
#include "kpst/data/manifest.hpp"

namespace kpst::data {

namespace {

void fill_rect(RawImage& img, double x0, double y0, double x1, double y1, uint8_t r, uint8_t g,
               uint8_t b) {
  int ix0 = std::max(0, static_cast<int>(std::lround(x0)));
  int iy0 = std::max(0, static_cast<int>(std::lround(y0)));
  int ix1 = std::min(img.w - 1, static_cast<int>(std::lround(x1)));
  int iy1 = std::min(img.h - 1, static_cast<int>(std::lround(y1)));
  for (int y = iy0; y <= iy1; ++y) {
    for (int x = ix0; x <= ix1; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
}

void fill_ellipse(RawImage& img, double cx, double cy, double ax, double ay, uint8_t r, uint8_t g,
                  uint8_t b) {
  int y0 = std::max(0, static_cast<int>(std::floor(cy - ay)));
  int y1 = std::min(img.h - 1, static_cast<int>(std::ceil(cy + ay)));
  for (int y = y0; y <= y1; ++y) {
    double dy = (y - cy) / ay;
    double span = 1.0 - dy * dy;
    if (span < 0) continue;
    double half = ax * std::sqrt(span);
    int x0 = std::max(0, static_cast<int>(std::lround(cx - half)));
    int x1 = std::min(img.w - 1, static_cast<int>(std::lround(cx + half)));
    for (int x = x0; x <= x1; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
}

}  // namespace

SyntheticFace make_synthetic_face(int size, uint64_t seed, Domain domain, const std::string& id) {
  Rng rng(Rng::splitmix(seed ^ (domain == Domain::Y_portrait ? 0x79u : 0x78u)));
  const double s = size;

  // Jittered face geometry.
  const double cx = s * (0.50 + rng.uniform(-0.02, 0.02));
  const double cy = s * (0.55 + rng.uniform(-0.02, 0.02));
  const double ax = s * (0.30 + rng.uniform(-0.02, 0.02));
  const double ay = s * (0.38 + rng.uniform(-0.02, 0.02));

  const double eye_y = cy - 0.10 * s;
  const double eye_dx = 0.13 * s;
  const double eye_hw = 0.055 * s, eye_hh = 0.028 * s;
  const double brow_y = eye_y - 0.07 * s;
  const double brow_hw = 0.07 * s, brow_hh = 0.014 * s;
  const double nose_top = eye_y + 0.05 * s, nose_bot = cy + 0.10 * s, nose_hw = 0.024 * s;
  const double lip_y = cy + 0.22 * s;
  const double lip_hw = 0.075 * s, lip_hh = 0.026 * s;

  const bool portrait = domain == Domain::Y_portrait;
  const uint8_t bg = static_cast<uint8_t>(portrait ? 150 + rng.uniform_int(12)
                                                   : 208 + rng.uniform_int(12));
  const uint8_t skin = static_cast<uint8_t>(172 + rng.uniform_int(10));

  SyntheticFace out;
  RawImage& img = out.image;
  img = RawImage::filled(size, size, bg, domain);
  if (portrait) {
    // Costume band at the bottom, part of the portrait style.
    fill_rect(img, 0, cy + 0.55 * ay, s - 1, s - 1, 90, 60, 45);
  }
  fill_ellipse(img, cx, cy, ax, ay, skin, static_cast<uint8_t>(skin - 10),
               static_cast<uint8_t>(skin - 25));

  if (portrait) {
    // Gat: wide brim line plus a cylindrical crown, all above the brows.
    double brim_y = brow_y - 0.06 * s;
    fill_rect(img, cx - 0.30 * s, brim_y - 0.015 * s, cx + 0.30 * s, brim_y + 0.015 * s, 25, 22,
              20);
    fill_rect(img, cx - 0.16 * s, std::max(0.0, brim_y - 0.22 * s), cx + 0.16 * s, brim_y, 25, 22,
              20);
  }

  auto dark_rect = [&img](double x0, double y0, double x1, double y1, uint8_t v) {
    fill_rect(img, x0, y0, x1, y1, v, v, v);
  };
  // Brows, eyes, nose, lips.
  dark_rect(cx - eye_dx - brow_hw, brow_y - brow_hh, cx - eye_dx + brow_hw, brow_y + brow_hh, 60);
  dark_rect(cx + eye_dx - brow_hw, brow_y - brow_hh, cx + eye_dx + brow_hw, brow_y + brow_hh, 60);
  dark_rect(cx - eye_dx - eye_hw, eye_y - eye_hh, cx - eye_dx + eye_hw, eye_y + eye_hh, 35);
  dark_rect(cx + eye_dx - eye_hw, eye_y - eye_hh, cx + eye_dx + eye_hw, eye_y + eye_hh, 35);
  fill_rect(img, cx - nose_hw, nose_top, cx + nose_hw, nose_bot, 120, 112, 100);
  dark_rect(cx - lip_hw, lip_y - lip_hh, cx + lip_hw, lip_y + lip_hh, 70);

  // Analytic landmarks matching the drawn geometry.
  landmarks::LandmarkSet& lm = out.lm;
  lm.image_id = id;
  // Jaw points: rays from the eye-level center intersected with the head
  // ellipse, sweeping left -> chin -> right.
  for (int i = 0; i < 17; ++i) {
    double t = M_PI - i * (M_PI / 16.0);
    double dx = std::cos(t), dy = std::sin(t);
    double oy = eye_y - cy;
    double qa = dx * dx / (ax * ax) + dy * dy / (ay * ay);
    double qb = 2.0 * dy * oy / (ay * ay);
    double qc = oy * oy / (ay * ay) - 1.0;
    double r = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
    lm.set(i, static_cast<float>(cx + r * dx), static_cast<float>(eye_y + r * dy));
  }
  auto put_brow = [&lm](int base, double x0, double x1, double y) {
    for (int k = 0; k < 5; ++k) {
      double t = k / 4.0;
      lm.set(base + k, static_cast<float>(x0 + t * (x1 - x0)), static_cast<float>(y));
    }
  };
  put_brow(17, cx - eye_dx - brow_hw, cx - eye_dx + brow_hw, brow_y - brow_hh);
  put_brow(22, cx + eye_dx - brow_hw, cx + eye_dx + brow_hw, brow_y - brow_hh);
  for (int k = 0; k < 4; ++k) {
    double t = k / 3.0;
    lm.set(27 + k, static_cast<float>(cx), static_cast<float>(nose_top + t * (nose_bot - nose_top)));
  }
  for (int k = 0; k < 5; ++k) {
    double t = k / 4.0;
    lm.set(31 + k, static_cast<float>(cx - nose_hw + t * 2.0 * nose_hw),
           static_cast<float>(nose_bot));
  }
  auto put_eye = [&lm](int base, double x0, double x1, double y0, double y1) {
    double yc = 0.5 * (y0 + y1), w3 = (x1 - x0) / 3.0;
    lm.set(base + 0, static_cast<float>(x0), static_cast<float>(yc));
    lm.set(base + 1, static_cast<float>(x0 + w3), static_cast<float>(y0));
    lm.set(base + 2, static_cast<float>(x0 + 2 * w3), static_cast<float>(y0));
    lm.set(base + 3, static_cast<float>(x1), static_cast<float>(yc));
    lm.set(base + 4, static_cast<float>(x0 + 2 * w3), static_cast<float>(y1));
    lm.set(base + 5, static_cast<float>(x0 + w3), static_cast<float>(y1));
  };
  put_eye(36, cx - eye_dx - eye_hw, cx - eye_dx + eye_hw, eye_y - eye_hh, eye_y + eye_hh);
  put_eye(42, cx + eye_dx - eye_hw, cx + eye_dx + eye_hw, eye_y - eye_hh, eye_y + eye_hh);
  {
    double lx0 = cx - lip_hw, lx1 = cx + lip_hw, ly0 = lip_y - lip_hh, ly1 = lip_y + lip_hh;
    double lyc = lip_y;
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
  for (int i = 0; i < 68; ++i) {
    lm.set(i, std::clamp(lm.x(i), 0.0f, static_cast<float>(size - 1)),
           std::clamp(lm.y(i), 0.0f, static_cast<float>(size - 1)));
  }
  return out;
}

void write_synthetic_dataset(const std::filesystem::path& root, int train_pairs, int test_pairs,
                             int size, uint64_t seed) {
  LandmarkCache truth;
  auto emit = [&](Domain d, const char* split, int index, uint64_t s) {
    char name[32];
    std::snprintf(name, sizeof(name), "%s%03d", d == Domain::X_photo ? "xf" : "yf", index);
    SyntheticFace face = make_synthetic_face(size, s, d, name);
    std::filesystem::path dir = root / (d == Domain::X_photo ? "x" : "y") / split;
    write_png(dir / (std::string(name) + ".png"), face.image);
    truth.put(face.lm);
  };
  int index = 0;
  for (int i = 0; i < train_pairs; ++i, ++index) {
    emit(Domain::X_photo, "train", index, Rng::splitmix(seed + static_cast<uint64_t>(index)));
    emit(Domain::Y_portrait, "train", index, Rng::splitmix(seed + 1000 + static_cast<uint64_t>(index)));
  }
  for (int i = 0; i < test_pairs; ++i, ++index) {
    emit(Domain::X_photo, "test", index, Rng::splitmix(seed + static_cast<uint64_t>(index)));
    emit(Domain::Y_portrait, "test", index, Rng::splitmix(seed + 1000 + static_cast<uint64_t>(index)));
  }
  truth.save(root / "landmarks_truth.json");
}

}  // namespace kpst::data
