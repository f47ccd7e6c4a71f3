#include <cmath>

#include "doctest.h"
#include "kpst/data/image.hpp"
#include "kpst/data/synthetic.hpp"
#include "kpst/landmarks/detector.hpp"
#include "kpst/landmarks/masks.hpp"
#include "oracles.hpp"

using namespace kpst;
using namespace kpst::landmarks;

namespace {

std::vector<std::array<float, 2>> to_float(const std::vector<std::array<long, 2>>& pts) {
  std::vector<std::array<float, 2>> out;
  for (const auto& p : pts) out.push_back({static_cast<float>(p[0]), static_cast<float>(p[1])});
  return out;
}

}  // namespace

TEST_CASE("hull fill: axis-aligned square of side 10 has 121 pixels inclusive") {
  std::vector<std::array<float, 2>> square = {
      {100, 100}, {110, 100}, {110, 110}, {100, 110}};
  Tensor mask = fill_hull_mask(square, 256, 256, 0);
  CHECK(mask_ones(mask) == 121);
  for (int y = 100; y <= 110; ++y)
    for (int x = 100; x <= 110; ++x) REQUIRE(mask[y * 256 + x] == 1.0f);
}

TEST_CASE("hull fill: dilation is monotone and grows the square as expected") {
  std::vector<std::array<float, 2>> square = {
      {100, 100}, {110, 100}, {110, 110}, {100, 110}};
  Tensor m0 = fill_hull_mask(square, 256, 256, 0);
  Tensor m2 = fill_hull_mask(square, 256, 256, 2);
  for (int64_t i = 0; i < m0.numel(); ++i) {
    if (m0[i] > 0) REQUIRE(m2[i] > 0);
  }
  CHECK(mask_ones(m2) == 15 * 15);  // Chebyshev radius 2 around an 11x11 square
}

TEST_CASE("hull fill matches the per-pixel point-in-hull oracle on random fixtures") {
  Rng rng(301);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + static_cast<int>(rng.uniform_int(9));
    std::vector<std::array<long, 2>> pts;
    for (int i = 0; i < n; ++i) {
      pts.push_back({20 + rng.uniform_int(60), 20 + rng.uniform_int(60)});
    }
    Tensor mask = fill_hull_mask(to_float(pts), 100, 100, 0);
    for (int y = 0; y < 100; ++y) {
      for (int x = 0; x < 100; ++x) {
        bool want = oracles::point_in_hull_ref(x, y, pts);
        bool got = mask[y * 100 + x] > 0.0f;
        REQUIRE(got == want);
      }
    }
  }
}

TEST_CASE("hull fill: collinear points fall back to a polyline") {
  std::vector<std::array<float, 2>> line = {{10, 10}, {30, 10}, {20, 10}};
  Tensor mask = fill_hull_mask(line, 64, 64, 0);
  CHECK(mask_ones(mask) == 21);  // horizontal run 10..30 inclusive
  for (int x = 10; x <= 30; ++x) REQUIRE(mask[10 * 64 + x] == 1.0f);

  std::vector<std::array<float, 2>> point = {{5, 7}};
  Tensor dot = fill_hull_mask(point, 64, 64, 0);
  CHECK(mask_ones(dot) == 1);
  CHECK(dot[7 * 64 + 5] == 1.0f);
}

TEST_CASE("head mask: row counts forced by the minimum eyebrow y") {
  LandmarkSet lm;
  for (int i = 0; i < 68; ++i) lm.set(i, 128.0f, 128.0f);
  for (int i = kBrowBegin; i < kBrowEnd; ++i) lm.set(i, 100.0f + i, 90.0f + i);
  lm.set(20, 120.0f, 80.0f);  // the minimum
  Tensor mask = build_head_mask(lm, 256, 256);
  CHECK(mask_ones(mask) == 80 * 256);

  // Every 1-row lies above every 0-row.
  int last_one = -1, first_zero = 256;
  for (int y = 0; y < 256; ++y) {
    bool any = false;
    for (int x = 0; x < 256; ++x) any = any || mask[y * 256 + x] > 0;
    if (any) last_one = y;
    else first_zero = std::min(first_zero, y);
  }
  CHECK(last_one < first_zero);

  // Translating all landmarks down 10 px adds exactly 10 rows.
  LandmarkSet shifted = lm;
  for (int i = 0; i < 68; ++i) shifted.set(i, lm.x(i), lm.y(i) + 10.0f);
  CHECK(mask_ones(build_head_mask(shifted, 256, 256)) == 90 * 256);

  // Brow at the top edge: empty band.
  LandmarkSet top = lm;
  top.set(20, 120.0f, 0.0f);
  CHECK(mask_ones(build_head_mask(top, 256, 256)) == 0);
}

TEST_CASE("component masks translate with the landmarks") {
  data::SyntheticFace f = data::make_synthetic_face(256, 5, data::Domain::X_photo, "t");
  MaskBundle base = build_masks(f.lm, 256, 256, 3);
  LandmarkSet moved = f.lm;
  for (int i = 0; i < 68; ++i) moved.set(i, f.lm.x(i) + 7.0f, f.lm.y(i) + 5.0f);
  MaskBundle shifted = build_masks(moved, 256, 256, 3);
  for (int y = 0; y < 256 - 5; ++y) {
    for (int x = 0; x < 256 - 7; ++x) {
      REQUIRE(shifted.eye[(y + 5) * 256 + (x + 7)] == base.eye[y * 256 + x]);
      REQUIRE(shifted.lip[(y + 5) * 256 + (x + 7)] == base.lip[y * 256 + x]);
    }
  }
  CHECK(mask_ones(base.eye) > 0);
  CHECK(mask_ones(base.nose) > 0);
  CHECK(mask_ones(base.lip) > 0);
  CHECK(mask_ones(base.head) > 0);
}

TEST_CASE("detector: synthetic faces within 5 px RMS of analytic annotation") {
  for (uint64_t seed : {1, 2, 3, 4}) {
    for (auto domain : {data::Domain::X_photo, data::Domain::Y_portrait}) {
      data::SyntheticFace f = data::make_synthetic_face(256, seed, domain, "fix");
      data::RawImage sharp = data::sharpen_high_boost(f.image, 1.5f);
      auto lm = detect_landmarks(sharp);
      REQUIRE_MESSAGE(lm.has_value(), "seed ", seed, " domain ",
                      data::domain_name(domain));
      double se = 0.0;
      for (int i = 0; i < 68; ++i) {
        double dx = lm->x(i) - f.lm.x(i);
        double dy = lm->y(i) - f.lm.y(i);
        se += dx * dx + dy * dy;
      }
      double rms = std::sqrt(se / 68.0);
      CHECK_MESSAGE(rms <= 5.0, "rms ", rms, " seed ", seed, " domain ",
                    data::domain_name(domain));
    }
  }
}

TEST_CASE("detector: blank image yields no face; detection is deterministic") {
  data::RawImage blank = data::RawImage::filled(256, 256, 128);
  CHECK_FALSE(detect_landmarks(blank).has_value());

  data::SyntheticFace f = data::make_synthetic_face(256, 9, data::Domain::X_photo, "d");
  auto a = detect_landmarks(f.image);
  auto b = detect_landmarks(f.image);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  for (int i = 0; i < 68; ++i) {
    CHECK(a->x(i) == b->x(i));
    CHECK(a->y(i) == b->y(i));
  }
}

TEST_CASE("detector works at the smoke-test resolution") {
  for (uint64_t seed : {21, 22}) {
    for (auto domain : {data::Domain::X_photo, data::Domain::Y_portrait}) {
      data::SyntheticFace f = data::make_synthetic_face(64, seed, domain, "s");
      data::RawImage sharp = data::sharpen_high_boost(f.image, 1.5f);
      auto lm = detect_landmarks(sharp);
      REQUIRE_MESSAGE(lm.has_value(), "seed ", seed, " domain ",
                      data::domain_name(domain));
      float brow_min = 1e9f;
      for (int i = kBrowBegin; i < kBrowEnd; ++i) brow_min = std::min(brow_min, lm->y(i));
      CHECK(brow_min > 1.0f);  // head band must be nonempty for head loss
    }
  }
}
