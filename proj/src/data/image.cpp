#include "kpst/data/image.hpp"

#include <algorithm>
#include <cmath>

#include "kpst/core/errors.hpp"

namespace kpst::data {

const char* domain_name(Domain d) { return d == Domain::X_photo ? "x" : "y"; }

const char* aug_name(Aug a) {
  switch (a) {
    case Aug::none: return "none";
    case Aug::hflip: return "hflip";
    case Aug::blur: return "blur";
    case Aug::noise: return "noise";
  }
  return "none";
}

RawImage RawImage::filled(int h, int w, uint8_t value, Domain domain) {
  RawImage img;
  img.h = h;
  img.w = w;
  img.px.assign(static_cast<size_t>(h) * w * 3, value);
  img.domain = domain;
  return img;
}

RawImage load_and_crop(const RawImage& raw, const std::optional<CropBox>& box) {
  if (!raw.valid()) throw DataError("load_and_crop: empty image");
  if (!box) return raw;
  const CropBox& b = *box;
  if (b.x0 < 0 || b.y0 < 0 || b.x1 > raw.w || b.y1 > raw.h || b.x0 >= b.x1 || b.y0 >= b.y1) {
    throw DataError("load_and_crop: crop box out of bounds for " + raw.source_path);
  }
  RawImage out;
  out.h = b.y1 - b.y0;
  out.w = b.x1 - b.x0;
  out.px.resize(static_cast<size_t>(out.h) * out.w * 3);
  out.source_path = raw.source_path;
  out.domain = raw.domain;
  for (int y = 0; y < out.h; ++y) {
    const uint8_t* src = &raw.px[((static_cast<size_t>(y) + b.y0) * raw.w + b.x0) * 3];
    std::copy(src, src + static_cast<size_t>(out.w) * 3, &out.px[static_cast<size_t>(y) * out.w * 3]);
  }
  return out;
}

namespace {

// Center-aligned sample positions plus clamped tap pairs for one axis.
struct TapTable {
  std::vector<int> lo, hi;
  std::vector<float> frac;
};

TapTable make_taps(int in, int out) {
  TapTable t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    double f = std::floor(src);
    int lo = static_cast<int>(f);
    t.frac[i] = static_cast<float>(src - f);
    t.lo[i] = std::clamp(lo, 0, in - 1);
    t.hi[i] = std::clamp(lo + 1, 0, in - 1);
  }
  return t;
}

}  // namespace

RawImage resize_bilinear(const RawImage& raw, int out_h, int out_w) {
  if (!raw.valid()) throw DataError("resize_bilinear: empty image");
  if (out_h == raw.h && out_w == raw.w) return raw;
  TapTable ty = make_taps(raw.h, out_h);
  TapTable tx = make_taps(raw.w, out_w);

  // Horizontal pass into float, then vertical pass.
  std::vector<float> mid(static_cast<size_t>(raw.h) * out_w * 3);
  for (int y = 0; y < raw.h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      float fx = tx.frac[x];
      for (int c = 0; c < 3; ++c) {
        float a = raw.at(y, tx.lo[x], c);
        float b = raw.at(y, tx.hi[x], c);
        mid[(static_cast<size_t>(y) * out_w + x) * 3 + c] = a + (b - a) * fx;
      }
    }
  }
  RawImage out;
  out.h = out_h;
  out.w = out_w;
  out.px.resize(static_cast<size_t>(out_h) * out_w * 3);
  out.source_path = raw.source_path;
  out.domain = raw.domain;
  for (int y = 0; y < out_h; ++y) {
    float fy = ty.frac[y];
    const float* rlo = &mid[static_cast<size_t>(ty.lo[y]) * out_w * 3];
    const float* rhi = &mid[static_cast<size_t>(ty.hi[y]) * out_w * 3];
    for (int64_t i = 0; i < static_cast<int64_t>(out_w) * 3; ++i) {
      float v = rlo[i] + (rhi[i] - rlo[i]) * fy;
      out.px[static_cast<size_t>(y) * out_w * 3 + i] =
          static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

RawImage resize_to_canvas(const RawImage& raw, int size) { return resize_bilinear(raw, size, size); }

Tensor sharpen_response(const RawImage& raw, float boost_a) {
  if (!raw.valid()) throw DataError("sharpen_response: empty image");
  if (boost_a <= 0.0f) throw DataError("sharpen_response: boost must be > 0");
  const int h = raw.h, w = raw.w;
  const float center = (9.0f * boost_a - 1.0f) / 9.0f;
  const float side = -1.0f / 9.0f;
  Tensor out({3, h, w});
  auto clamp_y = [h](int y) { return std::clamp(y, 0, h - 1); };
  auto clamp_x = [w](int x) { return std::clamp(x, 0, w - 1); };
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            float k = (dy == 0 && dx == 0) ? center : side;
            acc += k * raw.at(clamp_y(y + dy), clamp_x(x + dx), c);
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

RawImage sharpen_high_boost(const RawImage& raw, float boost_a) {
  Tensor resp = sharpen_response(raw, boost_a);
  RawImage out;
  out.h = raw.h;
  out.w = raw.w;
  out.px.resize(raw.px.size());
  out.source_path = raw.source_path;
  out.domain = raw.domain;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < raw.h; ++y) {
      for (int x = 0; x < raw.w; ++x) {
        out.at(y, x, c) = static_cast<uint8_t>(std::clamp(std::lround(resp.at(c, y, x)), 0L, 255L));
      }
    }
  }
  return out;
}

ImageSample normalize(const RawImage& raw, std::string id) {
  if (!raw.valid()) throw DataError("normalize: empty image");
  ImageSample s;
  s.pixels = Tensor({3, raw.h, raw.w});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < raw.h; ++y) {
      for (int x = 0; x < raw.w; ++x) {
        s.pixels.at(c, y, x) = static_cast<float>(raw.at(y, x, c)) / 127.5f - 1.0f;
      }
    }
  }
  s.id = std::move(id);
  s.domain = raw.domain;
  return s;
}

RawImage denormalize(const Tensor& pixels) {
  if (pixels.ndim() != 3 || pixels.dim(0) != 3) throw DataError("denormalize: expected {3,H,W}");
  RawImage out;
  out.h = pixels.dim(1);
  out.w = pixels.dim(2);
  out.px.resize(static_cast<size_t>(out.h) * out.w * 3);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        float v = (pixels.at(c, y, x) + 1.0f) * 127.5f;
        out.at(y, x, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

namespace {

std::vector<float> gaussian_kernel(int radius, float sigma) {
  std::vector<float> k(static_cast<size_t>(2 * radius + 1));
  float sum = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    float v = std::exp(-0.5f * (i * i) / (sigma * sigma));
    k[static_cast<size_t>(i + radius)] = v;
    sum += v;
  }
  for (float& v : k) v /= sum;
  return k;
}

}  // namespace

ImageSample augment(const ImageSample& sample, Aug aug, Rng& rng, float noise_sigma,
                    float blur_sigma) {
  const Tensor& in = sample.pixels;
  const int h = in.dim(1), w = in.dim(2);
  ImageSample out = sample;
  out.aug = aug;
  switch (aug) {
    case Aug::none:
      return out;
    case Aug::hflip: {
      Tensor t(in.shape());
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) t.at(c, y, x) = in.at(c, y, w - 1 - x);
      out.pixels = std::move(t);
      return out;
    }
    case Aug::blur: {
      const int radius = 2;
      std::vector<float> k = gaussian_kernel(radius, blur_sigma);
      Tensor mid(in.shape());
      Tensor t(in.shape());
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int d = -radius; d <= radius; ++d)
              acc += k[static_cast<size_t>(d + radius)] * in.at(c, y, std::clamp(x + d, 0, w - 1));
            mid.at(c, y, x) = acc;
          }
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int d = -radius; d <= radius; ++d)
              acc += k[static_cast<size_t>(d + radius)] * mid.at(c, std::clamp(y + d, 0, h - 1), x);
            t.at(c, y, x) = acc;
          }
      }
      out.pixels = std::move(t);
      return out;
    }
    case Aug::noise: {
      Tensor t(in.shape());
      for (int64_t i = 0; i < in.numel(); ++i) {
        t[i] = std::clamp(in[i] + rng.gaussian(0.0f, noise_sigma), -1.0f, 1.0f);
      }
      out.pixels = std::move(t);
      return out;
    }
  }
  return out;
}

}  // namespace kpst::data
