#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kpst/core/rng.hpp"
#include "kpst/core/tensor.hpp"

namespace kpst::data {

enum class Domain { X_photo, Y_portrait };
enum class Aug { none, hflip, blur, noise };

const char* domain_name(Domain d);
const char* aug_name(Aug a);

// 8-bit interleaved RGB.
struct RawImage {
  int h = 0;
  int w = 0;
  std::vector<uint8_t> px;  // h*w*3
  std::string source_path;
  Domain domain = Domain::X_photo;

  static RawImage filled(int h, int w, uint8_t value, Domain domain = Domain::X_photo);

  uint8_t& at(int y, int x, int c) { return px[(static_cast<size_t>(y) * w + x) * 3 + c]; }
  uint8_t at(int y, int x, int c) const { return px[(static_cast<size_t>(y) * w + x) * 3 + c]; }
  bool valid() const { return h >= 1 && w >= 1 && px.size() == static_cast<size_t>(h) * w * 3; }
};

// Half-open rectangle [x0,x1) x [y0,y1).
struct CropBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Normalized training/eval sample: pixels {3,H,W} in [-1,1].
struct ImageSample {
  Tensor pixels;
  std::string id;
  Domain domain = Domain::X_photo;
  Aug aug = Aug::none;
};

// Returns the cropped region; no crop box means pass-through.
// Out-of-bounds or empty boxes are rejected.
RawImage load_and_crop(const RawImage& raw, const std::optional<CropBox>& box);

RawImage resize_bilinear(const RawImage& raw, int out_h, int out_w);
RawImage resize_to_canvas(const RawImage& raw, int size = 256);

// High-boost response before clamping, as {3,H,W} real values:
// convolution with (1/9)*[[-1,-1,-1],[-1,9A-1,-1],[-1,-1,-1]], replicated border.
Tensor sharpen_response(const RawImage& raw, float boost_a);
// Same, clamped to [0,255] and rounded back to 8 bits.
RawImage sharpen_high_boost(const RawImage& raw, float boost_a);

// [0,255] -> [-1,1] as p/127.5 - 1.
ImageSample normalize(const RawImage& raw, std::string id);
// [-1,1] -> [0,255] with rounding; inverse of normalize up to +-1 intensity.
RawImage denormalize(const Tensor& pixels);

// hflip mirrors columns; blur is a normalized 5x5 Gaussian (replicated
// border); noise adds zero-mean Gaussian then clamps to [-1,1].
ImageSample augment(const ImageSample& sample, Aug aug, Rng& rng, float noise_sigma = 0.05f,
                    float blur_sigma = 1.0f);

}  // namespace kpst::data
