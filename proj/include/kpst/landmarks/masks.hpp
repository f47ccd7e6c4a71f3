#pragma once

#include <array>
#include <vector>

#include "kpst/core/tensor.hpp"
#include "kpst/landmarks/landmark_set.hpp"

namespace kpst::landmarks {

// Filled convex hull of the points with inclusive boundaries (a pixel center
// on the hull edge belongs to the mask), then dilated by a Chebyshev radius.
// Collinear point sets fall back to a 1-px polyline through the points.
Tensor fill_hull_mask(const std::vector<std::array<float, 2>>& pts, int h, int w,
                      int dilation_px);

Tensor build_eye_mask(const LandmarkSet& lm, int h, int w, int dilation_px);
Tensor build_nose_mask(const LandmarkSet& lm, int h, int w, int dilation_px);
Tensor build_lip_mask(const LandmarkSet& lm, int h, int w, int dilation_px);

// Full-width band of rows strictly above the minimum eyebrow y; empty when
// that minimum is <= 0.
Tensor build_head_mask(const LandmarkSet& lm, int h, int w);

struct MaskBundle {
  Tensor eye, nose, lip, head;
};

MaskBundle build_masks(const LandmarkSet& lm, int h, int w, int dilation_px);

int64_t mask_ones(const Tensor& mask);

}  // namespace kpst::landmarks
