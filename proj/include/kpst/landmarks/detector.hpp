#pragma once

#include <optional>

#include "kpst/data/image.hpp"
#include "kpst/landmarks/landmark_set.hpp"

namespace kpst::landmarks {

// Deterministic geometric detector for frontal faces against a plain
// background. Works from intensity structure alone: face blob from
// background contrast, eyes/brows/lips from dark components, remaining
// points synthesized from face geometry. Callers pass the sharpened 8-bit
// image; returns nullopt when no face-like structure is found.
//
// This is a classic-CV fallback intended for the procedural smoke data and
// similarly clean frontal shots. For photographic datasets, precompute
// landmarks with an external 68-point predictor into the JSON cache instead.
std::optional<LandmarkSet> detect_landmarks(const data::RawImage& sharpened);

}  // namespace kpst::landmarks
