#pragma once

#include <array>
#include <vector>

#include "kpst/data/image.hpp"

namespace kpst::evaluation {

// Peak signal-to-noise ratio in dB over all RGB samples of two equally-sized
// 8-bit images, MAX = 255, mean squared error in the denominator. Identical
// images cap at 100 dB. Throws UsageError on a size mismatch.
double psnr(const data::RawImage& a, const data::RawImage& b);

// Mean local SSIM between the Rec.601 grayscales of two equally-sized 8-bit
// images: 11x11 Gaussian window (sigma 1.5) fully inside the frame, standard
// form with C1 = (0.01*255)^2 and C2 = (0.03*255)^2. Throws UsageError on a
// size mismatch or when either side of the frame is under 11 px.
double ssim(const data::RawImage& a, const data::RawImage& b);

// Fixed center-heavy weights applied to the ascending sort (sum 120).
inline constexpr std::array<double, 5> kBalanceWeights = {10, 25, 50, 25, 10};

struct WeightedMean {
  std::array<double, 5> sorted{};  // input values, ascending
  double w_avg = 0.0;
};

// Sorts the five values ascending and takes the kBalanceWeights average.
// Throws UsageError unless exactly 5 values are given.
WeightedMean weighted_mean(const std::vector<double>& values);

// Squared distance of one variant's aggregate from the weighted mean.
double balance_error(double w_avg, double x_i);

}  // namespace kpst::evaluation
