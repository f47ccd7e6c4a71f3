#include "kpst/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kpst/core/errors.hpp"

namespace kpst::evaluation {

namespace {

constexpr int kWin = 11;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void check_same_size(const data::RawImage& a, const data::RawImage& b, const char* what) {
  if (!a.valid() || !b.valid()) throw UsageError(std::string(what) + ": invalid image");
  if (a.h != b.h || a.w != b.w) throw UsageError(std::string(what) + ": image sizes differ");
}

std::vector<double> to_gray(const data::RawImage& img) {
  std::vector<double> g(static_cast<size_t>(img.h) * img.w);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      g[static_cast<size_t>(y) * img.w + x] =
          0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
    }
  }
  return g;
}

std::array<double, kWin> gaussian_kernel() {
  std::array<double, kWin> k{};
  const double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable valid-region filter: output is (h - kWin + 1) x (w - kWin + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w) {
  static const std::array<double, kWin> k = gaussian_kernel();
  const int ow = w - kWin + 1;
  const int oh = h - kWin + 1;
  std::vector<double> rows(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[i] * img[static_cast<size_t>(y) * w + x + i];
      rows[static_cast<size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWin; ++i) s += k[i] * rows[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const data::RawImage& a, const data::RawImage& b) {
  check_same_size(a, b, "psnr");
  double se = 0.0;
  for (size_t i = 0; i < a.px.size(); ++i) {
    const double d = static_cast<double>(a.px[i]) - static_cast<double>(b.px[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.px.size());
  if (mse == 0.0) return 100.0;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const data::RawImage& a, const data::RawImage& b) {
  check_same_size(a, b, "ssim");
  if (a.h < kWin || a.w < kWin) {
    throw UsageError("ssim: image smaller than the 11x11 window");
  }
  const std::vector<double> ga = to_gray(a);
  const std::vector<double> gb = to_gray(b);
  const size_t n = ga.size();
  std::vector<double> gaa(n), gbb(n), gab(n);
  for (size_t i = 0; i < n; ++i) {
    gaa[i] = ga[i] * ga[i];
    gbb[i] = gb[i] * gb[i];
    gab[i] = ga[i] * gb[i];
  }
  const auto mu_a = filter_valid(ga, a.h, a.w);
  const auto mu_b = filter_valid(gb, a.h, a.w);
  const auto m_aa = filter_valid(gaa, a.h, a.w);
  const auto m_bb = filter_valid(gbb, a.h, a.w);
  const auto m_ab = filter_valid(gab, a.h, a.w);

  double sum = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cab = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cab + kC2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
    sum += num / den;
  }
  return sum / static_cast<double>(mu_a.size());
}

WeightedMean weighted_mean(const std::vector<double>& values) {
  if (values.size() != kBalanceWeights.size()) {
    throw UsageError("weighted_mean expects exactly 5 values");
  }
  WeightedMean out;
  std::copy(values.begin(), values.end(), out.sorted.begin());
  std::sort(out.sorted.begin(), out.sorted.end());
  double dot = 0.0, wsum = 0.0;
  for (size_t i = 0; i < out.sorted.size(); ++i) {
    dot += kBalanceWeights[i] * out.sorted[i];
    wsum += kBalanceWeights[i];
  }
  out.w_avg = dot / wsum;
  return out;
}

double balance_error(double w_avg, double x_i) {
  const double d = w_avg - x_i;
  return d * d;
}

}  // namespace kpst::evaluation
