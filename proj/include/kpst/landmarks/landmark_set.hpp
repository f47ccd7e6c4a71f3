#pragma once

#include <array>
#include <string>

namespace kpst::landmarks {

// 68-point face annotation, iBUG ordering:
// jaw 0-16, right brow 17-21, left brow 22-26, nose bridge 27-30,
// nose base 31-35, right eye 36-41, left eye 42-47, lips 48-67.
struct LandmarkSet {
  std::array<std::array<float, 2>, 68> pts{};  // [i] = {x, y}
  std::string image_id;

  float x(int i) const { return pts[static_cast<size_t>(i)][0]; }
  float y(int i) const { return pts[static_cast<size_t>(i)][1]; }
  void set(int i, float px, float py) { pts[static_cast<size_t>(i)] = {px, py}; }
};

inline constexpr int kJawBegin = 0, kJawEnd = 17;
inline constexpr int kBrowBegin = 17, kBrowEnd = 27;
inline constexpr int kNoseBegin = 27, kNoseEnd = 36;
inline constexpr int kRightEyeBegin = 36, kRightEyeEnd = 42;
inline constexpr int kLeftEyeBegin = 42, kLeftEyeEnd = 48;
inline constexpr int kLipBegin = 48, kLipEnd = 68;

}  // namespace kpst::landmarks
