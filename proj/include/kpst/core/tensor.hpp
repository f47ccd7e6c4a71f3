#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace kpst {

// Dense float32 tensor, row-major, last dimension fastest.
// Images and feature maps are {C,H,W}; matrices {R,C}; scalars {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape)
      : shape_(std::move(shape)), v_(numel_of(shape_), 0.0f) {}
  Tensor(std::vector<int> shape, std::vector<float> data)
      : shape_(std::move(shape)), v_(std::move(data)) {
    assert(static_cast<int64_t>(v_.size()) == numel_of(shape_));
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, float value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
  }
  static Tensor scalar(float value) { return Tensor({1}, {value}); }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(v_.size()); }
  bool defined() const { return !shape_.empty(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  float* data() { return v_.data(); }
  const float* data() const { return v_.data(); }
  float& operator[](int64_t i) { return v_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return v_[static_cast<size_t>(i)]; }

  // {C,H,W} accessors
  float& at(int c, int y, int x) {
    return v_[(static_cast<size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  float at(int c, int y, int x) const {
    return v_[(static_cast<size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  void fill(float value) { std::fill(v_.begin(), v_.end(), value); }
  void zero() { fill(0.0f); }

  static int64_t numel_of(const std::vector<int>& shape) {
    if (shape.empty()) return 0;
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<float> v_;
};

inline float max_abs(const Tensor& t) {
  float m = 0.0f;
  for (int64_t i = 0; i < t.numel(); ++i) {
    float a = t[i] < 0 ? -t[i] : t[i];
    if (a > m) m = a;
  }
  return m;
}

}  // namespace kpst
