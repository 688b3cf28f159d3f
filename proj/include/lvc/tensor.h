#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvc/common.h"

namespace lvc {

struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;

  bool operator==(const Shape&) const = default;
  int64_t numel() const { return int64_t(c) * h * w; }
  std::string str() const;
};

// Dense float32 image-plane tensor, contiguous CHW. All pipeline math is
// float32; reductions that feed rate or distortion totals accumulate in
// double before narrowing.
struct Tensor {
  Shape shape;
  std::vector<float> v;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(s), v(size_t(s.numel()), 0.0f) {}
  Tensor(int c, int h, int w) : Tensor(Shape{c, h, w}) {}

  static Tensor full(Shape s, float value);

  float* data() { return v.data(); }
  const float* data() const { return v.data(); }
  int64_t numel() const { return shape.numel(); }

  float& at(int c, int y, int x) {
    return v[(size_t(c) * shape.h + y) * shape.w + x];
  }
  float at(int c, int y, int x) const {
    return v[(size_t(c) * shape.h + y) * shape.w + x];
  }

  bool all_finite() const;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);

double max_abs_diff(const Tensor& a, const Tensor& b);
bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace lvc
