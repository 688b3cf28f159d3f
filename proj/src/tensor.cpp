#include "lvc/tensor.h"

#include <cmath>
#include <cstring>

namespace lvc {

std::string Shape::str() const {
  return "(" + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor Tensor::full(Shape s, float value) {
  Tensor t(s);
  std::fill(t.v.begin(), t.v.end(), value);
  return t;
}

bool Tensor::all_finite() const {
  for (float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  LVC_CHECK(a.shape == b.shape, "tensor add shape mismatch ", a.shape.str(),
            " vs ", b.shape.str());
  Tensor out(a.shape);
  for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] + b.v[i];
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  LVC_CHECK(a.shape == b.shape, "tensor sub shape mismatch ", a.shape.str(),
            " vs ", b.shape.str());
  Tensor out(a.shape);
  for (size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] - b.v[i];
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  LVC_CHECK(a.shape == b.shape, "shape mismatch in max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i)
    m = std::max(m, std::abs(double(a.v[i]) - double(b.v[i])));
  return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!(a.shape == b.shape)) return false;
  return std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(float)) == 0;
}

}  // namespace lvc
