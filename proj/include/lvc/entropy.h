#pragma once

#include <cstdint>
#include <vector>

#include "lvc/autograd.h"
#include "lvc/rng.h"
#include "lvc/tensor.h"

namespace lvc {

// Entropy model contract, shared by the rate estimate and the range coder:
// integer symbols are modeled by a Gaussian interval probability floored at
// kPMin, scales are kept at or above kScaleFloor by their producers, and
// coder tables are fixed point with kCdfPrecisionBits of resolution. The
// precision is part of the bitstream format.
inline constexpr double kScaleFloor = 0.11;
inline constexpr int kCdfPrecisionBits = 16;
inline constexpr double kPMin = 1.0 / 65536.0;

// Integer symbol plane produced by quantizing a latent.
struct LatentCode {
  Shape shape;
  std::vector<int32_t> v;

  int64_t numel() const { return shape.numel(); }
};

// Per-element Gaussian parameters. scale must be >= kScaleFloor; mean/scale
// shapes must match the latent they condition.
struct EntropyParams {
  Tensor mean;
  Tensor scale;

  void validate(const Shape& latent_shape) const;
};

enum class QuantizeMode {
  Round,           // round half away from zero
  Noise,           // additive uniform noise in [-0.5, 0.5)
  StraightThrough  // rounded forward, identity gradient
};

// Training-path quantizer. Noise mode draws from rng (required). Round and
// StraightThrough share the same forward values.
Var quantize(const Var& x, QuantizeMode mode, Rng* rng);

// Inference-path quantizer to integer symbols.
LatentCode quantize_round(const Tensor& x);
Tensor dequantize(const LatentCode& code);

// Interval probability of integer v under N(mu, sigma^2), floored at p_min.
// Scalar double version used by the coder and by tests.
double gaussian_interval_probability(double v, double mu, double sigma,
                                     double p_min = kPMin);

// Total bits = sum of -log2(p). Likelihoods must lie in (0, 1].
double estimate_rate_bits(const std::vector<float>& likelihoods);

}  // namespace lvc
