#include "lvc/entropy.h"

#include <cmath>

namespace lvc {

void EntropyParams::validate(const Shape& latent_shape) const {
  LVC_CHECK(mean.shape == latent_shape && scale.shape == latent_shape,
            "entropy params must match latent shape ", latent_shape.str());
  for (float s : scale.v)
    LVC_CHECK(s >= float(kScaleFloor), "entropy scale ", s,
              " below floor ", kScaleFloor);
}

Var quantize(const Var& x, QuantizeMode mode, Rng* rng) {
  switch (mode) {
    case QuantizeMode::Round: {
      Tensor out(x->val.shape);
      for (size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = std::round(x->val.v[i]);
      return constant(std::move(out));
    }
    case QuantizeMode::Noise: {
      LVC_CHECK(rng != nullptr, "noise quantization requires an rng");
      Tensor noise(x->val.shape);
      for (auto& n : noise.v) n = float(rng->uniform() - 0.5);
      return add_const(x, noise);
    }
    case QuantizeMode::StraightThrough:
      return round_ste(x);
  }
  throw DataError("unknown quantize mode");
}

LatentCode quantize_round(const Tensor& x) {
  LatentCode code;
  code.shape = x.shape;
  code.v.resize(x.v.size());
  for (size_t i = 0; i < x.v.size(); ++i) {
    const float r = std::round(x.v[i]);
    LVC_CHECK(std::isfinite(r) && std::abs(r) < 2.0e9f,
              "latent out of integer range");
    code.v[i] = int32_t(r);
  }
  return code;
}

Tensor dequantize(const LatentCode& code) {
  Tensor t(code.shape);
  for (size_t i = 0; i < code.v.size(); ++i) t.v[i] = float(code.v[i]);
  return t;
}

double gaussian_interval_probability(double v, double mu, double sigma,
                                     double p_min) {
  LVC_CHECK(sigma > 0.0, "interval probability requires positive sigma");
  const double inv_sqrt2 = 0.7071067811865475244;
  const double a = (v - mu + 0.5) / sigma;
  const double b = (v - mu - 0.5) / sigma;
  const double p =
      0.5 * std::erfc(-a * inv_sqrt2) - 0.5 * std::erfc(-b * inv_sqrt2);
  return std::max(p, p_min);
}

double estimate_rate_bits(const std::vector<float>& likelihoods) {
  double acc = 0.0;
  for (float p : likelihoods) {
    LVC_CHECK(p > 0.0f && p <= 1.0f, "likelihood ", p, " outside (0,1]");
    acc -= std::log2(double(p));
  }
  return acc;
}

}  // namespace lvc
