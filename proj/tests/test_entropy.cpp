#include <doctest.h>

#include <cmath>

#include "lvc/entropy.h"
#include "lvc/rng.h"

using namespace lvc;

namespace {

// Independent interval probability from std::erf, written directly from the
// normal CDF definition.
double oracle_interval(double v, double mu, double sigma) {
  const auto cdf = [](double x) {
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  };
  return cdf((v - mu + 0.5) / sigma) - cdf((v - mu - 0.5) / sigma);
}

}  // namespace

TEST_SUITE("entropy") {
  TEST_CASE("interval probability of a centered unit gaussian") {
    const double p = gaussian_interval_probability(0.0, 0.0, 1.0);
    CHECK(p == doctest::Approx(oracle_interval(0, 0, 1)).epsilon(1e-12));
    CHECK(p == doctest::Approx(0.38292).epsilon(1e-5));
    const double bits = -std::log2(p);
    CHECK(bits == doctest::Approx(-std::log2(oracle_interval(0, 0, 1)))
                      .epsilon(1e-12));
    CHECK(bits == doctest::Approx(1.38487).epsilon(1e-4));
  }

  TEST_CASE("interval probabilities agree with the erf oracle broadly") {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
      const double mu = rng.uniform(-8.0, 8.0);
      const double sigma = rng.uniform(0.11, 6.0);
      const double v = std::floor(rng.uniform(-12.0, 12.0));
      const double want = std::max(oracle_interval(v, mu, sigma), kPMin);
      CHECK(gaussian_interval_probability(v, mu, sigma) ==
            doctest::Approx(want).epsilon(1e-10));
    }
  }

  TEST_CASE("far tail hits the floor exactly") {
    CHECK(gaussian_interval_probability(10.0, 0.0, 0.01) == kPMin);
    CHECK(gaussian_interval_probability(-500.0, 0.0, 1.0) == kPMin);
    // Custom floor is honored.
    CHECK(gaussian_interval_probability(10.0, 0.0, 0.01, 1e-9) == 1e-9);
    // Without a floor, the tail underflows toward zero but stays nonnegative.
    CHECK(gaussian_interval_probability(10.0, 0.0, 0.01, 0.0) >= 0.0);
    CHECK(gaussian_interval_probability(10.0, 0.0, 0.01, 0.0) < 1e-300);
  }

  TEST_CASE("unfloored masses over all integers sum to one") {
    for (double sigma : {0.11, 0.5, 1.0, 3.0}) {
      for (double mu : {0.0, 0.37, -2.6}) {
        double sum = 0.0;
        for (int v = -80; v <= 80; ++v)
          sum += gaussian_interval_probability(v, mu, sigma, 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("mass decreases away from the mean") {
    double prev = gaussian_interval_probability(0.0, 0.2, 1.3, 0.0);
    for (int v = 1; v <= 8; ++v) {
      const double p = gaussian_interval_probability(v, 0.2, 1.3, 0.0);
      CHECK(p < prev);
      prev = p;
    }
  }

  TEST_CASE("parameter validation") {
    const Shape s{2, 2, 2};
    EntropyParams ok{Tensor::full(s, 0.0f), Tensor::full(s, 0.11f)};
    CHECK_NOTHROW(ok.validate(s));
    EntropyParams low{Tensor::full(s, 0.0f), Tensor::full(s, 0.10f)};
    CHECK_THROWS_AS(low.validate(s), DataError);
    EntropyParams wrong{Tensor::full(Shape{1, 2, 2}, 0.0f),
                        Tensor::full(s, 0.2f)};
    CHECK_THROWS_AS(wrong.validate(s), DataError);
  }

  TEST_CASE("round quantizer uses half away from zero") {
    Tensor t(Shape{1, 1, 6});
    const float vals[] = {-1.5f, -0.5f, -0.2f, 0.2f, 0.5f, 2.5f};
    std::copy(std::begin(vals), std::end(vals), t.v.begin());
    const LatentCode code = quantize_round(t);
    CHECK(code.v == std::vector<int32_t>({-2, -1, 0, 0, 1, 3}));
    const Tensor back = dequantize(code);
    CHECK(back.at(0, 0, 0) == -2.0f);
    CHECK(back.at(0, 0, 5) == 3.0f);

    const Var q = quantize(constant(t), QuantizeMode::Round, nullptr);
    for (size_t i = 0; i < q->val.v.size(); ++i)
      CHECK(q->val.v[i] == float(code.v[i]));
  }

  TEST_CASE("round quantizer rejects out-of-range magnitudes") {
    Tensor t(Shape{1, 1, 1});
    t.v[0] = 3e9f;
    CHECK_THROWS_AS(quantize_round(t), DataError);
  }

  TEST_CASE("noise quantizer stays within half a step") {
    Rng rng(31);
    Tensor t(Shape{1, 4, 4});
    for (auto& v : t.v) v = float(rng.uniform(-5.0, 5.0));
    const Var q = quantize(constant(t), QuantizeMode::Noise, &rng);
    for (size_t i = 0; i < t.v.size(); ++i) {
      const float d = q->val.v[i] - t.v[i];
      CHECK(d >= -0.5f);
      CHECK(d < 0.5f);
    }
    CHECK_THROWS_AS(quantize(constant(t), QuantizeMode::Noise, nullptr),
                    DataError);
  }

  TEST_CASE("straight-through forward equals rounding") {
    Tensor t(Shape{1, 1, 3});
    t.v = {0.6f, -1.4f, 2.5f};
    const Var q = quantize(constant(t), QuantizeMode::StraightThrough,
                           nullptr);
    CHECK(q->val.v[0] == 1.0f);
    CHECK(q->val.v[1] == -1.0f);
    CHECK(q->val.v[2] == 3.0f);
  }

  TEST_CASE("rate estimate sums per-symbol information") {
    CHECK(estimate_rate_bits({0.5f, 0.25f, 1.0f}) ==
          doctest::Approx(3.0).epsilon(1e-7));
    CHECK_THROWS_AS(estimate_rate_bits({0.5f, 0.0f}), DataError);
    CHECK_THROWS_AS(estimate_rate_bits({1.5f}), DataError);
  }

  TEST_CASE("likelihood op matches the scalar path") {
    Rng rng(41);
    const Shape s{2, 3, 3};
    Tensor vq(s), mu(s), sg(s);
    for (size_t i = 0; i < vq.v.size(); ++i) {
      vq.v[i] = float(int(rng.uniform_int(9)) - 4);
      mu.v[i] = float(rng.uniform(-2.0, 2.0));
      sg.v[i] = float(rng.uniform(0.11, 3.0));
    }
    const Var p = gaussian_likelihood(constant(vq), constant(mu),
                                      constant(sg), kPMin);
    for (size_t i = 0; i < vq.v.size(); ++i)
      CHECK(p->val.v[i] ==
            doctest::Approx(gaussian_interval_probability(
                                vq.v[i], mu.v[i], sg.v[i], kPMin))
                .epsilon(1e-6));
  }
}
