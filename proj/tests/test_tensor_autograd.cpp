#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "lvc/autograd.h"
#include "lvc/rng.h"
#include "lvc/tensor.h"

using namespace lvc;

namespace {

Tensor random_tensor(const Shape& s, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.v) v = float(rng.uniform(lo, hi));
  return t;
}

Tensor make(Shape s, std::initializer_list<float> vals) {
  Tensor t(s);
  REQUIRE(size_t(s.numel()) == vals.size());
  std::copy(vals.begin(), vals.end(), t.v.begin());
  return t;
}

// Central-difference check of every element of every input against the tape.
// Loss builders must be pure functions of the inputs.
void check_grads(
    const std::function<Var(const std::vector<Var>&)>& make_loss,
    std::vector<Var> inputs, double h = 1e-3, double tol = 2e-2) {
  for (auto& in : inputs) in->grad = Tensor();
  const Var loss = make_loss(inputs);
  backward(loss);
  for (auto& in : inputs) {
    REQUIRE(in->requires_grad);
    REQUIRE(in->grad.shape.numel() == in->val.shape.numel());
    for (size_t i = 0; i < in->val.v.size(); ++i) {
      const float keep = in->val.v[i];
      in->val.v[i] = float(keep + h);
      const double up = scalar_value(make_loss(inputs));
      in->val.v[i] = float(keep - h);
      const double dn = scalar_value(make_loss(inputs));
      in->val.v[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double an = in->grad.v[i];
      const double err = std::abs(fd - an);
      CAPTURE(i);
      CAPTURE(fd);
      CAPTURE(an);
      CHECK(err <= tol * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("shape layout is channel major") {
    Tensor t(Shape{2, 3, 4});
    CHECK(t.shape.numel() == 24);
    CHECK(t.v.size() == 24);
    t.v[1 * 12 + 2 * 4 + 3] = 5.0f;
    CHECK(t.at(1, 2, 3) == 5.0f);
    t.at(0, 0, 1) = -2.0f;
    CHECK(t.v[1] == -2.0f);
  }

  TEST_CASE("full fills every element") {
    const Tensor t = Tensor::full(Shape{3, 2, 2}, 0.25f);
    for (float v : t.v) CHECK(v == 0.25f);
  }

  TEST_CASE("finiteness scan catches NaN and infinity") {
    Tensor t = Tensor::full(Shape{1, 2, 2}, 0.0f);
    CHECK(t.all_finite());
    t.v[3] = std::numeric_limits<float>::quiet_NaN();
    CHECK(!t.all_finite());
    t.v[3] = std::numeric_limits<float>::infinity();
    CHECK(!t.all_finite());
  }

  TEST_CASE("arithmetic and difference helpers") {
    Rng rng(1);
    const Tensor a = random_tensor(Shape{2, 2, 2}, rng);
    const Tensor b = random_tensor(Shape{2, 2, 2}, rng);
    const Tensor s = a + b;
    const Tensor d = a - b;
    for (size_t i = 0; i < a.v.size(); ++i) {
      CHECK(s.v[i] == a.v[i] + b.v[i]);
      CHECK(d.v[i] == a.v[i] - b.v[i]);
    }
    CHECK(max_abs_diff(a, a) == 0.0);
    CHECK(max_abs_diff(s, a) > 0.0);
  }

  TEST_CASE("bit equality is exact memcmp") {
    Tensor a = Tensor::full(Shape{1, 1, 2}, 1.0f);
    Tensor b = a;
    CHECK(bit_equal(a, b));
    b.v[1] = std::nextafter(b.v[1], 2.0f);
    CHECK(!bit_equal(a, b));
    // Negative zero compares equal numerically but not bitwise.
    a.v[0] = 0.0f;
    b = a;
    b.v[0] = -0.0f;
    CHECK(a.v[0] == b.v[0]);
    CHECK(!bit_equal(a, b));
  }
}

TEST_SUITE("autograd") {
  TEST_CASE("constants carry no gradient and guards detach ops") {
    const Var c = constant(Tensor::full(Shape{1, 1, 1}, 2.0f));
    CHECK(!c->requires_grad);
    const Var p = parameter(Tensor::full(Shape{1, 1, 1}, 2.0f));
    CHECK(p->requires_grad);
    {
      NoGradGuard ng;
      CHECK(!grad_enabled());
      const Var y = scale(p, 3.0f);
      CHECK(!y->requires_grad);
      CHECK(y->parents.empty());
    }
    CHECK(grad_enabled());
    const Var y = scale(p, 3.0f);
    CHECK(y->requires_grad);
  }

  TEST_CASE("elementwise op gradients") {
    Rng rng(2);
    const Shape s{2, 3, 3};
    auto a = parameter(random_tensor(s, rng));
    auto b = parameter(random_tensor(s, rng));
    SUBCASE("add") {
      check_grads([](const std::vector<Var>& in) {
        return mse(add(in[0], in[1]), constant(Tensor::full(in[0]->val.shape, 0.3f)));
      }, {a, b});
    }
    SUBCASE("sub") {
      check_grads([](const std::vector<Var>& in) {
        return mse(sub(in[0], in[1]), constant(Tensor::full(in[0]->val.shape, -0.1f)));
      }, {a, b});
    }
    SUBCASE("mul") {
      check_grads([](const std::vector<Var>& in) {
        return mse(mul(in[0], in[1]), constant(Tensor::full(in[0]->val.shape, 0.0f)));
      }, {a, b});
    }
    SUBCASE("scale and add_const") {
      const Tensor off = random_tensor(s, rng);
      check_grads([off](const std::vector<Var>& in) {
        return mse(add_const(scale(in[0], -1.7f), off),
                   constant(Tensor::full(in[0]->val.shape, 0.2f)));
      }, {a});
    }
  }

  TEST_CASE("mask broadcast gradient") {
    Rng rng(3);
    auto x = parameter(random_tensor(Shape{3, 2, 2}, rng));
    auto m = parameter(random_tensor(Shape{1, 2, 2}, rng, 0.1, 0.9));
    check_grads([](const std::vector<Var>& in) {
      return mse(mul_mask(in[0], in[1]),
                 constant(Tensor::full(in[0]->val.shape, 0.1f)));
    }, {x, m});
  }

  TEST_CASE("concat and slice round trip with gradients") {
    Rng rng(4);
    auto a = parameter(random_tensor(Shape{2, 2, 3}, rng));
    auto b = parameter(random_tensor(Shape{3, 2, 3}, rng));
    const Var cat = concat_ch({a, b});
    CHECK(cat->val.shape.c == 5);
    CHECK(bit_equal(slice_ch(cat, 0, 2)->val, a->val));
    CHECK(bit_equal(slice_ch(cat, 2, 3)->val, b->val));
    check_grads([](const std::vector<Var>& in) {
      const Var cat2 = concat_ch({in[0], in[1]});
      return mse(slice_ch(cat2, 1, 3),
                 constant(Tensor::full(Shape{3, 2, 3}, 0.5f)));
    }, {a, b});
  }

  TEST_CASE("nonlinearity gradients away from kinks") {
    Rng rng(5);
    const Shape s{2, 3, 3};
    Tensor t = random_tensor(s, rng, -2.0, 2.0);
    // Keep clear of the leaky-relu kink so finite differences stay valid.
    for (auto& v : t.v)
      if (std::abs(v) < 0.05f) v = 0.1f;
    auto x = parameter(t);
    SUBCASE("leaky_relu") {
      check_grads([](const std::vector<Var>& in) {
        return mse(leaky_relu(in[0]),
                   constant(Tensor::full(in[0]->val.shape, 0.0f)));
      }, {x});
    }
    SUBCASE("sigmoid") {
      check_grads([](const std::vector<Var>& in) {
        return mse(sigmoid(in[0]),
                   constant(Tensor::full(in[0]->val.shape, 0.3f)));
      }, {x});
    }
    SUBCASE("softplus_offset") {
      check_grads([](const std::vector<Var>& in) {
        return mse(softplus_offset(in[0], 0.11f),
                   constant(Tensor::full(in[0]->val.shape, 1.0f)));
      }, {x});
    }
  }

  TEST_CASE("leaky_relu values") {
    auto x = constant(make(Shape{1, 1, 4}, {-2.0f, -0.5f, 0.0f, 1.5f}));
    const Tensor y = leaky_relu(x)->val;
    CHECK(y.v[0] == doctest::Approx(-0.2));
    CHECK(y.v[1] == doctest::Approx(-0.05));
    CHECK(y.v[2] == 0.0f);
    CHECK(y.v[3] == 1.5f);
  }

  TEST_CASE("softplus_offset enforces the floor and stays stable") {
    auto x = constant(make(Shape{1, 1, 3}, {-40.0f, 0.0f, 40.0f}));
    const Tensor y = softplus_offset(x, 0.11f)->val;
    CHECK(y.v[0] == doctest::Approx(0.11).epsilon(1e-6));
    CHECK(y.v[1] == doctest::Approx(0.11 + std::log(2.0)).epsilon(1e-6));
    CHECK(y.v[2] == doctest::Approx(40.11).epsilon(1e-6));
    for (float v : y.v) CHECK(v >= 0.11f);
  }

  TEST_CASE("clamp01 values and interior gradient") {
    auto x = constant(make(Shape{1, 1, 4}, {-0.5f, 0.25f, 0.75f, 1.5f}));
    const Tensor y = clamp01(x)->val;
    CHECK(y.v[0] == 0.0f);
    CHECK(y.v[1] == 0.25f);
    CHECK(y.v[2] == 0.75f);
    CHECK(y.v[3] == 1.0f);
    Rng rng(6);
    auto p = parameter(random_tensor(Shape{1, 3, 3}, rng, 0.1, 0.9));
    check_grads([](const std::vector<Var>& in) {
      return mse(clamp01(in[0]),
                 constant(Tensor::full(in[0]->val.shape, 0.4f)));
    }, {p});
  }

  TEST_CASE("straight-through round") {
    auto x = constant(make(Shape{1, 1, 4}, {-1.5f, -0.4f, 0.5f, 2.49f}));
    const Tensor y = round_ste(x)->val;
    // Half away from zero.
    CHECK(y.v[0] == -2.0f);
    CHECK(y.v[1] == 0.0f);
    CHECK(y.v[2] == 1.0f);
    CHECK(y.v[3] == 2.0f);
    auto p = parameter(make(Shape{1, 1, 2}, {0.3f, -1.2f}));
    const Var loss = mse(round_ste(p), constant(Tensor::full(Shape{1, 1, 2}, 0.0f)));
    backward(loss);
    // Gradient of mse flows through the rounding untouched.
    CHECK(p->grad.v[0] == doctest::Approx(2.0 * 0.0 / 2.0));
    CHECK(p->grad.v[1] == doctest::Approx(2.0 * (-1.0) / 2.0));
  }

  TEST_CASE("resampling op gradients") {
    Rng rng(7);
    SUBCASE("upsample_nearest2") {
      auto x = parameter(random_tensor(Shape{2, 2, 3}, rng));
      const Tensor y = upsample_nearest2(x)->val;
      CHECK(y.shape.h == 4);
      CHECK(y.shape.w == 6);
      CHECK(y.at(1, 3, 5) == x->val.at(1, 1, 2));
      check_grads([](const std::vector<Var>& in) {
        return mse(upsample_nearest2(in[0]),
                   constant(Tensor::full(Shape{2, 4, 6}, 0.1f)));
      }, {x});
    }
    SUBCASE("avgpool2") {
      auto x = parameter(random_tensor(Shape{2, 4, 4}, rng));
      const Tensor y = avgpool2(x)->val;
      CHECK(y.shape.h == 2);
      const float m = (x->val.at(0, 0, 0) + x->val.at(0, 0, 1) +
                       x->val.at(0, 1, 0) + x->val.at(0, 1, 1)) / 4.0f;
      CHECK(y.at(0, 0, 0) == doctest::Approx(m));
      check_grads([](const std::vector<Var>& in) {
        return mse(avgpool2(in[0]),
                   constant(Tensor::full(Shape{2, 2, 2}, 0.2f)));
      }, {x});
    }
    SUBCASE("expand_hw") {
      auto x = parameter(random_tensor(Shape{3, 1, 1}, rng));
      const Tensor y = expand_hw(x, 4, 5)->val;
      CHECK(y.shape.h == 4);
      CHECK(y.at(2, 3, 4) == x->val.at(2, 0, 0));
      check_grads([](const std::vector<Var>& in) {
        return mse(expand_hw(in[0], 4, 5),
                   constant(Tensor::full(Shape{3, 4, 5}, -0.3f)));
      }, {x});
    }
  }

  TEST_CASE("padding and cropping") {
    Rng rng(8);
    auto x = parameter(random_tensor(Shape{2, 3, 3}, rng));
    const Tensor padded = pad_replicate(x, 1, 2, 0, 1)->val;
    CHECK(padded.shape.h == 6);
    CHECK(padded.shape.w == 4);
    CHECK(padded.at(0, 0, 0) == x->val.at(0, 0, 0));
    CHECK(padded.at(1, 5, 3) == x->val.at(1, 2, 2));
    const Tensor back = crop(pad_replicate(x, 1, 2, 0, 1), 1, 0, 3, 3)->val;
    CHECK(bit_equal(back, x->val));
    check_grads([](const std::vector<Var>& in) {
      return mse(pad_replicate(in[0], 1, 1, 1, 1),
                 constant(Tensor::full(Shape{2, 5, 5}, 0.0f)));
    }, {x});
    check_grads([](const std::vector<Var>& in) {
      return mse(crop(in[0], 1, 1, 2, 2),
                 constant(Tensor::full(Shape{2, 2, 2}, 0.0f)));
    }, {x});
  }

  TEST_CASE("conv2d matches a direct convolution") {
    Rng rng(9);
    const int cin = 3, cout = 4, k = 3, stride = 2, pad = 1;
    const Shape xs{cin, 5, 6};
    const Tensor x = random_tensor(xs, rng);
    const Tensor w = random_tensor(Shape{cout, cin, k * k}, rng, -0.5, 0.5);
    const Tensor b = random_tensor(Shape{cout, 1, 1}, rng, -0.2, 0.2);
    const Tensor y =
        conv2d(constant(x), constant(w), constant(b), k, stride, pad)->val;
    const int ho = (xs.h + 2 * pad - k) / stride + 1;
    const int wo = (xs.w + 2 * pad - k) / stride + 1;
    REQUIRE(y.shape.c == cout);
    REQUIRE(y.shape.h == ho);
    REQUIRE(y.shape.w == wo);
    for (int co = 0; co < cout; ++co)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          double acc = b.at(co, 0, 0);
          for (int ci = 0; ci < cin; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= xs.h || ix < 0 || ix >= xs.w) continue;
                acc += double(x.at(ci, iy, ix)) *
                       double(w.v[size_t((co * cin + ci) * k * k + ky * k + kx)]);
              }
          CHECK(y.at(co, oy, ox) == doctest::Approx(acc).epsilon(1e-4));
        }
  }

  TEST_CASE("conv2d gradients") {
    Rng rng(10);
    auto x = parameter(random_tensor(Shape{2, 4, 4}, rng));
    auto w = parameter(random_tensor(Shape{3, 2, 9}, rng, -0.5, 0.5));
    auto b = parameter(random_tensor(Shape{3, 1, 1}, rng, -0.2, 0.2));
    check_grads([](const std::vector<Var>& in) {
      return mse(conv2d(in[0], in[1], in[2], 3, 1, 1),
                 constant(Tensor::full(Shape{3, 4, 4}, 0.1f)));
    }, {x, w, b});
    auto w1 = parameter(random_tensor(Shape{3, 2, 1}, rng, -0.5, 0.5));
    check_grads([](const std::vector<Var>& in) {
      return mse(conv2d(in[0], in[1], in[2], 1, 1, 0),
                 constant(Tensor::full(Shape{3, 4, 4}, 0.1f)));
    }, {x, w1, b});
    check_grads([](const std::vector<Var>& in) {
      return mse(conv2d(in[0], in[1], in[2], 3, 2, 1),
                 constant(Tensor::full(Shape{3, 2, 2}, 0.1f)));
    }, {x, w, b});
  }

  TEST_CASE("warp identity and integer shift") {
    Rng rng(11);
    const Tensor img = random_tensor(Shape{2, 5, 7}, rng, 0.0, 1.0);
    const Var zero_flow = constant(Tensor::full(Shape{2, 5, 7}, 0.0f));
    CHECK(bit_equal(warp_bilinear(constant(img), zero_flow)->val, img));

    // Backward warp by (+1, 0): output(x) = src(x + 1), border clamped.
    Tensor flow = Tensor::full(Shape{2, 5, 7}, 0.0f);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 7; ++x) flow.at(0, y, x) = 1.0f;
    const Tensor shifted =
        warp_bilinear(constant(img), constant(flow))->val;
    for (int c = 0; c < 2; ++c)
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) {
          const int sx = std::min(x + 1, 6);
          CHECK(shifted.at(c, y, x) == doctest::Approx(img.at(c, y, sx)));
        }
  }

  TEST_CASE("warp rejects non-finite flow") {
    const Tensor img = Tensor::full(Shape{1, 2, 2}, 0.5f);
    Tensor flow = Tensor::full(Shape{2, 2, 2}, 0.0f);
    flow.v[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(warp_bilinear(constant(img), constant(flow)),
                    DataError);
  }

  TEST_CASE("warp gradients in source and flow") {
    Rng rng(12);
    auto src = parameter(random_tensor(Shape{2, 4, 4}, rng, 0.0, 1.0));
    // Fractional offsets keep the bilinear weights away from their kinks.
    Tensor f(Shape{2, 4, 4});
    for (auto& v : f.v) v = float(rng.uniform(-0.8, 0.8));
    for (auto& v : f.v)
      if (std::abs(v - std::round(v)) < 0.1) v += 0.17f;
    auto flow = parameter(f);
    check_grads([](const std::vector<Var>& in) {
      return mse(warp_bilinear(in[0], in[1]),
                 constant(Tensor::full(Shape{2, 4, 4}, 0.3f)));
    }, {src, flow}, 1e-3, 3e-2);
  }

  TEST_CASE("gaussian likelihood gradients in mean and scale") {
    Rng rng(13);
    const Shape s{1, 2, 4};
    Tensor vq(s);
    for (auto& v : vq.v) v = float(int(rng.uniform_int(7)) - 3);
    auto mean = parameter(random_tensor(s, rng, -1.0, 1.0));
    Tensor sc(s);
    for (auto& v : sc.v) v = float(rng.uniform(0.4, 2.0));
    auto scale_p = parameter(sc);
    check_grads([vq](const std::vector<Var>& in) {
      const Var p = gaussian_likelihood(constant(vq), in[0], in[1],
                                        1.0 / 65536.0);
      return bits_total(p);
    }, {mean, scale_p}, 1e-4, 1e-2);
  }

  TEST_CASE("loss reductions") {
    auto a = constant(make(Shape{1, 1, 4}, {0.0f, 0.5f, 1.0f, 0.25f}));
    auto b = constant(make(Shape{1, 1, 4}, {0.0f, 0.0f, 0.0f, 0.25f}));
    CHECK(scalar_value(mse(a, b)) ==
          doctest::Approx((0.25 + 1.0) / 4.0).epsilon(1e-7));
    auto p = constant(make(Shape{1, 1, 2}, {0.5f, 0.25f}));
    CHECK(scalar_value(bits_total(p)) == doctest::Approx(3.0).epsilon(1e-6));
  }

  TEST_CASE("reused subexpression accumulates both paths") {
    auto x = parameter(Tensor::full(Shape{1, 1, 1}, 0.7f));
    const Var y = add(mul(x, x), scale(x, 2.0f));  // x^2 + 2x
    const Var loss = mse(y, constant(Tensor::full(Shape{1, 1, 1}, 0.0f)));
    backward(loss);
    // d/dx (x^2+2x)^2 = 2 (x^2+2x)(2x+2)
    const double v = 0.7 * 0.7 + 1.4;
    CHECK(x->grad.v[0] ==
          doctest::Approx(2.0 * v * (2.0 * 0.7 + 2.0)).epsilon(1e-4));
  }
}
