#include <doctest.h>

#include "lvc/framework.h"
#include "lvc/rng.h"

using namespace lvc;

namespace {

Tensor random_tensor(const Shape& s, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(s);
  for (auto& v : t.v) v = float(rng.uniform(lo, hi));
  return t;
}

}  // namespace

TEST_SUITE("framework") {
  TEST_CASE("structural switch table") {
    const FrameworkSpec rc = framework_spec(Framework::RC);
    CHECK(!rc.uses_condition);
    CHECK(rc.uses_pixel_prediction);
    CHECK(!rc.uses_mask);

    const FrameworkSpec cc = framework_spec(Framework::CC);
    CHECK(cc.uses_condition);
    CHECK(!cc.uses_pixel_prediction);
    CHECK(!cc.uses_mask);

    const FrameworkSpec crc = framework_spec(Framework::CRC);
    CHECK(crc.uses_condition);
    CHECK(crc.uses_pixel_prediction);
    CHECK(!crc.uses_mask);

    const FrameworkSpec mcr = framework_spec(Framework::MCR);
    CHECK(mcr.uses_condition);
    CHECK(mcr.uses_pixel_prediction);
    CHECK(mcr.uses_mask);
  }

  TEST_CASE("wire identifiers are stable") {
    CHECK(int(Framework::RC) == 0);
    CHECK(int(Framework::CC) == 1);
    CHECK(int(Framework::CRC) == 2);
    CHECK(int(Framework::MCR) == 3);
    CHECK(int(BufferStrategy::Explicit) == 0);
    CHECK(int(BufferStrategy::Implicit) == 1);
    CHECK(int(BufferStrategy::Hybrid) == 2);
  }

  TEST_CASE("names round trip and unknown names are usage errors") {
    for (Framework f : {Framework::RC, Framework::CC, Framework::CRC,
                        Framework::MCR})
      CHECK(framework_from_name(framework_name(f)) == f);
    CHECK_THROWS_AS(framework_from_name("rc"), UsageError);
    CHECK_THROWS_AS(framework_from_name("DCVC"), UsageError);
  }

  TEST_CASE("coded signal composition") {
    Rng rng(11);
    const Shape s{3, 4, 4};
    const Var x = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var p = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var m = constant(random_tensor(Shape{1, 4, 4}, rng, 0.0, 1.0));

    const Tensor res =
        compose_coded_signal(framework_spec(Framework::RC), x, p,
                             std::nullopt)->val;
    for (size_t i = 0; i < res.v.size(); ++i)
      CHECK(res.v[i] == x->val.v[i] - p->val.v[i]);

    // Direct coding passes the frame through untouched.
    const Var cc = compose_coded_signal(framework_spec(Framework::CC), x,
                                        std::nullopt, std::nullopt);
    CHECK(bit_equal(cc->val, x->val));

    const Tensor masked =
        compose_coded_signal(framework_spec(Framework::MCR), x, p, m)->val;
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 4; ++y)
        for (int xx = 0; xx < 4; ++xx) {
          volatile float mp = m->val.at(0, y, xx) * p->val.at(c, y, xx);
          const float want = x->val.at(c, y, xx) - mp;
          CHECK(masked.at(c, y, xx) == want);
        }
  }

  TEST_CASE("composition inverts within float tolerance") {
    Rng rng(12);
    const Shape s{3, 6, 6};
    const Var x = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var p = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var m = constant(random_tensor(Shape{1, 6, 6}, rng, 0.0, 1.0));
    for (Framework f : {Framework::RC, Framework::CC, Framework::CRC,
                        Framework::MCR}) {
      const FrameworkSpec spec = framework_spec(f);
      const std::optional<Var> pred =
          spec.uses_pixel_prediction ? std::optional<Var>(p) : std::nullopt;
      const std::optional<Var> mask =
          spec.uses_mask ? std::optional<Var>(m) : std::nullopt;
      const Var coded = compose_coded_signal(spec, x, pred, mask);
      const Var back = compose_reconstruction(spec, coded, pred, mask);
      CHECK(max_abs_diff(back->val, x->val) < 1e-6);
    }
  }

  TEST_CASE("mask extremes collapse to the neighbor frameworks exactly") {
    Rng rng(13);
    const Shape s{3, 5, 5};
    const Var x = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var p = constant(random_tensor(s, rng, 0.0, 1.0));
    const Var ones = constant(Tensor::full(Shape{1, 5, 5}, 1.0f));
    const Var zeros = constant(Tensor::full(Shape{1, 5, 5}, 0.0f));

    const Tensor mcr1 =
        compose_coded_signal(framework_spec(Framework::MCR), x, p, ones)->val;
    const Tensor crc =
        compose_coded_signal(framework_spec(Framework::CRC), x, p,
                             std::nullopt)->val;
    CHECK(bit_equal(mcr1, crc));

    const Tensor mcr0 =
        compose_coded_signal(framework_spec(Framework::MCR), x, p, zeros)->val;
    const Tensor cc =
        compose_coded_signal(framework_spec(Framework::CC), x, std::nullopt,
                             std::nullopt)->val;
    CHECK(bit_equal(mcr0, cc));

    // The inverse composition collapses the same way.
    const Var g = constant(random_tensor(s, rng, -0.5, 0.5));
    CHECK(bit_equal(
        compose_reconstruction(framework_spec(Framework::MCR), g, p, ones)
            ->val,
        compose_reconstruction(framework_spec(Framework::CRC), g, p,
                               std::nullopt)
            ->val));
    CHECK(bit_equal(
        compose_reconstruction(framework_spec(Framework::MCR), g, p, zeros)
            ->val,
        compose_reconstruction(framework_spec(Framework::CC), g, std::nullopt,
                               std::nullopt)
            ->val));
  }

  TEST_CASE("operand presence must match the framework") {
    Rng rng(14);
    const Shape s{3, 4, 4};
    const Var x = constant(random_tensor(s, rng));
    const Var p = constant(random_tensor(s, rng));
    const Var m = constant(random_tensor(Shape{1, 4, 4}, rng, 0.0, 1.0));
    CHECK_THROWS_AS(compose_coded_signal(framework_spec(Framework::RC), x,
                                         std::nullopt, std::nullopt),
                    DataError);
    CHECK_THROWS_AS(compose_coded_signal(framework_spec(Framework::CC), x, p,
                                         std::nullopt),
                    DataError);
    CHECK_THROWS_AS(compose_coded_signal(framework_spec(Framework::CRC), x, p,
                                         m),
                    DataError);
    CHECK_THROWS_AS(compose_coded_signal(framework_spec(Framework::MCR), x, p,
                                         std::nullopt),
                    DataError);
  }
}
