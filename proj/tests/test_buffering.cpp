#include <doctest.h>

#include "lvc/buffering.h"
#include "lvc/rng.h"

using namespace lvc;

namespace {

Var frame(int c, int h, int w, float fill) {
  return constant(Tensor::full(Shape{c, h, w}, fill));
}

}  // namespace

TEST_SUITE("buffering") {
  TEST_CASE("strategy names round trip") {
    for (BufferStrategy s : {BufferStrategy::Explicit,
                             BufferStrategy::Implicit, BufferStrategy::Hybrid})
      CHECK(strategy_from_name(strategy_name(s)) == s);
    CHECK_THROWS_AS(strategy_from_name("Explicit"), UsageError);
    CHECK_THROWS_AS(strategy_from_name(""), UsageError);
  }

  TEST_CASE("channel accounting") {
    CHECK(buffer_channel_count(BufferStrategy::Explicit, 0) == 3);
    CHECK(buffer_channel_count(BufferStrategy::Implicit, 6) == 6);
    CHECK(buffer_channel_count(BufferStrategy::Implicit, 67) == 67);
    CHECK(buffer_channel_count(BufferStrategy::Hybrid, 3) == 6);
    CHECK(buffer_channel_count(BufferStrategy::Hybrid, 64) == 67);
  }

  TEST_CASE("matched budgets pair implicit with hybrid") {
    for (int b = 4; b <= 80; ++b)
      CHECK(buffer_channel_count(BufferStrategy::Implicit, b) ==
            buffer_channel_count(BufferStrategy::Hybrid, b - 3));
  }

  TEST_CASE("intra state holds only the decoded frame") {
    for (BufferStrategy s : {BufferStrategy::Explicit,
                             BufferStrategy::Implicit, BufferStrategy::Hybrid}) {
      const TemporalBuffer b =
          TemporalBuffer::after_intra(s, 16, frame(3, 8, 8, 0.5f));
      CHECK(b.holds_intra_only());
      CHECK(b.explicit_frame().has_value());
      CHECK(!b.implicit_features().has_value());
      CHECK(b.reference_channels() == 3);
      CHECK(b.reference()->val.shape.c == 3);
      CHECK(b.footprint() == 3 * 8 * 8);
    }
    CHECK_THROWS_AS(
        TemporalBuffer::after_intra(BufferStrategy::Explicit, 0,
                                    frame(4, 8, 8, 0.0f)),
        DataError);
  }

  TEST_CASE("inter state per strategy") {
    const Var recon = frame(3, 8, 8, 0.25f);
    const Var feats = frame(16, 8, 8, -0.1f);

    const TemporalBuffer ex = TemporalBuffer::after_inter(
        BufferStrategy::Explicit, 0, recon, Var());
    CHECK(!ex.holds_intra_only());
    CHECK(ex.explicit_frame().has_value());
    CHECK(!ex.implicit_features().has_value());
    CHECK(ex.reference_channels() == 3);
    CHECK(bit_equal(ex.reference()->val, recon->val));
    CHECK(ex.footprint() == 3 * 8 * 8);

    const TemporalBuffer im = TemporalBuffer::after_inter(
        BufferStrategy::Implicit, 16, Var(), feats);
    CHECK(!im.explicit_frame().has_value());
    CHECK(im.implicit_features().has_value());
    CHECK(im.reference_channels() == 16);
    CHECK(bit_equal(im.reference()->val, feats->val));
    CHECK(im.footprint() == 16 * 8 * 8);

    const TemporalBuffer hy = TemporalBuffer::after_inter(
        BufferStrategy::Hybrid, 16, recon, feats);
    CHECK(hy.explicit_frame().has_value());
    CHECK(hy.implicit_features().has_value());
    CHECK(hy.reference_channels() == 19);
    CHECK(hy.footprint() == 19 * 8 * 8);
    // Reference concatenates the reconstructed frame ahead of the features.
    const Tensor ref = hy.reference()->val;
    REQUIRE(ref.shape.c == 19);
    CHECK(ref.at(0, 0, 0) == 0.25f);
    CHECK(ref.at(2, 7, 7) == 0.25f);
    CHECK(ref.at(3, 0, 0) == -0.1f);
    CHECK(ref.at(18, 7, 7) == -0.1f);
  }

  TEST_CASE("slot requirements are enforced") {
    const Var recon = frame(3, 8, 8, 0.0f);
    const Var feats = frame(8, 8, 8, 0.0f);
    CHECK_THROWS_AS(TemporalBuffer::after_inter(BufferStrategy::Explicit, 0,
                                                Var(), Var()),
                    DataError);
    CHECK_THROWS_AS(TemporalBuffer::after_inter(BufferStrategy::Implicit, 8,
                                                recon, Var()),
                    DataError);
    CHECK_THROWS_AS(TemporalBuffer::after_inter(BufferStrategy::Hybrid, 8,
                                                recon, Var()),
                    DataError);
    // Implicit slot must match the declared width.
    CHECK_THROWS_AS(TemporalBuffer::after_inter(BufferStrategy::Implicit, 16,
                                                Var(), feats),
                    DataError);
  }
}
