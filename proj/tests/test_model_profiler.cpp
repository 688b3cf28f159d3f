#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "lvc/model.h"
#include "lvc/profiler.h"
#include "lvc/rng.h"

using namespace lvc;

namespace {

Tensor random_tensor(Shape s, Rng& rng, float lo = 0.0f, float hi = 1.0f) {
  Tensor t(s);
  for (auto& v : t.v) v = float(rng.uniform(lo, hi));
  return t;
}

// Routes live kernel MAC reporting into a local counter for its lifetime.
struct CounterScope {
  MacCounter mc;
  CounterScope() { active_mac_counter() = &mc; }
  ~CounterScope() { active_mac_counter() = nullptr; }
};

int64_t conv_params(const Conv2d& c) { return c.params(); }

int64_t resblock_params(const ResBlock& r) {
  return conv_params(r.c0) + conv_params(r.c1);
}

int64_t autocodec_params(const AutoCodec& c) {
  int64_t n = 0;
  for (const Conv2d* l : {&c.e0, &c.e1, &c.e2, &c.he0, &c.he1, &c.hd0, &c.hd1,
                          &c.d0, &c.d1, &c.d2})
    n += conv_params(*l);
  return n + c.prior->val.numel();
}

// Sums parameter counts layer by layer from the public structure, without
// touching the parameter registry.
int64_t analytic_param_count(const VideoModel& m) {
  int64_t n = 0;
  for (int lv = 0; lv < 3; ++lv)
    for (int j = 0; j < 3; ++j) n += conv_params(m.motion_est().l[lv][j]);
  n += autocodec_params(m.motion_codec());
  n += autocodec_params(m.intra_codec());
  n += conv_params(m.extractor().adapter_intra);
  n += conv_params(m.extractor().adapter_inter);
  n += resblock_params(m.extractor().res);
  if (m.has_condgen())
    n += conv_params(m.condgen().c0) + conv_params(m.condgen().c1);
  if (m.has_predictor())
    n += conv_params(m.predictor().m0) + conv_params(m.predictor().m1);
  if (m.has_maskgen())
    n += conv_params(m.maskgen().k0) + conv_params(m.maskgen().k1) +
         conv_params(m.maskgen().k2);
  const InterCodec& ic = m.inter();
  if (ic.conditional) n += conv_params(ic.ce0) + conv_params(ic.ce1);
  for (const Conv2d* l : {&ic.e0, &ic.e1, &ic.e2, &ic.he0, &ic.he1, &ic.hd0,
                          &ic.hd1, &ic.d0, &ic.d1, &ic.d2, &ic.fg_proj})
    n += conv_params(*l);
  n += resblock_params(ic.fg_res);
  n += ic.prior->val.numel();
  if (m.has_implicit_proj()) n += conv_params(m.implicit_proj());
  return n;
}

ModelConfig small_config(Framework fw, BufferStrategy st, int ib,
                         int width = 8) {
  ModelConfig cfg;
  cfg.framework = fw;
  cfg.strategy = st;
  cfg.implicit_channels = ib;
  cfg.base_width = width;
  return cfg;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("config json round trip") {
    ModelConfig cfg = small_config(Framework::MCR, BufferStrategy::Hybrid, 24);
    cfg.lambda = 512.0;
    ModelConfig back = ModelConfig::from_json(cfg.to_json());
    CHECK(back.framework == cfg.framework);
    CHECK(back.strategy == cfg.strategy);
    CHECK(back.implicit_channels == cfg.implicit_channels);
    CHECK(back.lambda == cfg.lambda);
    CHECK(back.base_width == cfg.base_width);
  }

  TEST_CASE("config json rejects malformed input") {
    CHECK_THROWS_AS(ModelConfig::from_json("not json"), DataError);
    CHECK_THROWS_AS(ModelConfig::from_json("{}"), DataError);
    ModelConfig cfg = small_config(Framework::RC, BufferStrategy::Implicit, 6);
    cfg.base_width = 6;
    CHECK_THROWS_AS(ModelConfig::from_json(cfg.to_json()), DataError);
    cfg.base_width = 8;
    cfg.implicit_channels = 0;
    CHECK_THROWS_AS(ModelConfig::from_json(cfg.to_json()), DataError);
    // Ignored for explicit buffering, so accepted there.
    cfg.strategy = BufferStrategy::Explicit;
    CHECK(ModelConfig::from_json(cfg.to_json()).implicit_channels == 0);
  }

  TEST_CASE("lambda ladder index") {
    ModelConfig cfg;
    cfg.lambda = 256.0;
    CHECK(cfg.lambda_index() == 0);
    cfg.lambda = 512.0;
    CHECK(cfg.lambda_index() == 1);
    cfg.lambda = 1024.0;
    CHECK(cfg.lambda_index() == 2);
    cfg.lambda = 2048.0;
    CHECK(cfg.lambda_index() == 3);
    cfg.lambda = 999.0;
    CHECK(cfg.lambda_index() == 255);
  }

  TEST_CASE("variant naming") {
    CHECK(small_config(Framework::RC, BufferStrategy::Explicit, 64)
              .variant_name() == "RC_explicit");
    CHECK(small_config(Framework::CC, BufferStrategy::Implicit, 67)
              .variant_name() == "CC_implicit67");
    CHECK(small_config(Framework::CRC, BufferStrategy::Hybrid, 64)
              .variant_name() == "CRC_hybrid64");
    CHECK(small_config(Framework::MCR, BufferStrategy::Hybrid, 3)
              .variant_name() == "MCR_hybrid3");
  }

  TEST_CASE("pad alignment") {
    CHECK(pad_align(1) == 64);
    CHECK(pad_align(63) == 64);
    CHECK(pad_align(64) == 64);
    CHECK(pad_align(65) == 128);
    CHECK(pad_align(128) == 128);
    CHECK(pad_align(129) == 192);
    CHECK_THROWS_AS(pad_align(0), DataError);
  }

  TEST_CASE("component presence follows framework") {
    struct Row {
      Framework fw;
      bool cond, pred, mask;
    };
    const Row rows[] = {{Framework::RC, false, true, false},
                        {Framework::CC, true, false, false},
                        {Framework::CRC, true, true, false},
                        {Framework::MCR, true, true, true}};
    for (const Row& r : rows) {
      CAPTURE(framework_name(r.fw));
      VideoModel m(small_config(r.fw, BufferStrategy::Explicit, 0), 7);
      CHECK(m.has_condgen() == r.cond);
      CHECK(m.has_predictor() == r.pred);
      CHECK(m.has_maskgen() == r.mask);
      CHECK(!m.has_implicit_proj());
      CHECK(m.inter().conditional == r.cond);
      if (!r.cond) CHECK_THROWS_AS(m.condgen(), DataError);
      if (!r.pred) CHECK_THROWS_AS(m.predictor(), DataError);
      if (!r.mask) CHECK_THROWS_AS(m.maskgen(), DataError);
    }
  }

  TEST_CASE("buffer channel wiring") {
    VideoModel ex(small_config(Framework::CRC, BufferStrategy::Explicit, 64),
                  1);
    CHECK(ex.buffer_channels() == 3);
    CHECK(ex.extractor().adapter_inter.cin == 3);
    CHECK_THROWS_AS(ex.implicit_proj(), DataError);

    VideoModel im(small_config(Framework::CRC, BufferStrategy::Implicit, 67),
                  1);
    CHECK(im.buffer_channels() == 67);
    CHECK(im.extractor().adapter_inter.cin == 67);
    CHECK(im.implicit_proj().cout == 67);

    VideoModel hy(small_config(Framework::CRC, BufferStrategy::Hybrid, 64), 1);
    CHECK(hy.buffer_channels() == 67);
    CHECK(hy.extractor().adapter_inter.cin == 67);
    CHECK(hy.implicit_proj().cout == 64);
  }

  TEST_CASE("untrained heads start neutral") {
    ParamStore store;
    Rng rng(11);

    MotionEstimator me(store, 8, 5);
    Var cur = constant(random_tensor(Shape{3, 16, 16}, rng));
    Var ref = constant(random_tensor(Shape{3, 16, 16}, rng));
    Var flow = me.estimate(cur, ref);
    REQUIRE(flow->val.shape == Shape{2, 16, 16});
    for (float v : flow->val.v) CHECK(v == 0.0f);

    PixelPredictor pp(store, 8, 5);
    Var feats = constant(random_tensor(Shape{8, 16, 16}, rng, -1.0f, 1.0f));
    Var pred = pp.predict(feats);
    REQUIRE(pred->val.shape == Shape{3, 16, 16});
    for (float v : pred->val.v) CHECK(v == 0.0f);

    MaskGenerator mg(store, 8, 5);
    Var mask = mg.generate(flow, pred);
    REQUIRE(mask->val.shape == Shape{1, 16, 16});
    for (float v : mask->val.v) CHECK(v == 0.5f);

    ConditionGenerator cg(store, 8, 5);
    Var cond = cg.generate(feats);
    for (float v : cond->val.v) CHECK(v == 0.0f);
  }

  TEST_CASE("parameter store bookkeeping") {
    ParamStore store;
    Var a = store.add("a", Tensor(2, 3, 4));
    store.add("b", Tensor(1, 1, 5));
    CHECK(store.param_count() == 24 + 5);
    CHECK(store.find("a") == a);
    CHECK_THROWS_AS(store.add("a", Tensor(1, 1, 1)), DataError);
    CHECK_THROWS_AS(store.find("zzz"), DataError);

    std::map<std::string, Tensor> named;
    named["a"] = Tensor::full(Shape{2, 3, 4}, 1.0f);
    CHECK_THROWS_AS(store.load(named), DataError);  // missing "b"
    named["b"] = Tensor::full(Shape{1, 1, 4}, 0.0f);
    CHECK_THROWS_AS(store.load(named), DataError);  // wrong shape
    named["b"] = Tensor::full(Shape{1, 1, 5}, 2.0f);
    store.load(named);
    CHECK(store.find("a")->val.at(1, 2, 3) == 1.0f);
    CHECK(store.find("b")->val.at(0, 0, 4) == 2.0f);
  }

  TEST_CASE("conv layer parameter formula") {
    ParamStore store;
    Conv2d c(store, "c", 8, 24, 3, 1, Init::He, 3);
    CHECK(c.params() == 8 * 24 * 9 + 24);
    CHECK(store.param_count() == c.params());
    Conv2d p(store, "p", 64, 67, 1, 1, Init::He, 3);
    CHECK(p.params() == 64 * 67 + 67);
  }

  TEST_CASE("model parameter count matches layer sums") {
    for (auto st : {BufferStrategy::Explicit, BufferStrategy::Implicit,
                    BufferStrategy::Hybrid}) {
      for (auto fw :
           {Framework::RC, Framework::CC, Framework::CRC, Framework::MCR}) {
        VideoModel m(small_config(fw, st, 12), 3);
        CAPTURE(m.config().variant_name());
        CHECK(m.params().param_count() == analytic_param_count(m));
      }
    }
  }

  TEST_CASE("weight hash tracks contents") {
    ModelConfig cfg = small_config(Framework::CRC, BufferStrategy::Hybrid, 6);
    VideoModel a(cfg, 42), b(cfg, 42), c(cfg, 43);
    const uint64_t ha = a.params().weight_hash();
    CHECK(ha == b.params().weight_hash());
    CHECK(ha != c.params().weight_hash());

    Var w = a.params().items()[0].second;
    const float orig = w->val.v[0];
    w->val.v[0] = orig + 0.25f;
    CHECK(a.params().weight_hash() != ha);
    w->val.v[0] = orig;
    CHECK(a.params().weight_hash() == ha);
  }

  TEST_CASE("weights transfer between models") {
    ModelConfig cfg = small_config(Framework::MCR, BufferStrategy::Implicit, 9);
    VideoModel src(cfg, 1), dst(cfg, 2);
    REQUIRE(src.params().weight_hash() != dst.params().weight_hash());
    std::map<std::string, Tensor> named;
    for (const auto& [name, p] : src.params().items()) named[name] = p->val;
    dst.params().load(named);
    CHECK(dst.params().weight_hash() == src.params().weight_hash());
  }
}

TEST_SUITE("profiler") {
  TEST_CASE("conv mac fixtures") {
    ParamStore store;
    MacCounter mc;
    int h = 64, w = 64;
    Conv2d c33(store, "a", 8, 24, 3, 1, Init::He, 1);
    c33.profile(mc, h, w);
    CHECK(h == 64);
    CHECK(w == 64);
    CHECK(mc.macs == 64.0 * 64 * 9 * 8 * 24);
    CHECK(mc.macs / (64.0 * 64) / 1000.0 == doctest::Approx(1.728).epsilon(1e-12));

    mc = MacCounter{};
    Conv2d c11(store, "b", 64, 67, 1, 1, Init::He, 1);
    c11.profile(mc, h, w);
    CHECK(mc.macs / (64.0 * 64) / 1000.0 == doctest::Approx(4.288).epsilon(1e-12));

    // Stride 2 halves each output dimension, quartering the work.
    mc = MacCounter{};
    Conv2d s2(store, "c", 8, 24, 3, 2, Init::He, 1);
    h = 64;
    w = 64;
    s2.profile(mc, h, w);
    CHECK(h == 32);
    CHECK(w == 32);
    CHECK(mc.macs == 64.0 * 64 * 9 * 8 * 24 / 4.0);
  }

  TEST_CASE("warp mac policy") {
    Rng rng(3);
    Var src = constant(random_tensor(Shape{5, 16, 16}, rng));
    Var flow = constant(Tensor(2, 16, 16));
    CounterScope live;
    warp_bilinear(src, flow);
    CHECK(live.mc.macs == 11.0 * 5 * 16 * 16);
  }

  TEST_CASE("live conv kernels report the analytic count") {
    ParamStore store;
    Rng rng(9);
    struct Case {
      int cin, cout, k, stride;
    };
    for (const Case& cs : {Case{3, 8, 3, 1}, Case{8, 8, 3, 2},
                           Case{8, 5, 1, 1}}) {
      CAPTURE(cs.k);
      CAPTURE(cs.stride);
      Conv2d layer(store,
                   "l" + std::to_string(cs.k) + std::to_string(cs.stride),
                   cs.cin, cs.cout, cs.k, cs.stride, Init::He, 2);
      Var x = constant(random_tensor(Shape{cs.cin, 32, 32}, rng));
      MacCounter analytic;
      int h = 32, w = 32;
      layer.profile(analytic, h, w);
      CounterScope live;
      layer(x);
      CHECK(live.mc.macs == analytic.macs);
    }
  }

  TEST_CASE("component profiles mirror execution") {
    ParamStore store;
    Rng rng(17);
    const int width = 8, H = 32, W = 32;

    MotionEstimator me(store, width, 5);
    {
      Var cur = constant(random_tensor(Shape{3, H, W}, rng));
      Var ref = constant(random_tensor(Shape{3, H, W}, rng));
      MacCounter analytic;
      me.profile(analytic, H, W);
      CounterScope live;
      me.estimate(cur, ref);
      CHECK(live.mc.macs == analytic.macs);
    }

    AutoCodec ac(store, "probe", 3, 3, width, 5);
    {
      Var x = constant(random_tensor(Shape{3, H, W}, rng));
      MacCounter analytic;
      ac.profile_encode(analytic, H, W);
      CounterScope live;
      Var y = ac.encode(x);
      ac.hyper_encode(y);
      CHECK(live.mc.macs == analytic.macs);
    }
    {
      Var y = constant(random_tensor(Shape{width, H / 4, W / 4}, rng));
      Var z = constant(random_tensor(Shape{width / 2, H / 8, W / 8}, rng));
      MacCounter analytic;
      ac.profile_decode(analytic, H, W);
      CounterScope live;
      ac.hyper_decode(z);
      ac.decode(y);
      CHECK(live.mc.macs == analytic.macs);
    }

    FeatureExtractor fx(store, 10, width, 5);
    for (bool intra : {true, false}) {
      Var ref = constant(random_tensor(Shape{intra ? 3 : 10, H, W}, rng));
      MacCounter analytic;
      fx.profile(analytic, intra, H, W);
      CounterScope live;
      fx.extract(ref, intra);
      CHECK(live.mc.macs == analytic.macs);
    }

    InterCodec ic(store, true, width, 5);
    {
      Var sig = constant(random_tensor(Shape{3, H, W}, rng));
      Var cond = constant(random_tensor(Shape{width, H, W}, rng));
      MacCounter analytic;
      ic.profile_encode(analytic, H, W);
      CounterScope live;
      Var y = ic.encode(sig, cond);
      ic.hyper_encode(y);
      CHECK(live.mc.macs == analytic.macs);
    }
    {
      Var y = constant(random_tensor(Shape{width, H / 4, W / 4}, rng));
      Var z = constant(random_tensor(Shape{width / 2, H / 8, W / 8}, rng));
      Var cond = constant(random_tensor(Shape{width, H, W}, rng));
      MacCounter analytic;
      ic.profile_decode(analytic, H, W);
      CounterScope live;
      ic.hyper_decode(z);
      Var f = ic.decode_features(y, cond);
      ic.generate_signal(f);
      CHECK(live.mc.macs == analytic.macs);
    }
  }

  TEST_CASE("report composition and units") {
    VideoModel m(small_config(Framework::MCR, BufferStrategy::Hybrid, 12), 4);
    ComplexityReport r = profile_model(m, 64, 64);
    CHECK(r.width == 64);
    CHECK(r.height == 64);
    CHECK(r.param_count == m.params().param_count());
    CHECK(r.enc_kmacs_per_pixel ==
          doctest::Approx(r.enc_macs / (64.0 * 64) / 1000.0).epsilon(1e-12));
    CHECK(r.dec_kmacs_per_pixel ==
          doctest::Approx(r.dec_macs / (64.0 * 64) / 1000.0).epsilon(1e-12));
    CHECK(r.dec_macs < r.enc_macs);

    // Encoder total is the decoder path plus motion search and the two
    // analysis transforms.
    MacCounter extra;
    m.motion_est().profile(extra, 64, 64);
    m.motion_codec().profile_encode(extra, 64, 64);
    m.inter().profile_encode(extra, 64, 64);
    CHECK(r.enc_macs == doctest::Approx(r.dec_macs + extra.macs).epsilon(1e-12));

    CHECK_THROWS_AS(profile_model(m, 0, 64), DataError);
  }

  TEST_CASE("per pixel figures are resolution independent") {
    VideoModel m(small_config(Framework::CRC, BufferStrategy::Implicit, 9), 4);
    ComplexityReport a = profile_model(m, 64, 64);
    ComplexityReport b = profile_model(m, 128, 128);
    ComplexityReport c = profile_model(m, 192, 64);
    for (const ComplexityReport* r : {&b, &c}) {
      CHECK(std::abs(r->enc_kmacs_per_pixel - a.enc_kmacs_per_pixel) /
                a.enc_kmacs_per_pixel < 0.005);
      CHECK(std::abs(r->dec_kmacs_per_pixel - a.dec_kmacs_per_pixel) /
                a.dec_kmacs_per_pixel < 0.005);
    }
    // Unaligned sizes pay for padding.
    ComplexityReport d = profile_model(m, 100, 100);
    CHECK(d.enc_kmacs_per_pixel > a.enc_kmacs_per_pixel * 1.2);
  }

  TEST_CASE("matched buffer budgets cost the same") {
    struct Pair {
      int implicit_ib, hybrid_ib;
    };
    for (const Pair& pr : {Pair{67, 64}, Pair{6, 3}}) {
      for (auto fw :
           {Framework::RC, Framework::CC, Framework::CRC, Framework::MCR}) {
        ModelConfig ci =
            small_config(fw, BufferStrategy::Implicit, pr.implicit_ib, 64);
        ModelConfig ch =
            small_config(fw, BufferStrategy::Hybrid, pr.hybrid_ib, 64);
        VideoModel mi(ci, 8), mh(ch, 8);
        REQUIRE(mi.buffer_channels() == mh.buffer_channels());
        ComplexityReport ri = profile_model(mi, 256, 256);
        ComplexityReport rh = profile_model(mh, 256, 256);
        CAPTURE(framework_name(fw));
        CAPTURE(pr.implicit_ib);
        CHECK(std::abs(ri.enc_kmacs_per_pixel - rh.enc_kmacs_per_pixel) /
                  rh.enc_kmacs_per_pixel < 0.01);
        CHECK(std::abs(ri.dec_kmacs_per_pixel - rh.dec_kmacs_per_pixel) /
                  rh.dec_kmacs_per_pixel < 0.01);
        CHECK(std::abs(double(ri.param_count - rh.param_count)) /
                  double(rh.param_count) < 0.001);
      }
    }
  }
}
