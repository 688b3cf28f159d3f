#include "lvc/model.h"

#include <json.hpp>

namespace lvc {

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["framework"] = framework_name(framework);
  j["strategy"] = strategy_name(strategy);
  j["implicit_channels"] = implicit_channels;
  j["lambda"] = lambda;
  j["base_width"] = base_width;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& json_text) {
  ModelConfig c;
  try {
    nlohmann::json j = nlohmann::json::parse(json_text);
    c.framework = framework_from_name(j.at("framework").get<std::string>());
    c.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    c.implicit_channels = j.at("implicit_channels").get<int>();
    c.lambda = j.at("lambda").get<double>();
    c.base_width = j.at("base_width").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model config json: ") + e.what());
  }
  LVC_CHECK(c.base_width >= 8 && c.base_width % 4 == 0,
            "base_width must be a multiple of 4, at least 8");
  if (c.strategy != BufferStrategy::Explicit)
    LVC_CHECK(c.implicit_channels > 0, "implicit_channels must be positive");
  return c;
}

uint8_t ModelConfig::lambda_index() const {
  const double ladder[4] = {256.0, 512.0, 1024.0, 2048.0};
  for (int i = 0; i < 4; ++i)
    if (lambda == ladder[i]) return uint8_t(i);
  return 255;
}

std::string ModelConfig::variant_name() const {
  std::string s = framework_name(framework) + "_" + strategy_name(strategy);
  if (strategy != BufferStrategy::Explicit)
    s += std::to_string(implicit_channels);
  return s;
}

int pad_align(int dim) {
  LVC_CHECK(dim > 0, "non-positive dimension");
  return (dim + 63) / 64 * 64;
}

MotionEstimator::MotionEstimator(ParamStore& store, int width, uint64_t seed) {
  const int ce = width / 2;
  for (int lv = 0; lv < 3; ++lv) {
    const std::string base = "motion_est.l" + std::to_string(lv);
    l[lv][0] = Conv2d(store, base + ".c0", 8, ce, 3, 1, Init::He, seed);
    l[lv][1] = Conv2d(store, base + ".c1", ce, ce, 3, 1, Init::He, seed);
    l[lv][2] = Conv2d(store, base + ".c2", ce, 2, 3, 1, Init::Zero, seed);
  }
}

Var MotionEstimator::estimate(const Var& cur, const Var& ref) const {
  const Shape s = cur->val.shape;
  LVC_CHECK(s.c == 3 && ref->val.shape == s, "motion estimation needs two "
                                             "frames of equal size");
  LVC_CHECK(s.h % 4 == 0 && s.w % 4 == 0, "frame dims must be divisible by 4");
  Var cur_pyr[3] = {cur, avgpool2(cur), avgpool2(avgpool2(cur))};
  Var ref_pyr[3] = {ref, avgpool2(ref), avgpool2(avgpool2(ref))};

  Var flow;
  for (int lv = 2; lv >= 0; --lv) {
    Var up = flow ? scale(upsample_nearest2(flow), 2.0f)
                  : constant(Tensor(2, cur_pyr[lv]->val.shape.h,
                                    cur_pyr[lv]->val.shape.w));
    Var warped = warp_bilinear(ref_pyr[lv], up);
    Var in = concat_ch({cur_pyr[lv], warped, up});
    Var d = l[lv][2](leaky_relu(l[lv][1](leaky_relu(l[lv][0](in)))));
    flow = add(up, d);
  }
  return flow;
}

void MotionEstimator::profile(MacCounter& mc, int h, int w) const {
  for (int lv = 2; lv >= 0; --lv) {
    const int hh = h >> lv, ww = w >> lv;
    mc.warp(int64_t(3) * hh * ww);
    int ph = hh, pw = ww;
    l[lv][0].profile(mc, ph, pw);
    l[lv][1].profile(mc, ph, pw);
    l[lv][2].profile(mc, ph, pw);
  }
}

AutoCodec::AutoCodec(ParamStore& store, const std::string& name, int in_ch,
                     int out_ch, int width, uint64_t seed)
    : in_ch(in_ch), out_ch(out_ch), latent_ch(width), hyper_ch(width / 2) {
  const int c = width, hz = hyper_ch;
  e0 = Conv2d(store, name + ".e0", in_ch, c, 3, 2, Init::He, seed);
  e1 = Conv2d(store, name + ".e1", c, c, 3, 1, Init::He, seed);
  e2 = Conv2d(store, name + ".e2", c, latent_ch, 3, 2, Init::He, seed);
  he0 = Conv2d(store, name + ".he0", latent_ch, hz, 3, 1, Init::He, seed);
  he1 = Conv2d(store, name + ".he1", hz, hz, 3, 2, Init::He, seed);
  hd0 = Conv2d(store, name + ".hd0", hz, hz, 3, 1, Init::He, seed);
  hd1 = Conv2d(store, name + ".hd1", hz, 2 * latent_ch, 3, 1, Init::He, seed);
  d0 = Conv2d(store, name + ".d0", latent_ch, c, 3, 1, Init::He, seed);
  d1 = Conv2d(store, name + ".d1", c, c, 3, 1, Init::He, seed);
  d2 = Conv2d(store, name + ".d2", c, out_ch, 3, 1, Init::He, seed);
  prior = store.add(name + ".prior", Tensor(2 * hz, 1, 1));
}

Var AutoCodec::encode(const Var& x) const {
  return e2(leaky_relu(e1(leaky_relu(e0(x)))));
}

Var AutoCodec::hyper_encode(const Var& y) const {
  return he1(leaky_relu(he0(y)));
}

std::pair<Var, Var> AutoCodec::hyper_decode(const Var& z_hat) const {
  Var t = hd1(upsample_nearest2(leaky_relu(hd0(z_hat))));
  Var mean = slice_ch(t, 0, latent_ch);
  Var scale_raw = slice_ch(t, latent_ch, latent_ch);
  return {mean, softplus_offset(scale_raw, float(kScaleFloor))};
}

std::pair<Var, Var> AutoCodec::prior_params(int hz, int wz) const {
  Var mean = expand_hw(slice_ch(prior, 0, hyper_ch), hz, wz);
  Var scale_raw = expand_hw(slice_ch(prior, hyper_ch, hyper_ch), hz, wz);
  return {mean, softplus_offset(scale_raw, float(kScaleFloor))};
}

Var AutoCodec::decode(const Var& y_hat) const {
  Var t = leaky_relu(d0(y_hat));
  t = leaky_relu(d1(upsample_nearest2(t)));
  return d2(upsample_nearest2(t));
}

void AutoCodec::profile_encode(MacCounter& mc, int h, int w) const {
  e0.profile(mc, h, w);
  e1.profile(mc, h, w);
  e2.profile(mc, h, w);
  he0.profile(mc, h, w);
  he1.profile(mc, h, w);
}

void AutoCodec::profile_decode(MacCounter& mc, int h, int w) const {
  int hz = h / 8, wz = w / 8;
  hd0.profile(mc, hz, wz);
  hz *= 2;
  wz *= 2;
  hd1.profile(mc, hz, wz);
  int hy = h / 4, wy = w / 4;
  d0.profile(mc, hy, wy);
  hy *= 2;
  wy *= 2;
  d1.profile(mc, hy, wy);
  hy *= 2;
  wy *= 2;
  d2.profile(mc, hy, wy);
}

InterCodec::InterCodec(ParamStore& store, bool conditional, int width,
                       uint64_t seed)
    : conditional(conditional), latent_ch(width), hyper_ch(width / 2) {
  const int c = width, hz = hyper_ch;
  const std::string name = "inter";
  if (conditional) {
    ce0 = Conv2d(store, name + ".ce0", c, c, 3, 2, Init::He, seed);
    ce1 = Conv2d(store, name + ".ce1", c, c, 3, 2, Init::He, seed);
  }
  const int enc_in = conditional ? 3 + c : 3;
  e0 = Conv2d(store, name + ".e0", enc_in, c, 3, 2, Init::He, seed);
  e1 = Conv2d(store, name + ".e1", c, c, 3, 1, Init::He, seed);
  e2 = Conv2d(store, name + ".e2", c, latent_ch, 3, 2, Init::He, seed);
  he0 = Conv2d(store, name + ".he0", latent_ch, hz, 3, 1, Init::He, seed);
  he1 = Conv2d(store, name + ".he1", hz, hz, 3, 2, Init::He, seed);
  hd0 = Conv2d(store, name + ".hd0", hz, hz, 3, 1, Init::He, seed);
  hd1 = Conv2d(store, name + ".hd1", hz, 2 * latent_ch, 3, 1, Init::He, seed);
  const int dec_in = conditional ? latent_ch + c : latent_ch;
  d0 = Conv2d(store, name + ".d0", dec_in, c, 3, 1, Init::He, seed);
  d1 = Conv2d(store, name + ".d1", c, c, 3, 1, Init::He, seed);
  d2 = Conv2d(store, name + ".d2", c, c, 3, 1, Init::He, seed);
  fg_res = ResBlock(store, name + ".fg", c, seed);
  fg_proj = Conv2d(store, name + ".fg_proj", c, 3, 3, 1, Init::He, seed);
  prior = store.add(name + ".prior", Tensor(2 * hz, 1, 1));
}

Var InterCodec::embed_condition(const Var& cond) const {
  LVC_CHECK(conditional, "condition embedding on unconditional codec");
  return ce1(leaky_relu(ce0(cond)));
}

Var InterCodec::encode(const Var& signal,
                       const std::optional<Var>& cond) const {
  LVC_CHECK(conditional == cond.has_value(), "condition presence mismatch");
  Var in = conditional ? concat_ch({signal, *cond}) : signal;
  return e2(leaky_relu(e1(leaky_relu(e0(in)))));
}

Var InterCodec::hyper_encode(const Var& y) const {
  return he1(leaky_relu(he0(y)));
}

std::pair<Var, Var> InterCodec::hyper_decode(const Var& z_hat) const {
  Var t = hd1(upsample_nearest2(leaky_relu(hd0(z_hat))));
  Var mean = slice_ch(t, 0, latent_ch);
  Var scale_raw = slice_ch(t, latent_ch, latent_ch);
  return {mean, softplus_offset(scale_raw, float(kScaleFloor))};
}

std::pair<Var, Var> InterCodec::prior_params(int hz, int wz) const {
  Var mean = expand_hw(slice_ch(prior, 0, hyper_ch), hz, wz);
  Var scale_raw = expand_hw(slice_ch(prior, hyper_ch, hyper_ch), hz, wz);
  return {mean, softplus_offset(scale_raw, float(kScaleFloor))};
}

Var InterCodec::decode_features(const Var& y_hat,
                                const std::optional<Var>& cond) const {
  LVC_CHECK(conditional == cond.has_value(), "condition presence mismatch");
  Var in = y_hat;
  if (conditional) in = concat_ch({y_hat, embed_condition(*cond)});
  Var t = leaky_relu(d0(in));
  t = leaky_relu(d1(upsample_nearest2(t)));
  return leaky_relu(d2(upsample_nearest2(t)));
}

Var InterCodec::generate_signal(const Var& features) const {
  return fg_proj(fg_res(features));
}

void InterCodec::profile_encode(MacCounter& mc, int h, int w) const {
  e0.profile(mc, h, w);
  e1.profile(mc, h, w);
  e2.profile(mc, h, w);
  he0.profile(mc, h, w);
  he1.profile(mc, h, w);
}

void InterCodec::profile_decode(MacCounter& mc, int h, int w) const {
  if (conditional) {
    int hc = h, wc = w;
    ce0.profile(mc, hc, wc);
    ce1.profile(mc, hc, wc);
  }
  int hz = h / 8, wz = w / 8;
  hd0.profile(mc, hz, wz);
  hz *= 2;
  wz *= 2;
  hd1.profile(mc, hz, wz);
  int hy = h / 4, wy = w / 4;
  d0.profile(mc, hy, wy);
  hy *= 2;
  wy *= 2;
  d1.profile(mc, hy, wy);
  hy *= 2;
  wy *= 2;
  d2.profile(mc, hy, wy);
  fg_res.profile(mc, hy, wy);
  fg_proj.profile(mc, hy, wy);
}

FeatureExtractor::FeatureExtractor(ParamStore& store, int buffer_ch,
                                   int width, uint64_t seed)
    : adapter_intra(store, "extract.adapter_intra", 3, width, 3, 1, Init::He,
                    seed),
      adapter_inter(store, "extract.adapter_inter", buffer_ch, width, 1, 1,
                    Init::He, seed),
      res(store, "extract.res", width, seed) {}

Var FeatureExtractor::extract(const Var& ref, bool intra_reference) const {
  Var a = intra_reference ? adapter_intra(ref) : adapter_inter(ref);
  return res(leaky_relu(a));
}

void FeatureExtractor::profile(MacCounter& mc, bool intra_reference, int h,
                               int w) const {
  if (intra_reference)
    adapter_intra.profile(mc, h, w);
  else
    adapter_inter.profile(mc, h, w);
  res.profile(mc, h, w);
}

ConditionGenerator::ConditionGenerator(ParamStore& store, int width,
                                       uint64_t seed)
    : c0(store, "condgen.c0", width, width, 3, 1, Init::He, seed),
      c1(store, "condgen.c1", width, width, 3, 1, Init::Zero, seed) {}

Var ConditionGenerator::generate(const Var& warped_features) const {
  return c1(leaky_relu(c0(warped_features)));
}

void ConditionGenerator::profile(MacCounter& mc, int h, int w) const {
  c0.profile(mc, h, w);
  c1.profile(mc, h, w);
}

PixelPredictor::PixelPredictor(ParamStore& store, int width, uint64_t seed)
    : m0(store, "predict.m0", width, width, 3, 1, Init::He, seed),
      m1(store, "predict.m1", width, 3, 3, 1, Init::Zero, seed) {}

Var PixelPredictor::predict(const Var& warped_features) const {
  return clamp01(m1(leaky_relu(m0(warped_features))));
}

void PixelPredictor::profile(MacCounter& mc, int h, int w) const {
  m0.profile(mc, h, w);
  m1.profile(mc, h, w);
}

MaskGenerator::MaskGenerator(ParamStore& store, int width, uint64_t seed)
    : k0(store, "mask.k0", 5, width / 2, 3, 1, Init::He, seed),
      k1(store, "mask.k1", width / 2, width / 2, 3, 1, Init::He, seed),
      k2(store, "mask.k2", width / 2, 1, 3, 1, Init::Zero, seed) {}

Var MaskGenerator::generate(const Var& flow, const Var& prediction) const {
  Var in = concat_ch({flow, prediction});
  return sigmoid(k2(leaky_relu(k1(leaky_relu(k0(in))))));
}

void MaskGenerator::profile(MacCounter& mc, int h, int w) const {
  k0.profile(mc, h, w);
  k1.profile(mc, h, w);
  k2.profile(mc, h, w);
}

VideoModel::VideoModel(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg), spec_(framework_spec(cfg.framework)) {
  const int c = cfg.base_width;
  LVC_CHECK(c >= 8 && c % 4 == 0, "base width must be a multiple of 4, >= 8");
  motion_est_ = MotionEstimator(params_, c, seed);
  motion_codec_ = AutoCodec(params_, "motion", 2, 2, c, seed);
  intra_codec_ = AutoCodec(params_, "intra", 3, 3, c, seed);
  extractor_ = FeatureExtractor(params_, buffer_channels(), c, seed);
  if (spec_.uses_condition) condgen_.emplace(params_, c, seed);
  if (spec_.uses_pixel_prediction) predictor_.emplace(params_, c, seed);
  if (spec_.uses_mask) maskgen_.emplace(params_, c, seed);
  inter_ = InterCodec(params_, spec_.uses_condition, c, seed);
  if (cfg.strategy != BufferStrategy::Explicit)
    implicit_proj_.emplace(params_, "implicit_proj", c, cfg.implicit_channels,
                           1, 1, Init::He, seed);
}

int VideoModel::buffer_channels() const {
  return buffer_channel_count(cfg_.strategy, cfg_.implicit_channels);
}

const ConditionGenerator& VideoModel::condgen() const {
  LVC_CHECK(condgen_, "framework has no condition generator");
  return *condgen_;
}
const PixelPredictor& VideoModel::predictor() const {
  LVC_CHECK(predictor_, "framework has no pixel predictor");
  return *predictor_;
}
const MaskGenerator& VideoModel::maskgen() const {
  LVC_CHECK(maskgen_, "framework has no mask generator");
  return *maskgen_;
}
const Conv2d& VideoModel::implicit_proj() const {
  LVC_CHECK(implicit_proj_, "explicit buffering has no implicit projection");
  return *implicit_proj_;
}

}  // namespace lvc
