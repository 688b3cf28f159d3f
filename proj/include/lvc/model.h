#pragma once

#include <optional>
#include <string>

#include "lvc/buffering.h"
#include "lvc/entropy.h"
#include "lvc/framework.h"
#include "lvc/nn.h"

namespace lvc {

struct ModelConfig {
  Framework framework = Framework::CRC;
  BufferStrategy strategy = BufferStrategy::Hybrid;
  int implicit_channels = 64;  // ignored for explicit buffering
  double lambda = 1024.0;
  int base_width = 64;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& json_text);
  // Index into the canonical rate ladder {256, 512, 1024, 2048}; 255 when
  // the lambda is off-ladder.
  uint8_t lambda_index() const;
  std::string variant_name() const;
};

// Coarse-to-fine flow estimator over a 3-level pyramid. Each level refines
// an upsampled flow with a small network whose last layer is zero
// initialized, so the untrained estimator returns exact zero flow.
struct MotionEstimator {
  Conv2d l[3][3];

  MotionEstimator() = default;
  MotionEstimator(ParamStore& store, int width, uint64_t seed);
  Var estimate(const Var& cur, const Var& ref) const;
  void profile(MacCounter& mc, int h, int w) const;
};

// Variational codec: two stride-2 analysis steps to a latent at 1/4
// resolution, a hyperprior at 1/8 conditioning the latent's Gaussian
// parameters, and a learned per-channel Gaussian prior over the hyper
// latent itself.
struct AutoCodec {
  int in_ch = 0, out_ch = 0, latent_ch = 0, hyper_ch = 0;
  Conv2d e0, e1, e2;
  Conv2d he0, he1;
  Conv2d hd0, hd1;
  Conv2d d0, d1, d2;
  Var prior;  // (2*hyper_ch, 1, 1): mean rows then raw-scale rows

  AutoCodec() = default;
  AutoCodec(ParamStore& store, const std::string& name, int in_ch, int out_ch,
            int width, uint64_t seed);

  Var encode(const Var& x) const;
  Var hyper_encode(const Var& y) const;
  // Gaussian params for the latent, from the decoded hyper latent.
  std::pair<Var, Var> hyper_decode(const Var& z_hat) const;
  // Gaussian params for the hyper latent, from the learned prior.
  std::pair<Var, Var> prior_params(int hz, int wz) const;
  Var decode(const Var& y_hat) const;

  void profile_encode(MacCounter& mc, int h, int w) const;
  void profile_decode(MacCounter& mc, int h, int w) const;
};

// Conditional inter codec. The encoder sees the coded signal (3 channels)
// plus, for conditional frameworks, the condition features; the decoder
// embeds the condition to latent resolution and decodes to a feature map
// that the frame generator turns into the decoded signal.
struct InterCodec {
  bool conditional = false;
  int latent_ch = 0, hyper_ch = 0;
  Conv2d ce0, ce1;  // condition embedding, conditional only
  Conv2d e0, e1, e2;
  Conv2d he0, he1;
  Conv2d hd0, hd1;
  Conv2d d0, d1, d2;
  ResBlock fg_res;
  Conv2d fg_proj;
  Var prior;

  InterCodec() = default;
  InterCodec(ParamStore& store, bool conditional, int width, uint64_t seed);

  Var embed_condition(const Var& cond) const;
  Var encode(const Var& signal, const std::optional<Var>& cond) const;
  Var hyper_encode(const Var& y) const;
  std::pair<Var, Var> hyper_decode(const Var& z_hat) const;
  std::pair<Var, Var> prior_params(int hz, int wz) const;
  // Returns the decoded feature map F_t (width channels, full resolution).
  Var decode_features(const Var& y_hat, const std::optional<Var>& cond) const;
  Var generate_signal(const Var& features) const;

  void profile_encode(MacCounter& mc, int h, int w) const;
  void profile_decode(MacCounter& mc, int h, int w) const;
};

// Buffered-reference feature extractor with switchable input adapters: a 3x3
// adapter for the decoded intra frame (first inter frame of a group), a 1x1
// adapter for regular buffer contents.
struct FeatureExtractor {
  Conv2d adapter_intra;
  Conv2d adapter_inter;
  ResBlock res;

  FeatureExtractor() = default;
  FeatureExtractor(ParamStore& store, int buffer_ch, int width, uint64_t seed);
  Var extract(const Var& ref, bool intra_reference) const;
  void profile(MacCounter& mc, bool intra_reference, int h, int w) const;
};

struct ConditionGenerator {
  Conv2d c0, c1;
  ConditionGenerator() = default;
  ConditionGenerator(ParamStore& store, int width, uint64_t seed);
  Var generate(const Var& warped_features) const;
  void profile(MacCounter& mc, int h, int w) const;
};

// Pixel-domain predictor from warped features, output clamped to [0,1].
struct PixelPredictor {
  Conv2d m0, m1;
  PixelPredictor() = default;
  PixelPredictor(ParamStore& store, int width, uint64_t seed);
  Var predict(const Var& warped_features) const;
  void profile(MacCounter& mc, int h, int w) const;
};

// Per-pixel blend weights in (0,1) from decoded motion and the pixel
// prediction. Untrained output is exactly 0.5 everywhere.
struct MaskGenerator {
  Conv2d k0, k1, k2;
  MaskGenerator() = default;
  MaskGenerator(ParamStore& store, int width, uint64_t seed);
  Var generate(const Var& flow, const Var& prediction) const;
  void profile(MacCounter& mc, int h, int w) const;
};

class VideoModel {
 public:
  VideoModel(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const FrameworkSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  int width() const { return cfg_.base_width; }
  int buffer_channels() const;

  const MotionEstimator& motion_est() const { return motion_est_; }
  const AutoCodec& motion_codec() const { return motion_codec_; }
  const AutoCodec& intra_codec() const { return intra_codec_; }
  const FeatureExtractor& extractor() const { return extractor_; }
  const ConditionGenerator& condgen() const;
  const PixelPredictor& predictor() const;
  const MaskGenerator& maskgen() const;
  const InterCodec& inter() const { return inter_; }
  // 1x1 projection of decoded features into the implicit buffer slot.
  const Conv2d& implicit_proj() const;

  bool has_condgen() const { return condgen_.has_value(); }
  bool has_predictor() const { return predictor_.has_value(); }
  bool has_maskgen() const { return maskgen_.has_value(); }
  bool has_implicit_proj() const { return implicit_proj_.has_value(); }

 private:
  ModelConfig cfg_;
  FrameworkSpec spec_;
  ParamStore params_;
  MotionEstimator motion_est_;
  AutoCodec motion_codec_;
  AutoCodec intra_codec_;
  FeatureExtractor extractor_;
  std::optional<ConditionGenerator> condgen_;
  std::optional<PixelPredictor> predictor_;
  std::optional<MaskGenerator> maskgen_;
  InterCodec inter_;
  std::optional<Conv2d> implicit_proj_;
};

// Pad-aligned coding resolution. All internal processing runs at this size;
// reconstructions are cropped back to the source size.
int pad_align(int dim);

}  // namespace lvc
