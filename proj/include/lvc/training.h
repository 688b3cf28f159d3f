#pragma once

#include <functional>
#include <vector>

#include "lvc/entropy.h"
#include "lvc/model.h"
#include "lvc/pipeline.h"

namespace lvc {

// Rate-distortion training configuration. Progresses through three stages:
// motion warm-up (flow quality plus motion rate), single inter frame after an
// intra, then a multi-frame rollout that backpropagates through the temporal
// buffer. The reconstruction path quantizes with a straight-through round;
// rate terms see additive uniform noise.
struct TrainConfig {
  double lambda = 1024.0;
  int steps = 500;
  int batch = 2;
  int patch = 256;
  double lr = 1e-3;
  double lr_decay_frac = 0.9;
  double lr_decay = 0.1;
  uint64_t seed = 1;
  int rollout = 4;
  double warmup_frac = 0.15;
  double single_frac = 0.55;
  double grad_clip = 1.0;
};

struct StepLog {
  int step = 0;
  int stage = 1;
  double loss = 0.0;
  double dist = 0.0;      // mean squared error
  double rate_bpp = 0.0;  // estimated bits per pixel
  double lr = 0.0;
};

struct TrainResult {
  std::vector<StepLog> logs;
};

struct RdTerms {
  Var loss;
  double dist = 0.0;
  double rate_bpp = 0.0;
};

// Full coding forward on one clip: intra frame plus n_p inter frames, buffer
// carried with gradients. recon_mode selects the reconstruction-path
// quantizer (straight-through for training, noise for derivative checks
// where the rounding kinks would poison finite differences). If capture is
// given, the integer recon-path latents are recorded in coding order.
RdTerms training_clip_forward(const VideoModel& model,
                              const std::vector<Tensor>& clip, int n_p,
                              double lambda, QuantizeMode recon_mode,
                              Rng& rng,
                              std::vector<LatentCode>* capture = nullptr,
                              std::vector<Tensor>* recons = nullptr);

// Stage-1 objective: code the estimated flow, warp the previous frame with
// the decoded flow, penalize warp error and motion rate.
RdTerms motion_warmup_forward(const VideoModel& model, const Tensor& prev,
                              const Tensor& cur, double lambda,
                              QuantizeMode recon_mode, Rng& rng);

// Pure-decoder replay of captured latents through the inference path.
// Training-forward reconstructions must match this bit for bit; the encoder
// learns from exactly what the decoder will see.
std::vector<Tensor> replay_decode_clip(const VideoModel& model,
                                       const std::vector<LatentCode>& latents,
                                       int n_p, int ph, int pw);

TrainResult train_model(VideoModel& model, const TrainConfig& cfg,
                        const std::function<void(const StepLog&)>& on_step =
                            nullptr);

class Adam {
 public:
  Adam(ParamStore& params, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void zero_grad();
  // Returns the pre-clip global gradient norm.
  double step(double lr, double grad_clip);

 private:
  ParamStore& params_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace lvc
