#include "lvc/training.h"

#include <cmath>

#include "lvc/dataset.h"
#include "lvc/threading.h"

namespace lvc {

namespace {

struct CodedForTraining {
  Var y_hat;
  Var rate_bits;
};

template <typename Codec>
CodedForTraining code_for_training(const Codec& codec, const Var& y,
                                   QuantizeMode recon_mode, Rng& rng,
                                   std::vector<LatentCode>* capture) {
  const Var z = codec.hyper_encode(y);
  const Var z_hat = quantize(z, recon_mode, &rng);
  const auto [pm, ps] =
      codec.prior_params(z->val.shape.h, z->val.shape.w);
  const Var z_noisy = quantize(z, QuantizeMode::Noise, &rng);
  Var rate = bits_total(gaussian_likelihood(z_noisy, pm, ps, kPMin));

  const auto [mu, sd] = codec.hyper_decode(z_hat);
  const Var y_noisy = quantize(y, QuantizeMode::Noise, &rng);
  rate = add(rate, bits_total(gaussian_likelihood(y_noisy, mu, sd, kPMin)));
  const Var y_hat = quantize(y, recon_mode, &rng);
  if (capture) {
    capture->push_back(quantize_round(z_hat->val));
    capture->push_back(quantize_round(y_hat->val));
  }
  return {y_hat, rate};
}

Var frame_loss(const Var& dist, const Var& rate_bits, double lambda,
               int64_t num_pixels) {
  return add(scale(dist, float(lambda)),
             scale(rate_bits, float(1.0 / double(num_pixels))));
}

}  // namespace

RdTerms training_clip_forward(const VideoModel& model,
                              const std::vector<Tensor>& clip, int n_p,
                              double lambda, QuantizeMode recon_mode,
                              Rng& rng, std::vector<LatentCode>* capture,
                              std::vector<Tensor>* recons) {
  LVC_CHECK(int(clip.size()) >= n_p + 1, "clip too short for rollout");
  const Shape s = clip[0].shape;
  LVC_CHECK(s.h % 64 == 0 && s.w % 64 == 0, "training patches must be "
                                            "pad-aligned, got ", s.str());
  const int64_t npx = int64_t(s.h) * s.w;
  const FrameworkSpec& spec = model.spec();

  // Intra frame.
  const Var x0 = constant(clip[0]);
  const Var y0 = model.intra_codec().encode(x0);
  auto coded0 =
      code_for_training(model.intra_codec(), y0, recon_mode, rng, capture);
  Var recon = clamp01(model.intra_codec().decode(coded0.y_hat));
  Var d = mse(recon, x0);
  double dist_acc = scalar_value(d);
  double rate_acc = scalar_value(coded0.rate_bits);
  Var total = frame_loss(d, coded0.rate_bits, lambda, npx);
  if (recons) recons->push_back(recon->val);

  TemporalBuffer buffer = TemporalBuffer::after_intra(
      model.config().strategy, model.config().implicit_channels, recon);
  Var prev = recon;

  for (int t = 1; t <= n_p; ++t) {
    const Var x = constant(clip[t]);
    const Var flow = model.motion_est().estimate(x, prev);
    const Var y_m = model.motion_codec().encode(flow);
    auto coded_m =
        code_for_training(model.motion_codec(), y_m, recon_mode, rng, capture);
    const Var flow_hat = model.motion_codec().decode(coded_m.y_hat);

    const InterContext ctx =
        build_inter_context(model, spec, buffer, flow_hat, {});
    const Var signal = compose_coded_signal(spec, x, ctx.prediction, ctx.mask);
    const Var y_i = model.inter().encode(signal, ctx.condition);
    auto coded_i =
        code_for_training(model.inter(), y_i, recon_mode, rng, capture);
    const Var f_t = model.inter().decode_features(coded_i.y_hat,
                                                  ctx.condition);
    const Var g = model.inter().generate_signal(f_t);
    recon = clamp01(compose_reconstruction(spec, g, ctx.prediction, ctx.mask));
    if (recons) recons->push_back(recon->val);

    d = mse(recon, x);
    const Var rate = add(coded_m.rate_bits, coded_i.rate_bits);
    dist_acc += scalar_value(d);
    rate_acc += scalar_value(rate);
    total = add(total, frame_loss(d, rate, lambda, npx));

    buffer = advance_buffer(model, recon, f_t);
    prev = recon;
  }

  const double inv_frames = 1.0 / double(n_p + 1);
  RdTerms out;
  out.loss = scale(total, float(inv_frames));
  out.dist = dist_acc * inv_frames;
  out.rate_bpp = rate_acc * inv_frames / double(npx);
  return out;
}

RdTerms motion_warmup_forward(const VideoModel& model, const Tensor& prev,
                              const Tensor& cur, double lambda,
                              QuantizeMode recon_mode, Rng& rng) {
  const Shape s = cur.shape;
  const int64_t npx = int64_t(s.h) * s.w;
  const Var ref = constant(prev);
  const Var x = constant(cur);
  const Var flow = model.motion_est().estimate(x, ref);
  const Var y_m = model.motion_codec().encode(flow);
  auto coded =
      code_for_training(model.motion_codec(), y_m, recon_mode, rng, nullptr);
  const Var flow_hat = model.motion_codec().decode(coded.y_hat);
  const Var warped = warp_bilinear(ref, flow_hat);
  const Var d = mse(warped, x);
  RdTerms out;
  out.loss = frame_loss(d, coded.rate_bits, lambda, npx);
  out.dist = scalar_value(d);
  out.rate_bpp = scalar_value(coded.rate_bits) / double(npx);
  return out;
}

std::vector<Tensor> replay_decode_clip(const VideoModel& model,
                                       const std::vector<LatentCode>& latents,
                                       int n_p, int ph, int pw) {
  NoGradGuard ng;
  LVC_CHECK(int(latents.size()) == 2 * (1 + 2 * n_p),
            "latent capture does not match rollout length");
  LVC_CHECK(latents[1].shape.h == ph / 4 && latents[1].shape.w == pw / 4,
            "latent capture does not match frame size");
  size_t idx = 0;
  const auto next = [&]() -> const LatentCode& { return latents[idx++]; };

  std::vector<Tensor> recons;
  next();  // intra hyper latent: params not needed to reconstruct
  Var recon =
      clamp01(model.intra_codec().decode(constant(dequantize(next()))));
  recons.push_back(recon->val);
  TemporalBuffer buffer = TemporalBuffer::after_intra(
      model.config().strategy, model.config().implicit_channels, recon);

  for (int t = 1; t <= n_p; ++t) {
    next();
    const Var flow_hat =
        model.motion_codec().decode(constant(dequantize(next())));
    const InterContext ctx =
        build_inter_context(model, model.spec(), buffer, flow_hat, {});
    next();
    const Var f_t = model.inter().decode_features(
        constant(dequantize(next())), ctx.condition);
    const Var g = model.inter().generate_signal(f_t);
    recon = clamp01(
        compose_reconstruction(model.spec(), g, ctx.prediction, ctx.mask));
    recons.push_back(recon->val);
    buffer = advance_buffer(model, recon, f_t);
  }
  return recons;
}

Adam::Adam(ParamStore& params, double beta1, double beta2, double eps)
    : params_(params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& [name, p] : params_.items()) {
    m_.emplace_back(p->val.v.size(), 0.0f);
    v_.emplace_back(p->val.v.size(), 0.0f);
  }
}

void Adam::zero_grad() {
  for (const auto& [name, p] : params_.items()) {
    if (p->grad.v.empty()) continue;
    std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0f);
  }
}

double Adam::step(double lr, double grad_clip) {
  ++t_;
  double norm_sq = 0.0;
  for (const auto& [name, p] : params_.items())
    for (float g : p->grad.v) norm_sq += double(g) * g;
  const double norm = std::sqrt(norm_sq);
  const double clip_scale =
      (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;

  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  size_t i = 0;
  for (const auto& [name, p] : params_.items()) {
    if (p->grad.v.empty()) {
      ++i;
      continue;
    }
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < p->val.v.size(); ++j) {
      const double g = double(p->grad.v[j]) * clip_scale;
      m[j] = float(beta1_ * m[j] + (1.0 - beta1_) * g);
      v[j] = float(beta2_ * v[j] + (1.0 - beta2_) * g * g);
      const double mhat = double(m[j]) / bc1;
      const double vhat = double(v[j]) / bc2;
      p->val.v[j] -= float(lr * mhat / (std::sqrt(vhat) + eps_));
    }
    ++i;
  }
  return norm;
}

TrainResult train_model(VideoModel& model, const TrainConfig& cfg,
                        const std::function<void(const StepLog&)>& on_step) {
  LVC_CHECK(cfg.steps > 0 && cfg.batch > 0 && cfg.patch >= 64 &&
                cfg.patch % 64 == 0,
            "bad train config: steps/batch positive, patch a multiple of 64");
  LVC_CHECK(cfg.rollout >= 1, "rollout must be at least 1");
  const int warmup_end = int(cfg.warmup_frac * cfg.steps);
  const int single_end = warmup_end + int(cfg.single_frac * cfg.steps);
  const int decay_at = int(cfg.lr_decay_frac * cfg.steps);

  Adam opt(model.params());
  TrainResult result;

  // Clips are keyed by (seed, step, item), so the stream is identical no
  // matter how data production interleaves with the optimizer.
  const auto clip_for = [&](int step, int item, int frames) {
    const uint64_t mix[3] = {cfg.seed, uint64_t(step), uint64_t(item)};
    const uint64_t seed = fnv1a64(mix, sizeof(mix));
    return make_synthetic_clip(seed, frames, cfg.patch, cfg.patch);
  };

  for (int step = 0; step < cfg.steps; ++step) {
    const int stage = step < warmup_end ? 1 : (step < single_end ? 2 : 3);
    const int n_p = stage == 3 ? cfg.rollout : 1;
    const double lr = step >= decay_at ? cfg.lr * cfg.lr_decay : cfg.lr;

    opt.zero_grad();
    double loss_acc = 0.0, dist_acc = 0.0, rate_acc = 0.0;
    Var batch_loss;
    for (int item = 0; item < cfg.batch; ++item) {
      const std::vector<Tensor> clip = clip_for(step, item, n_p + 1);
      const uint64_t noise_mix[3] = {cfg.seed ^ 0x5eedf00dull,
                                     uint64_t(step), uint64_t(item)};
      Rng rng(fnv1a64(noise_mix, sizeof(noise_mix)));
      RdTerms terms;
      if (stage == 1)
        terms = motion_warmup_forward(model, clip[0], clip[1], cfg.lambda,
                                      QuantizeMode::StraightThrough, rng);
      else
        terms = training_clip_forward(model, clip, n_p, cfg.lambda,
                                      QuantizeMode::StraightThrough, rng);
      loss_acc += scalar_value(terms.loss);
      dist_acc += terms.dist;
      rate_acc += terms.rate_bpp;
      batch_loss = batch_loss ? add(batch_loss, terms.loss) : terms.loss;
    }
    const double loss_val = loss_acc / cfg.batch;
    if (!std::isfinite(loss_val))
      throw DataError(detail::format_msg(
          "training diverged at step ", step, " (stage ", stage,
          "): non-finite loss"));
    backward(scale(batch_loss, float(1.0 / cfg.batch)));
    opt.step(lr, cfg.grad_clip);

    StepLog log;
    log.step = step;
    log.stage = stage;
    log.loss = loss_val;
    log.dist = dist_acc / cfg.batch;
    log.rate_bpp = rate_acc / cfg.batch;
    log.lr = lr;
    result.logs.push_back(log);
    if (on_step) on_step(log);
  }
  return result;
}

}  // namespace lvc
