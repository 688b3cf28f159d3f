#include "lvc/pipeline.h"

#include <cmath>

#include "lvc/evaluation.h"
#include "lvc/range_coder.h"

namespace lvc {

namespace {

EntropyParams to_entropy_params(const std::pair<Var, Var>& p) {
  return EntropyParams{p.first->val, p.second->val};
}

// Hyper-latent then latent, each in its own chunk. Encoder and decoder rebuild
// identical Gaussian tables from identical integers, which is the entire
// decodability argument.
template <typename Codec>
std::vector<uint8_t> code_latents(const Codec& codec, const Var& y,
                                  LatentCode* y_hat_out) {
  const Var z = codec.hyper_encode(y);
  const LatentCode z_hat = quantize_round(z->val);
  const auto prior =
      to_entropy_params(codec.prior_params(z_hat.shape.h, z_hat.shape.w));
  const std::vector<uint8_t> z_bytes = encode_symbols(z_hat, prior);

  const auto cond = to_entropy_params(
      codec.hyper_decode(constant(dequantize(z_hat))));
  const LatentCode y_hat = quantize_round(y->val);
  const std::vector<uint8_t> y_bytes = encode_symbols(y_hat, cond);

  ByteWriter w;
  w.chunk(z_bytes);
  w.chunk(y_bytes);
  *y_hat_out = y_hat;
  return w.take();
}

template <typename Codec>
LatentCode decode_latents(const Codec& codec,
                          const std::vector<uint8_t>& payload,
                          const Shape& y_shape) {
  ByteReader r(payload);
  const std::vector<uint8_t> z_bytes = r.chunk();
  const std::vector<uint8_t> y_bytes = r.chunk();
  LVC_CHECK_INTEGRITY(r.at_end(), "trailing bytes in latent payload");

  const Shape z_shape{codec.hyper_ch, y_shape.h / 2, y_shape.w / 2};
  const auto prior =
      to_entropy_params(codec.prior_params(z_shape.h, z_shape.w));
  const LatentCode z_hat =
      decode_symbols(z_bytes.data(), z_bytes.size(), z_shape, prior);

  const auto cond = to_entropy_params(
      codec.hyper_decode(constant(dequantize(z_hat))));
  return decode_symbols(y_bytes.data(), y_bytes.size(), y_shape, cond);
}

Shape latent_shape(int latent_ch, int ph, int pw) {
  return Shape{latent_ch, ph / 4, pw / 4};
}

}  // namespace

InterContext build_inter_context(const VideoModel& model,
                                 const FrameworkSpec& spec,
                                 const TemporalBuffer& buffer,
                                 const Var& flow_hat,
                                 const PipelineOptions& opts) {
  InterContext ctx;
  const bool intra_ref = buffer.holds_intra_only();
  if (opts.trace) {
    if (intra_ref)
      ++opts.trace->adapter_intra_calls;
    else
      ++opts.trace->adapter_inter_calls;
  }
  Var features = model.extractor().extract(buffer.reference(), intra_ref);
  ctx.warped = warp_bilinear(features, flow_hat);
  if (spec.uses_condition) {
    ctx.condition = model.condgen().generate(ctx.warped);
    if (opts.trace) ++opts.trace->condgen_calls;
  }
  if (spec.uses_pixel_prediction) {
    ctx.prediction = model.predictor().predict(ctx.warped);
    if (opts.trace) ++opts.trace->predictor_calls;
  }
  if (spec.uses_mask) {
    if (opts.forced_mask) {
      const Shape s = ctx.warped->val.shape;
      ctx.mask = constant(
          Tensor::full(Shape{1, s.h, s.w}, *opts.forced_mask));
    } else {
      ctx.mask = model.maskgen().generate(flow_hat, *ctx.prediction);
      if (opts.trace) ++opts.trace->maskgen_calls;
    }
  }
  return ctx;
}

IntraEncodeResult encode_intra_frame(const VideoModel& model, const Var& x) {
  NoGradGuard ng;
  const Shape s = x->val.shape;
  LVC_CHECK(s.c == 3 && s.h % 64 == 0 && s.w % 64 == 0,
            "intra input must be a pad-aligned frame, got ", s.str());
  const AutoCodec& codec = model.intra_codec();
  const Var y = codec.encode(x);
  LatentCode y_hat;
  IntraEncodeResult res;
  res.payload = code_latents(codec, y, &y_hat);
  res.bits_total = 8.0 * double(res.payload.size());
  res.recon = clamp01(codec.decode(constant(dequantize(y_hat))));
  return res;
}

Var decode_intra_frame(const VideoModel& model,
                       const std::vector<uint8_t>& payload, int ph, int pw) {
  NoGradGuard ng;
  const AutoCodec& codec = model.intra_codec();
  const LatentCode y_hat =
      decode_latents(codec, payload, latent_shape(codec.latent_ch, ph, pw));
  return clamp01(codec.decode(constant(dequantize(y_hat))));
}

namespace {

// Decoder half of inter-frame coding, shared verbatim with the encoder: from
// integer latents and the temporal buffer to reconstruction, features and the
// next buffer.
struct InterDecodeOut {
  Var recon;
  Var features;
};

InterDecodeOut decode_inter_core(const VideoModel& model,
                                 const FrameworkSpec& spec,
                                 const LatentCode& y_motion,
                                 const LatentCode& y_inter,
                                 const TemporalBuffer& buffer,
                                 const PipelineOptions& opts) {
  const Var flow_hat =
      model.motion_codec().decode(constant(dequantize(y_motion)));
  const InterContext ctx =
      build_inter_context(model, spec, buffer, flow_hat, opts);
  const Var f_t = model.inter().decode_features(
      constant(dequantize(y_inter)), ctx.condition);
  const Var g = model.inter().generate_signal(f_t);
  InterDecodeOut out;
  out.recon =
      clamp01(compose_reconstruction(spec, g, ctx.prediction, ctx.mask));
  out.features = f_t;
  return out;
}

FrameworkSpec active_spec(const VideoModel& model,
                          const PipelineOptions& opts) {
  return opts.spec_override ? *opts.spec_override : model.spec();
}

}  // namespace

TemporalBuffer advance_buffer(const VideoModel& model, const Var& recon,
                              const Var& features) {
  const BufferStrategy s = model.config().strategy;
  Var implicit;
  if (s != BufferStrategy::Explicit) {
    const Conv2d& proj = model.implicit_proj();
    implicit = proj(features);
  }
  return TemporalBuffer::after_inter(s, model.config().implicit_channels,
                                     recon, implicit);
}

PFrameEncodeResult encode_p_frame(const VideoModel& model, const Var& x,
                                  const TemporalBuffer& buffer,
                                  const Var& prev_recon, bool first_inter,
                                  const PipelineOptions& opts) {
  NoGradGuard ng;
  const FrameworkSpec spec = active_spec(model, opts);
  LVC_CHECK(buffer.holds_intra_only() == first_inter,
            "adapter switch does not match buffer state");

  const Var flow = model.motion_est().estimate(x, prev_recon);
  const Var y_m = model.motion_codec().encode(flow);
  LatentCode y_m_hat;
  PFrameEncodeResult res;
  res.record.bytes_motion = code_latents(model.motion_codec(), y_m, &y_m_hat);

  // Everything below the motion latents runs through the same decoder-side
  // functions the standalone decoder uses, on the same integers.
  const Var flow_hat =
      model.motion_codec().decode(constant(dequantize(y_m_hat)));
  const InterContext ctx =
      build_inter_context(model, spec, buffer, flow_hat, opts);

  const Var signal = compose_coded_signal(spec, x, ctx.prediction, ctx.mask);
  const Var y_i = model.inter().encode(signal, ctx.condition);
  LatentCode y_i_hat;
  res.record.bytes_inter = code_latents(model.inter(), y_i, &y_i_hat);

  const Var f_t = model.inter().decode_features(
      constant(dequantize(y_i_hat)), ctx.condition);
  const Var g = model.inter().generate_signal(f_t);
  res.record.recon =
      clamp01(compose_reconstruction(spec, g, ctx.prediction, ctx.mask));
  res.features = f_t;
  res.record.bits_total = 8.0 * double(res.record.bytes_motion.size() +
                                       res.record.bytes_inter.size());
  res.next_buffer = advance_buffer(model, res.record.recon, f_t);
  return res;
}

PFrameDecodeResult decode_p_frame(const VideoModel& model,
                                  const std::vector<uint8_t>& bytes_motion,
                                  const std::vector<uint8_t>& bytes_inter,
                                  const TemporalBuffer& buffer,
                                  const PipelineOptions& opts) {
  NoGradGuard ng;
  const FrameworkSpec spec = active_spec(model, opts);
  const Var ref = buffer.reference();
  const int ph = ref->val.shape.h, pw = ref->val.shape.w;

  const LatentCode y_m_hat =
      decode_latents(model.motion_codec(), bytes_motion,
                     latent_shape(model.motion_codec().latent_ch, ph, pw));
  const LatentCode y_i_hat =
      decode_latents(model.inter(), bytes_inter,
                     latent_shape(model.inter().latent_ch, ph, pw));
  const InterDecodeOut out =
      decode_inter_core(model, spec, y_m_hat, y_i_hat, buffer, opts);
  PFrameDecodeResult res;
  res.recon = out.recon;
  res.features = out.features;
  res.next_buffer = advance_buffer(model, out.recon, out.features);
  return res;
}

namespace {

Var pad_frame(const Tensor& frame, int ph, int pw) {
  Var x = constant(frame);
  const Shape s = frame.shape;
  if (s.h == ph && s.w == pw) return x;
  return pad_replicate(x, 0, ph - s.h, 0, pw - s.w);
}

Tensor crop_frame(const Var& recon, int h, int w) {
  if (recon->val.shape.h == h && recon->val.shape.w == w) return recon->val;
  return crop(recon, 0, 0, h, w)->val;
}

}  // namespace

SequenceEncodeResult encode_sequence(const VideoModel& model,
                                     const std::vector<Tensor>& frames,
                                     int intra_period,
                                     const PipelineOptions& opts) {
  LVC_CHECK(!frames.empty(), "no frames to encode");
  LVC_CHECK(intra_period > 0, "intra period must be positive");
  LVC_CHECK(frames.size() <= 0xFFFF, "too many frames for one container");
  const Shape s = frames[0].shape;
  LVC_CHECK(s.c == 3, "frames must be RGB");
  for (const auto& f : frames)
    LVC_CHECK(f.shape == s, "frame dimension mismatch in sequence");
  const int ph = pad_align(s.h), pw = pad_align(s.w);

  SequenceEncodeResult res;
  ContainerHeader h;
  h.framework = uint8_t(model.config().framework);
  h.strategy = uint8_t(model.config().strategy);
  h.implicit_channels =
      model.config().strategy == BufferStrategy::Explicit
          ? 0
          : uint16_t(model.config().implicit_channels);
  h.lambda_index = model.config().lambda_index();
  h.width = uint16_t(s.w);
  h.height = uint16_t(s.h);
  h.frame_count = uint16_t(frames.size());
  h.intra_period = uint16_t(intra_period);
  h.weight_hash = model.params().weight_hash();
  ByteWriter container;
  h.write(container);

  TemporalBuffer buffer;
  Var prev_recon;
  double total_bits = 0.0;
  for (size_t t = 0; t < frames.size(); ++t) {
    const Var x = pad_frame(frames[t], ph, pw);
    FrameStats st;
    ByteWriter frame_payload;
    Var recon_padded;
    if (t % size_t(intra_period) == 0) {
      IntraEncodeResult ir = encode_intra_frame(model, x);
      st.type = 'I';
      st.bits = ir.bits_total;
      res.bits_intra += ir.bits_total;
      frame_payload.u8(0);
      frame_payload.chunk({});
      frame_payload.chunk(ir.payload);
      recon_padded = ir.recon;
      buffer = TemporalBuffer::after_intra(
          model.config().strategy, model.config().implicit_channels, ir.recon);
    } else {
      const bool first_inter = (t % size_t(intra_period)) == 1;
      PFrameEncodeResult pr =
          encode_p_frame(model, x, buffer, prev_recon, first_inter, opts);
      st.type = 'P';
      st.bits = pr.record.bits_total;
      res.bits_motion += 8.0 * double(pr.record.bytes_motion.size());
      res.bits_inter += 8.0 * double(pr.record.bytes_inter.size());
      frame_payload.u8(1);
      frame_payload.chunk(pr.record.bytes_motion);
      frame_payload.chunk(pr.record.bytes_inter);
      recon_padded = pr.record.recon;
      buffer = std::move(pr.next_buffer);
    }
    prev_recon = recon_padded;
    Tensor cropped = crop_frame(recon_padded, s.h, s.w);
    st.psnr = psnr_rgb(frames[t], cropped);
    total_bits += st.bits;
    res.frames.push_back(st);
    res.recon.push_back(std::move(cropped));
    container.chunk(frame_payload.bytes());
  }
  res.bpp = total_bits / (double(frames.size()) * s.h * s.w);
  double psnr_acc = 0.0;
  for (const auto& st : res.frames) psnr_acc += st.psnr;
  res.psnr_mean = psnr_acc / double(res.frames.size());
  res.container = container.take();
  return res;
}

ContainerHeader peek_container_header(const std::vector<uint8_t>& container) {
  ByteReader r(container);
  return ContainerHeader::read(r);
}

SequenceDecodeResult decode_sequence(const VideoModel& model,
                                     const std::vector<uint8_t>& container,
                                     const PipelineOptions& opts) {
  ByteReader r(container);
  SequenceDecodeResult res;
  res.header = ContainerHeader::read(r);
  const ContainerHeader& h = res.header;
  LVC_CHECK_INTEGRITY(h.weight_hash == model.params().weight_hash(),
                      "container weight hash does not match model weights");
  LVC_CHECK_INTEGRITY(h.framework == uint8_t(model.config().framework) &&
                          h.strategy == uint8_t(model.config().strategy),
                      "container framework/strategy does not match model");
  if (model.config().strategy != BufferStrategy::Explicit)
    LVC_CHECK_INTEGRITY(
        h.implicit_channels == uint16_t(model.config().implicit_channels),
        "container buffer width does not match model");
  const int ph = pad_align(h.height), pw = pad_align(h.width);

  TemporalBuffer buffer;
  for (int t = 0; t < int(h.frame_count); ++t) {
    const std::vector<uint8_t> frame_payload = r.chunk();
    ByteReader fr(frame_payload);
    const uint8_t type = fr.u8();
    const std::vector<uint8_t> motion = fr.chunk();
    const std::vector<uint8_t> inter = fr.chunk();
    LVC_CHECK_INTEGRITY(fr.at_end(), "trailing bytes in frame payload");
    const bool expect_intra = (t % int(h.intra_period)) == 0;
    LVC_CHECK_INTEGRITY((type == 0) == expect_intra,
                        "frame type does not follow the intra period");
    Var recon_padded;
    if (type == 0) {
      LVC_CHECK_INTEGRITY(motion.empty(), "intra frame with motion payload");
      recon_padded = decode_intra_frame(model, inter, ph, pw);
      buffer = TemporalBuffer::after_intra(model.config().strategy,
                                           model.config().implicit_channels,
                                           recon_padded);
      res.frame_types.push_back('I');
    } else {
      PFrameDecodeResult pr =
          decode_p_frame(model, motion, inter, buffer, opts);
      recon_padded = pr.recon;
      buffer = std::move(pr.next_buffer);
      res.frame_types.push_back('P');
    }
    res.frames.push_back(crop_frame(recon_padded, h.height, h.width));
  }
  LVC_CHECK_INTEGRITY(r.at_end(), "trailing bytes after last frame");
  return res;
}

}  // namespace lvc
