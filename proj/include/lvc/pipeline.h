#pragma once

#include <optional>
#include <vector>

#include "lvc/bitstream.h"
#include "lvc/buffering.h"
#include "lvc/model.h"

namespace lvc {

// Structural instrumentation: which optional sub-networks actually ran.
struct CodingTrace {
  int condgen_calls = 0;
  int predictor_calls = 0;
  int maskgen_calls = 0;
  int adapter_intra_calls = 0;
  int adapter_inter_calls = 0;
};

struct PipelineOptions {
  // Replace the generated mask with a constant (degeneration experiments).
  std::optional<float> forced_mask;
  // Run the coding path of a different framework on this model's weights.
  // The model must contain every sub-network the override needs.
  std::optional<FrameworkSpec> spec_override;
  CodingTrace* trace = nullptr;
};

// Decoder-side derivations shared verbatim by encoder and decoder: feature
// extraction from the buffer, warping by decoded motion, and the optional
// condition / prediction / mask heads.
struct InterContext {
  Var warped;
  std::optional<Var> condition;
  std::optional<Var> prediction;
  std::optional<Var> mask;
};
InterContext build_inter_context(const VideoModel& model,
                                 const FrameworkSpec& spec,
                                 const TemporalBuffer& buffer,
                                 const Var& flow_hat,
                                 const PipelineOptions& opts);

struct FrameRecord {
  std::vector<uint8_t> bytes_motion;
  std::vector<uint8_t> bytes_inter;
  double bits_total = 0.0;
  Var recon;  // padded resolution
};

struct PFrameEncodeResult {
  FrameRecord record;
  Var features;  // decoded feature map F_t at padded resolution
  TemporalBuffer next_buffer;
};

struct IntraEncodeResult {
  std::vector<uint8_t> payload;
  double bits_total = 0.0;
  Var recon;
};

IntraEncodeResult encode_intra_frame(const VideoModel& model, const Var& x);
Var decode_intra_frame(const VideoModel& model,
                       const std::vector<uint8_t>& payload, int ph, int pw);

// prev_recon is the encoder-side motion search reference (the previously
// decoded frame); it is not part of the temporal buffer contract.
PFrameEncodeResult encode_p_frame(const VideoModel& model, const Var& x,
                                  const TemporalBuffer& buffer,
                                  const Var& prev_recon, bool first_inter,
                                  const PipelineOptions& opts = {});

struct PFrameDecodeResult {
  Var recon;
  Var features;
  TemporalBuffer next_buffer;
};
PFrameDecodeResult decode_p_frame(const VideoModel& model,
                                  const std::vector<uint8_t>& bytes_motion,
                                  const std::vector<uint8_t>& bytes_inter,
                                  const TemporalBuffer& buffer,
                                  const PipelineOptions& opts = {});

TemporalBuffer advance_buffer(const VideoModel& model, const Var& recon,
                              const Var& features);

// Group-of-pictures protocol: intra every intra_period frames starting at 0,
// inter frames in between, the adapter switching to the intra flavor on the
// first inter frame after each intra.
struct FrameStats {
  char type = 'P';
  double bits = 0.0;
  double psnr = 0.0;
};

struct SequenceEncodeResult {
  std::vector<uint8_t> container;
  std::vector<Tensor> recon;  // cropped to source size
  std::vector<FrameStats> frames;
  double bpp = 0.0;
  double psnr_mean = 0.0;
  double bits_motion = 0.0;
  double bits_inter = 0.0;
  double bits_intra = 0.0;
};

SequenceEncodeResult encode_sequence(const VideoModel& model,
                                     const std::vector<Tensor>& frames,
                                     int intra_period,
                                     const PipelineOptions& opts = {});

struct SequenceDecodeResult {
  ContainerHeader header;
  std::vector<Tensor> frames;  // cropped to source size
  std::vector<char> frame_types;
};

SequenceDecodeResult decode_sequence(const VideoModel& model,
                                     const std::vector<uint8_t>& container,
                                     const PipelineOptions& opts = {});

// Reads just the header, for inspection without a model.
ContainerHeader peek_container_header(const std::vector<uint8_t>& container);

}  // namespace lvc
