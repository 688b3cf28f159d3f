#include "lvc/profiler.h"

#include "lvc/model.h"

namespace lvc {

MacCounter*& active_mac_counter() {
  thread_local MacCounter* counter = nullptr;
  return counter;
}

namespace {

// Decoder-side work for one inter frame on a steady-state buffer (regular
// adapter). Mirrors decode_p_frame operation for operation.
void profile_decode_side(const VideoModel& m, int ph, int pw, MacCounter& mc) {
  const FrameworkSpec& spec = m.spec();
  m.motion_codec().profile_decode(mc, ph, pw);
  m.extractor().profile(mc, /*intra_reference=*/false, ph, pw);
  mc.warp(int64_t(m.width()) * ph * pw);
  if (spec.uses_condition) m.condgen().profile(mc, ph, pw);
  if (spec.uses_pixel_prediction) m.predictor().profile(mc, ph, pw);
  if (spec.uses_mask) m.maskgen().profile(mc, ph, pw);
  m.inter().profile_decode(mc, ph, pw);
  if (m.has_implicit_proj()) {
    int h = ph, w = pw;
    m.implicit_proj().profile(mc, h, w);
  }
}

// Additional encoder-only work: motion search, both analysis transforms.
void profile_encode_side(const VideoModel& m, int ph, int pw, MacCounter& mc) {
  m.motion_est().profile(mc, ph, pw);
  m.motion_codec().profile_encode(mc, ph, pw);
  m.inter().profile_encode(mc, ph, pw);
  profile_decode_side(m, ph, pw, mc);
}

}  // namespace

ComplexityReport profile_model(const VideoModel& model, int width,
                               int height) {
  LVC_CHECK(width > 0 && height > 0, "profile needs positive dimensions");
  const int pw = pad_align(width), ph = pad_align(height);
  ComplexityReport r;
  r.width = width;
  r.height = height;
  MacCounter enc, dec;
  profile_encode_side(model, ph, pw, enc);
  profile_decode_side(model, ph, pw, dec);
  r.enc_macs = enc.macs;
  r.dec_macs = dec.macs;
  const double px = double(width) * height;
  r.enc_kmacs_per_pixel = enc.macs / px / 1000.0;
  r.dec_kmacs_per_pixel = dec.macs / px / 1000.0;
  r.param_count = model.params().param_count();
  return r;
}

}  // namespace lvc
