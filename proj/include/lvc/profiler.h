#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvc/tensor.h"

namespace lvc {

// Multiply-accumulate accounting. Convolutions count
// H_out*W_out*k_h*k_w*C_in*C_out; bilinear warp counts 11 per output element.
// Entropy coder arithmetic and pointwise nonlinearities are excluded by
// policy.
struct MacCounter {
  double macs = 0.0;

  void conv(int h_out, int w_out, int kh, int kw, int c_in, int c_out) {
    macs += double(h_out) * w_out * kh * kw * double(c_in) * c_out;
  }
  void warp(int64_t out_elems) { macs += 11.0 * double(out_elems); }
};

// When set, the live conv/warp kernels report their work here. Used to verify
// that analytic profiles mirror what actually executes.
MacCounter*& active_mac_counter();

struct ComplexityReport {
  double enc_kmacs_per_pixel = 0.0;
  double dec_kmacs_per_pixel = 0.0;
  double enc_macs = 0.0;
  double dec_macs = 0.0;
  int64_t param_count = 0;
  int width = 0;
  int height = 0;
};

class VideoModel;

// Analytic per-P-frame complexity of a model at the given source resolution.
// Mirrors the coding path exactly; resolution enters only through spatial
// dimensions, so per-pixel figures are resolution independent for
// pad-aligned sizes.
ComplexityReport profile_model(const VideoModel& model, int width, int height);

}  // namespace lvc
