#pragma once

#include <vector>

#include "lvc/tensor.h"

namespace lvc {

// BT.709 limited-range YUV420 to RGB in [0,1]: Y in [16,235] maps to [0,1],
// chroma is upsampled bilinearly from the top-left co-sited grid. Output
// values are clipped to [0,1].
Tensor yuv420_to_rgb(const std::vector<uint8_t>& y,
                     const std::vector<uint8_t>& u,
                     const std::vector<uint8_t>& v, int width, int height);

// BT.709 luma in [0,1] from an RGB frame in [0,1].
Tensor rgb_to_luma(const Tensor& rgb);

// PSNR over all RGB samples in [0,1], capped at 100 dB for identical inputs.
double psnr_rgb(const Tensor& a, const Tensor& b);

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;
};

struct RDCurve {
  std::vector<RDPoint> points;
};

// Monotone piecewise-cubic interpolation of log10(bpp) over PSNR with exact
// piecewise-polynomial integration. Requires >= 4 points per curve, strictly
// increasing bpp and PSNR after sorting, and overlapping PSNR ranges.
// Positive result means the test curve spends more rate than the anchor.
double bd_rate_percent(const RDCurve& anchor, const RDCurve& test);

// Mean over per-sequence BD-rates, summed in a canonical order so the result
// is invariant to input permutation.
double aggregate_bd(const std::vector<double>& per_sequence);

// Mean DCT-energy variation of BT.709 luma over time: per 32x32 block the
// mean absolute non-DC coefficient of an orthonormal 2-D DCT-II, then the
// mean absolute difference between consecutive frames. Frames must share
// dimensions divisible by 32.
double temporal_complexity(const std::vector<Tensor>& rgb_frames);

namespace detail {
// Fritsch-Carlson monotone cubic slopes with three-point endpoint rule.
std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y);
// Integral of the interpolant over [a, b], which must lie inside the knots.
double pchip_integrate(const std::vector<double>& x,
                       const std::vector<double>& y, double a, double b);
}  // namespace detail

}  // namespace lvc
