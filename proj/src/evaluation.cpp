#include "lvc/evaluation.h"

#include <algorithm>
#include <cmath>

namespace lvc {

namespace {
// BT.709: Kr = 0.2126, Kb = 0.0722.
constexpr double kKr = 0.2126;
constexpr double kKb = 0.0722;
constexpr double kKg = 1.0 - kKr - kKb;
constexpr double kCrToR = 2.0 * (1.0 - kKr);           // 1.5748
constexpr double kCbToB = 2.0 * (1.0 - kKb);           // 1.8556
constexpr double kCbToG = 2.0 * kKb * (1.0 - kKb) / kKg;
constexpr double kCrToG = 2.0 * kKr * (1.0 - kKr) / kKg;
}  // namespace

Tensor yuv420_to_rgb(const std::vector<uint8_t>& y,
                     const std::vector<uint8_t>& u,
                     const std::vector<uint8_t>& v, int width, int height) {
  LVC_CHECK(width > 0 && height > 0 && width % 2 == 0 && height % 2 == 0,
            "yuv420 needs positive even dimensions");
  const int cw = width / 2, ch = height / 2;
  LVC_CHECK(y.size() == size_t(width) * height, "luma plane size mismatch");
  LVC_CHECK(u.size() == size_t(cw) * ch && v.size() == u.size(),
            "chroma plane size mismatch");

  // Chroma is co-sited with the top-left pixel of each 2x2 block; bilinear
  // interpolation between chroma samples, clamped at borders.
  const auto chroma_at = [&](const std::vector<uint8_t>& plane, double fy,
                             double fx) {
    const int x0 = std::clamp(int(std::floor(fx)), 0, cw - 1);
    const int y0 = std::clamp(int(std::floor(fy)), 0, ch - 1);
    const int x1 = std::min(x0 + 1, cw - 1);
    const int y1 = std::min(y0 + 1, ch - 1);
    const double ax = std::clamp(fx - x0, 0.0, 1.0);
    const double ay = std::clamp(fy - y0, 0.0, 1.0);
    const double p00 = plane[size_t(y0) * cw + x0];
    const double p01 = plane[size_t(y0) * cw + x1];
    const double p10 = plane[size_t(y1) * cw + x0];
    const double p11 = plane[size_t(y1) * cw + x1];
    return (1.0 - ay) * ((1.0 - ax) * p00 + ax * p01) +
           ay * ((1.0 - ax) * p10 + ax * p11);
  };

  Tensor rgb(3, height, width);
  for (int yy = 0; yy < height; ++yy)
    for (int xx = 0; xx < width; ++xx) {
      const double luma = (double(y[size_t(yy) * width + xx]) - 16.0) / 219.0;
      const double cb = (chroma_at(u, yy / 2.0, xx / 2.0) - 128.0) / 224.0;
      const double cr = (chroma_at(v, yy / 2.0, xx / 2.0) - 128.0) / 224.0;
      const double r = luma + kCrToR * cr;
      const double g = luma - kCbToG * cb - kCrToG * cr;
      const double b = luma + kCbToB * cb;
      rgb.at(0, yy, xx) = float(std::clamp(r, 0.0, 1.0));
      rgb.at(1, yy, xx) = float(std::clamp(g, 0.0, 1.0));
      rgb.at(2, yy, xx) = float(std::clamp(b, 0.0, 1.0));
    }
  return rgb;
}

Tensor rgb_to_luma(const Tensor& rgb) {
  LVC_CHECK(rgb.shape.c == 3, "luma expects an RGB frame");
  Tensor luma(1, rgb.shape.h, rgb.shape.w);
  for (int y = 0; y < rgb.shape.h; ++y)
    for (int x = 0; x < rgb.shape.w; ++x)
      luma.at(0, y, x) = float(kKr * rgb.at(0, y, x) + kKg * rgb.at(1, y, x) +
                               kKb * rgb.at(2, y, x));
  return luma;
}

double psnr_rgb(const Tensor& a, const Tensor& b) {
  LVC_CHECK(a.shape == b.shape && a.shape.c == 3, "psnr expects matching RGB");
  double acc = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) {
    const double d = double(a.v[i]) - double(b.v[i]);
    acc += d * d;
  }
  const double mse = acc / double(a.numel());
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

std::vector<double> pchip_slopes(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  const size_t n = x.size();
  LVC_CHECK(n >= 2 && y.size() == n, "pchip needs at least two points");
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    LVC_CHECK(h[i] > 0.0, "pchip abscissae must be strictly increasing");
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  std::vector<double> m(n, 0.0);
  if (n == 2) {
    m[0] = m[1] = delta[0];
    return m;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] == 0.0 || delta[i] == 0.0 ||
        (delta[i - 1] < 0.0) != (delta[i] < 0.0)) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Endpoint rule: one-sided three-point estimate with monotonicity guards.
  const auto endpoint = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    const auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    if (sign(d) != sign(d0))
      d = 0.0;
    else if (sign(d0) != sign(d1) && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  };
  m[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  m[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return m;
}

double pchip_integrate(const std::vector<double>& x,
                       const std::vector<double>& y, double a, double b) {
  LVC_CHECK(a >= x.front() - 1e-12 && b <= x.back() + 1e-12 && a <= b,
            "integration bounds outside the interpolation range");
  const std::vector<double> m = pchip_slopes(x, y);
  // Antiderivatives of the cubic Hermite basis on [0, 1].
  const auto F = [](double s, double yk, double yk1, double hmk, double hmk1) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return yk * (0.5 * s4 - s3 + s) + hmk * (0.25 * s4 - 2.0 / 3.0 * s3 +
                                             0.5 * s2) +
           yk1 * (-0.5 * s4 + s3) + hmk1 * (0.25 * s4 - s3 / 3.0);
  };
  double total = 0.0;
  for (size_t k = 0; k + 1 < x.size(); ++k) {
    const double lo = std::max(a, x[k]);
    const double hi = std::min(b, x[k + 1]);
    if (hi <= lo) continue;
    const double h = x[k + 1] - x[k];
    const double s_lo = (lo - x[k]) / h;
    const double s_hi = (hi - x[k]) / h;
    total += h * (F(s_hi, y[k], y[k + 1], h * m[k], h * m[k + 1]) -
                  F(s_lo, y[k], y[k + 1], h * m[k], h * m[k + 1]));
  }
  return total;
}

}  // namespace detail

namespace {

// Sorted by PSNR; x = PSNR, y = log10(bpp).
void curve_to_xy(const RDCurve& curve, std::vector<double>& x,
                 std::vector<double>& y) {
  LVC_CHECK(curve.points.size() >= 4, "rate-distortion curves need at least "
                                      "4 points, got ",
            curve.points.size());
  std::vector<RDPoint> pts = curve.points;
  std::sort(pts.begin(), pts.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.psnr < b.psnr; });
  x.clear();
  y.clear();
  for (size_t i = 0; i < pts.size(); ++i) {
    LVC_CHECK(pts[i].bpp > 0.0, "bpp must be positive");
    if (i > 0) {
      LVC_CHECK(pts[i].psnr > pts[i - 1].psnr,
                "PSNR values must be distinct and increasing");
      LVC_CHECK(pts[i].bpp > pts[i - 1].bpp,
                "bpp must increase with PSNR along a curve");
    }
    x.push_back(pts[i].psnr);
    y.push_back(std::log10(pts[i].bpp));
  }
}

}  // namespace

double bd_rate_percent(const RDCurve& anchor, const RDCurve& test) {
  std::vector<double> xa, ya, xt, yt;
  curve_to_xy(anchor, xa, ya);
  curve_to_xy(test, xt, yt);
  const double lo = std::max(xa.front(), xt.front());
  const double hi = std::min(xa.back(), xt.back());
  LVC_CHECK(hi > lo, "curves have no overlapping PSNR range");
  const double ia = detail::pchip_integrate(xa, ya, lo, hi);
  const double it = detail::pchip_integrate(xt, yt, lo, hi);
  const double mean_diff = (it - ia) / (hi - lo);
  return (std::pow(10.0, mean_diff) - 1.0) * 100.0;
}

double aggregate_bd(const std::vector<double>& per_sequence) {
  LVC_CHECK(!per_sequence.empty(), "nothing to aggregate");
  std::vector<double> sorted = per_sequence;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (double v : sorted) acc += v;
  return acc / double(sorted.size());
}

namespace {

constexpr int kBlock = 32;

// Orthonormal DCT-II basis, computed once.
const double* dct_basis() {
  static const std::vector<double> basis = [] {
    std::vector<double> m(size_t(kBlock) * kBlock);
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < kBlock; ++k) {
      const double alpha =
          std::sqrt((k == 0 ? 1.0 : 2.0) / double(kBlock));
      for (int n = 0; n < kBlock; ++n)
        m[size_t(k) * kBlock + n] =
            alpha * std::cos(pi * (2.0 * n + 1.0) * k / (2.0 * kBlock));
    }
    return m;
  }();
  return basis.data();
}

// Mean absolute non-DC coefficient of one block.
double block_energy(const Tensor& luma, int by, int bx) {
  const double* M = dct_basis();
  double tmp[kBlock][kBlock];
  for (int k = 0; k < kBlock; ++k)
    for (int x = 0; x < kBlock; ++x) {
      double acc = 0.0;
      for (int n = 0; n < kBlock; ++n)
        acc += M[size_t(k) * kBlock + n] *
               double(luma.at(0, by * kBlock + n, bx * kBlock + x));
      tmp[k][x] = acc;
    }
  double energy = 0.0;
  for (int ky = 0; ky < kBlock; ++ky)
    for (int kx = 0; kx < kBlock; ++kx) {
      double acc = 0.0;
      for (int n = 0; n < kBlock; ++n)
        acc += tmp[ky][n] * M[size_t(kx) * kBlock + n];
      if (ky != 0 || kx != 0) energy += std::abs(acc);
    }
  return energy / double(kBlock * kBlock - 1);
}

}  // namespace

double temporal_complexity(const std::vector<Tensor>& rgb_frames) {
  LVC_CHECK(rgb_frames.size() >= 2, "temporal complexity needs >= 2 frames");
  const Shape s = rgb_frames[0].shape;
  LVC_CHECK(s.c == 3 && s.h % kBlock == 0 && s.w % kBlock == 0,
            "frames must be RGB with dimensions divisible by ", kBlock);
  const int bh = s.h / kBlock, bw = s.w / kBlock;

  std::vector<double> prev_energy, cur_energy(size_t(bh) * bw);
  double acc = 0.0;
  int64_t terms = 0;
  for (size_t t = 0; t < rgb_frames.size(); ++t) {
    LVC_CHECK(rgb_frames[t].shape == s, "frame size mismatch");
    const Tensor luma = rgb_to_luma(rgb_frames[t]);
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx)
        cur_energy[size_t(by) * bw + bx] = block_energy(luma, by, bx);
    if (t > 0) {
      for (size_t i = 0; i < cur_energy.size(); ++i) {
        acc += std::abs(cur_energy[i] - prev_energy[i]);
        ++terms;
      }
    }
    prev_energy = cur_energy;
  }
  return acc / double(terms);
}

}  // namespace lvc
