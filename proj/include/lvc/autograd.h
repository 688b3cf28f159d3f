#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "lvc/tensor.h"

namespace lvc {

// Reverse-mode tape. Nodes own their forward value; gradients are allocated
// lazily during backward. With gradients disabled (inference) every op
// returns a detached leaf, so the same pipeline code serves both training and
// coding paths.
struct TapeNode;
using Var = std::shared_ptr<TapeNode>;

struct TapeNode {
  Tensor val;
  Tensor grad;
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(TapeNode&)> backprop;
};

Var constant(Tensor t);
Var parameter(Tensor t);

bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  bool prev;
};

void backward(const Var& root);
void ensure_grad(TapeNode& n);

// Elementwise and structural ops. All shapes are validated; mismatches throw.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_const(const Var& a, const Tensor& c);
// x: (C,H,W), m: (1,H,W): per-pixel gate broadcast over channels.
Var mul_mask(const Var& x, const Var& m);
Var concat_ch(const std::vector<Var>& parts);
Var slice_ch(const Var& x, int c0, int len);
Var leaky_relu(const Var& x, float slope = 0.1f);
Var sigmoid(const Var& x);
// eps + softplus(x); used to keep entropy scales positive and floored.
Var softplus_offset(const Var& x, float eps);
// Clamp to [0,1] with gradient passed inside the closed interval.
Var clamp01(const Var& x);
Var upsample_nearest2(const Var& x);
Var avgpool2(const Var& x);
// Broadcast a (C,1,1) parameter over an (C,h,w) grid.
Var expand_hw(const Var& x, int h, int w);
Var pad_replicate(const Var& x, int top, int bottom, int left, int right);
Var crop(const Var& x, int top, int left, int h, int w);
// Round half away from zero, gradient passed through unchanged.
Var round_ste(const Var& x);

Var conv2d(const Var& x, const Var& w, const Var& b, int k, int stride,
           int pad);

// Backward-warp src by flow (ch0 = dx, ch1 = dy), bilinear taps with border
// clamp. Differentiable in both src and flow. Rejects non-finite flow.
Var warp_bilinear(const Var& src, const Var& flow);

// Interval probability of integer-quantized values under N(mean, scale^2),
// floored at p_min. Gradients flow to v, mean and scale wherever the floor is
// inactive. Element math runs in double.
Var gaussian_likelihood(const Var& v, const Var& mean, const Var& scale,
                        double p_min);

// Scalar (1,1,1) results; accumulation in double.
Var bits_total(const Var& p);
Var mse(const Var& a, const Var& b);

double scalar_value(const Var& v);

}  // namespace lvc
