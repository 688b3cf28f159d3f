#include "lvc/autograd.h"

#include <Eigen/Dense>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "lvc/profiler.h"

namespace lvc {

namespace {

thread_local bool g_grad_enabled = true;

using RowMat =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXf;

Var make_node(Tensor value) {
  auto n = std::make_shared<TapeNode>();
  n->val = std::move(value);
  return n;
}

Var make_op(Tensor out, std::vector<Var> parents,
            std::function<void(TapeNode&)> bp) {
  bool track = g_grad_enabled;
  if (track) {
    track = false;
    for (const auto& p : parents)
      if (p->requires_grad) track = true;
  }
  auto n = make_node(std::move(out));
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backprop = std::move(bp);
  }
  return n;
}

}  // namespace

Var constant(Tensor t) { return make_node(std::move(t)); }

Var parameter(Tensor t) {
  auto n = make_node(std::move(t));
  n->requires_grad = true;
  return n;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

void ensure_grad(TapeNode& n) {
  if (n.grad.shape == n.val.shape && !n.grad.v.empty()) return;
  n.grad = Tensor(n.val.shape);
}

void backward(const Var& root) {
  LVC_CHECK(root && root->val.numel() == 1, "backward expects a scalar root");
  if (!root->requires_grad) return;

  // Iterative DFS topological order.
  std::vector<TapeNode*> order;
  std::unordered_set<TapeNode*> seen;
  std::vector<std::pair<TapeNode*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      TapeNode* p = node->parents[idx].get();
      ++idx;
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  ensure_grad(*root);
  root->grad.v[0] = 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TapeNode* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

double scalar_value(const Var& v) {
  LVC_CHECK(v && v->val.numel() == 1, "scalar_value expects a 1-element var");
  return v->val.v[0];
}

Var add(const Var& a, const Var& b) {
  Tensor out = a->val + b->val;
  return make_op(std::move(out), {a, b}, [](TapeNode& n) {
    for (int s = 0; s < 2; ++s) {
      auto& p = *n.parents[s];
      if (!p.requires_grad) continue;
      ensure_grad(p);
      for (size_t i = 0; i < n.grad.v.size(); ++i) p.grad.v[i] += n.grad.v[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  Tensor out = a->val - b->val;
  return make_op(std::move(out), {a, b}, [](TapeNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      ensure_grad(pa);
      for (size_t i = 0; i < n.grad.v.size(); ++i) pa.grad.v[i] += n.grad.v[i];
    }
    if (pb.requires_grad) {
      ensure_grad(pb);
      for (size_t i = 0; i < n.grad.v.size(); ++i) pb.grad.v[i] -= n.grad.v[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  LVC_CHECK(a->val.shape == b->val.shape, "mul shape mismatch");
  Tensor out(a->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = a->val.v[i] * b->val.v[i];
  return make_op(std::move(out), {a, b}, [](TapeNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    if (pa.requires_grad) {
      ensure_grad(pa);
      for (size_t i = 0; i < n.grad.v.size(); ++i)
        pa.grad.v[i] += n.grad.v[i] * pb.val.v[i];
    }
    if (pb.requires_grad) {
      ensure_grad(pb);
      for (size_t i = 0; i < n.grad.v.size(); ++i)
        pb.grad.v[i] += n.grad.v[i] * pa.val.v[i];
    }
  });
}

Var scale(const Var& a, float s) {
  Tensor out(a->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a->val.v[i] * s;
  return make_op(std::move(out), {a}, [s](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i)
      p.grad.v[i] += n.grad.v[i] * s;
  });
}

Var add_const(const Var& a, const Tensor& c) {
  LVC_CHECK(a->val.shape == c.shape, "add_const shape mismatch");
  Tensor out = a->val + c;
  return make_op(std::move(out), {a}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i) p.grad.v[i] += n.grad.v[i];
  });
}

Var mul_mask(const Var& x, const Var& m) {
  const Shape xs = x->val.shape;
  const Shape ms = m->val.shape;
  LVC_CHECK(ms.c == 1 && ms.h == xs.h && ms.w == xs.w,
            "mask must be (1,H,W) matching ", xs.str());
  Tensor out(xs);
  const size_t plane = size_t(xs.h) * xs.w;
  for (int c = 0; c < xs.c; ++c)
    for (size_t i = 0; i < plane; ++i)
      out.v[c * plane + i] = x->val.v[c * plane + i] * m->val.v[i];
  return make_op(std::move(out), {x, m}, [plane](TapeNode& n) {
    auto& px = *n.parents[0];
    auto& pm = *n.parents[1];
    const int C = n.val.shape.c;
    if (px.requires_grad) {
      ensure_grad(px);
      for (int c = 0; c < C; ++c)
        for (size_t i = 0; i < plane; ++i)
          px.grad.v[c * plane + i] += n.grad.v[c * plane + i] * pm.val.v[i];
    }
    if (pm.requires_grad) {
      ensure_grad(pm);
      for (int c = 0; c < C; ++c)
        for (size_t i = 0; i < plane; ++i)
          pm.grad.v[i] += n.grad.v[c * plane + i] * px.val.v[c * plane + i];
    }
  });
}

Var concat_ch(const std::vector<Var>& parts) {
  LVC_CHECK(!parts.empty(), "concat of zero tensors");
  const int h = parts[0]->val.shape.h;
  const int w = parts[0]->val.shape.w;
  int c_total = 0;
  for (const auto& p : parts) {
    LVC_CHECK(p->val.shape.h == h && p->val.shape.w == w,
              "concat spatial mismatch");
    c_total += p->val.shape.c;
  }
  Tensor out(c_total, h, w);
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->val.v.begin(), p->val.v.end(), out.v.begin() + off);
    off += p->val.v.size();
  }
  return make_op(std::move(out), parts, [](TapeNode& n) {
    size_t off = 0;
    for (auto& pv : n.parents) {
      auto& p = *pv;
      const size_t len = p.val.v.size();
      if (p.requires_grad) {
        ensure_grad(p);
        for (size_t i = 0; i < len; ++i) p.grad.v[i] += n.grad.v[off + i];
      }
      off += len;
    }
  });
}

Var slice_ch(const Var& x, int c0, int len) {
  const Shape s = x->val.shape;
  LVC_CHECK(c0 >= 0 && len > 0 && c0 + len <= s.c, "slice_ch out of range");
  const size_t plane = size_t(s.h) * s.w;
  Tensor out(len, s.h, s.w);
  std::copy(x->val.v.begin() + c0 * plane,
            x->val.v.begin() + (c0 + len) * plane, out.v.begin());
  return make_op(std::move(out), {x}, [c0, plane](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i)
      p.grad.v[c0 * plane + i] += n.grad.v[i];
  });
}

Var leaky_relu(const Var& x, float slope) {
  Tensor out(x->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i) {
    const float v = x->val.v[i];
    out.v[i] = v >= 0.0f ? v : slope * v;
  }
  return make_op(std::move(out), {x}, [slope](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i)
      p.grad.v[i] += n.grad.v[i] * (p.val.v[i] >= 0.0f ? 1.0f : slope);
  });
}

Var sigmoid(const Var& x) {
  Tensor out(x->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = float(1.0 / (1.0 + std::exp(-double(x->val.v[i]))));
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i) {
      const float y = n.val.v[i];
      p.grad.v[i] += n.grad.v[i] * y * (1.0f - y);
    }
  });
}

Var softplus_offset(const Var& x, float eps) {
  Tensor out(x->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i) {
    const double v = x->val.v[i];
    const double sp = v > 30.0 ? v : std::log1p(std::exp(v));
    out.v[i] = float(eps + sp);
  }
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i) {
      const double v = p.val.v[i];
      p.grad.v[i] += n.grad.v[i] * float(1.0 / (1.0 + std::exp(-v)));
    }
  });
}

Var clamp01(const Var& x) {
  Tensor out(x->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = std::min(1.0f, std::max(0.0f, x->val.v[i]));
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i) {
      const float v = p.val.v[i];
      if (v >= 0.0f && v <= 1.0f) p.grad.v[i] += n.grad.v[i];
    }
  });
}

Var upsample_nearest2(const Var& x) {
  const Shape s = x->val.shape;
  Tensor out(s.c, s.h * 2, s.w * 2);
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < s.h * 2; ++y)
      for (int xx = 0; xx < s.w * 2; ++xx)
        out.at(c, y, xx) = x->val.at(c, y / 2, xx / 2);
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    const Shape s = p.val.shape;
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h * 2; ++y)
        for (int xx = 0; xx < s.w * 2; ++xx)
          p.grad.at(c, y / 2, xx / 2) += n.grad.at(c, y, xx);
  });
}

Var avgpool2(const Var& x) {
  const Shape s = x->val.shape;
  LVC_CHECK(s.h % 2 == 0 && s.w % 2 == 0, "avgpool2 needs even dims, got ",
            s.str());
  Tensor out(s.c, s.h / 2, s.w / 2);
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < s.h / 2; ++y)
      for (int xx = 0; xx < s.w / 2; ++xx)
        out.at(c, y, xx) =
            0.25f * (x->val.at(c, 2 * y, 2 * xx) +
                     x->val.at(c, 2 * y, 2 * xx + 1) +
                     x->val.at(c, 2 * y + 1, 2 * xx) +
                     x->val.at(c, 2 * y + 1, 2 * xx + 1));
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    const Shape os = n.val.shape;
    for (int c = 0; c < os.c; ++c)
      for (int y = 0; y < os.h; ++y)
        for (int xx = 0; xx < os.w; ++xx) {
          const float g = 0.25f * n.grad.at(c, y, xx);
          p.grad.at(c, 2 * y, 2 * xx) += g;
          p.grad.at(c, 2 * y, 2 * xx + 1) += g;
          p.grad.at(c, 2 * y + 1, 2 * xx) += g;
          p.grad.at(c, 2 * y + 1, 2 * xx + 1) += g;
        }
  });
}

Var expand_hw(const Var& x, int h, int w) {
  const Shape s = x->val.shape;
  LVC_CHECK(s.h == 1 && s.w == 1, "expand_hw expects (C,1,1), got ", s.str());
  Tensor out(s.c, h, w);
  const size_t plane = size_t(h) * w;
  for (int c = 0; c < s.c; ++c)
    std::fill(out.v.begin() + c * plane, out.v.begin() + (c + 1) * plane,
              x->val.v[c]);
  return make_op(std::move(out), {x}, [plane](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (int c = 0; c < p.val.shape.c; ++c) {
      double acc = 0.0;
      for (size_t i = 0; i < plane; ++i) acc += n.grad.v[c * plane + i];
      p.grad.v[c] += float(acc);
    }
  });
}

Var pad_replicate(const Var& x, int top, int bottom, int left, int right) {
  const Shape s = x->val.shape;
  Tensor out(s.c, s.h + top + bottom, s.w + left + right);
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < out.shape.h; ++y) {
      const int sy = std::min(s.h - 1, std::max(0, y - top));
      for (int xx = 0; xx < out.shape.w; ++xx) {
        const int sx = std::min(s.w - 1, std::max(0, xx - left));
        out.at(c, y, xx) = x->val.at(c, sy, sx);
      }
    }
  return make_op(std::move(out), {x}, [top, left](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    const Shape s = p.val.shape;
    for (int c = 0; c < n.val.shape.c; ++c)
      for (int y = 0; y < n.val.shape.h; ++y) {
        const int sy = std::min(s.h - 1, std::max(0, y - top));
        for (int xx = 0; xx < n.val.shape.w; ++xx) {
          const int sx = std::min(s.w - 1, std::max(0, xx - left));
          p.grad.at(c, sy, sx) += n.grad.at(c, y, xx);
        }
      }
  });
}

Var crop(const Var& x, int top, int left, int h, int w) {
  const Shape s = x->val.shape;
  LVC_CHECK(top >= 0 && left >= 0 && top + h <= s.h && left + w <= s.w,
            "crop out of range");
  Tensor out(s.c, h, w);
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx)
        out.at(c, y, xx) = x->val.at(c, top + y, left + xx);
  return make_op(std::move(out), {x}, [top, left](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (int c = 0; c < n.val.shape.c; ++c)
      for (int y = 0; y < n.val.shape.h; ++y)
        for (int xx = 0; xx < n.val.shape.w; ++xx)
          p.grad.at(c, top + y, left + xx) += n.grad.at(c, y, xx);
  });
}

Var round_ste(const Var& x) {
  Tensor out(x->val.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = std::round(x->val.v[i]);
  return make_op(std::move(out), {x}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    for (size_t i = 0; i < n.grad.v.size(); ++i) p.grad.v[i] += n.grad.v[i];
  });
}

namespace {

// im2col with zero padding into a column-major (K x N) matrix, K = Ci*k*k,
// N = Ho*Wo. Rebuilt in backward rather than cached: cheaper than holding a
// float buffer per conv on the tape.
void im2col(const Tensor& x, int k, int stride, int pad, int ho, int wo,
            ColMat& col) {
  const Shape s = x.shape;
  const int K = s.c * k * k;
  const int64_t N = int64_t(ho) * wo;
  col.resize(K, N);
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      const int64_t n = int64_t(oy) * wo + ox;
      float* dst = col.data() + n * K;
      int r = 0;
      for (int c = 0; c < s.c; ++c)
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride - pad + ky;
          for (int kx = 0; kx < k; ++kx, ++r) {
            const int ix = ox * stride - pad + kx;
            dst[r] = (iy >= 0 && iy < s.h && ix >= 0 && ix < s.w)
                         ? x.at(c, iy, ix)
                         : 0.0f;
          }
        }
    }
}

void col2im_add(const ColMat& col, int k, int stride, int pad, int ho, int wo,
                Tensor& dx) {
  const Shape s = dx.shape;
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      const int64_t n = int64_t(oy) * wo + ox;
      const float* src = col.data() + n * col.rows();
      int r = 0;
      for (int c = 0; c < s.c; ++c)
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride - pad + ky;
          for (int kx = 0; kx < k; ++kx, ++r) {
            const int ix = ox * stride - pad + kx;
            if (iy >= 0 && iy < s.h && ix >= 0 && ix < s.w)
              dx.at(c, iy, ix) += src[r];
          }
        }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int k, int stride,
           int pad) {
  const Shape xs = x->val.shape;
  const Shape ws = w->val.shape;
  LVC_CHECK(ws.h == xs.c && ws.w == k * k, "conv2d weight shape ", ws.str(),
            " does not match input ", xs.str(), " k=", k);
  LVC_CHECK(b->val.shape.c == ws.c && b->val.shape.h == 1 &&
                b->val.shape.w == 1,
            "conv2d bias shape mismatch");
  const int co = ws.c;
  const int ci = xs.c;
  const int K = ci * k * k;
  const int ho = (xs.h + 2 * pad - k) / stride + 1;
  const int wo = (xs.w + 2 * pad - k) / stride + 1;
  LVC_CHECK(ho > 0 && wo > 0, "conv2d empty output for input ", xs.str());
  const int64_t N = int64_t(ho) * wo;

  if (MacCounter* mc = active_mac_counter())
    mc->conv(ho, wo, k, k, ci, co);

  Tensor out(co, ho, wo);
  Eigen::Map<const RowMat> wm(w->val.data(), co, K);
  Eigen::Map<RowMat> om(out.data(), co, N);
  const bool pointwise = (k == 1 && stride == 1 && pad == 0);
  if (pointwise) {
    Eigen::Map<const ColMat> xm(x->val.data(), K, N);
    om.noalias() = wm * xm;
  } else {
    thread_local ColMat col;
    im2col(x->val, k, stride, pad, ho, wo, col);
    om.noalias() = wm * col;
  }
  Eigen::Map<const Eigen::VectorXf> bv(b->val.data(), co);
  om.colwise() += bv;

  return make_op(
      std::move(out), {x, w, b},
      [k, stride, pad, co, K, ho, wo, N, pointwise](TapeNode& n) {
        auto& px = *n.parents[0];
        auto& pw = *n.parents[1];
        auto& pb = *n.parents[2];
        Eigen::Map<const RowMat> g(n.grad.data(), co, N);

        if (pb.requires_grad) {
          ensure_grad(pb);
          // Fixed-order reduction: Eigen's redux peels to the alignment
          // boundary of the mapped buffer, making the sum depend on the heap
          // address.
          for (int c = 0; c < co; ++c) {
            double acc = 0.0;
            const float* row = n.grad.data() + size_t(c) * N;
            for (int64_t i = 0; i < N; ++i) acc += row[i];
            pb.grad.v[size_t(c)] += float(acc);
          }
        }
        if (pointwise) {
          Eigen::Map<const ColMat> xm(px.val.data(), K, N);
          if (pw.requires_grad) {
            ensure_grad(pw);
            Eigen::Map<RowMat> dw(pw.grad.data(), co, K);
            dw.noalias() += g * xm.transpose();
          }
          if (px.requires_grad) {
            ensure_grad(px);
            Eigen::Map<const RowMat> wm(pw.val.data(), co, K);
            Eigen::Map<ColMat> dxm(px.grad.data(), K, N);
            dxm.noalias() += wm.transpose() * g;
          }
          return;
        }
        thread_local ColMat col_b;
        im2col(px.val, k, stride, pad, ho, wo, col_b);
        if (pw.requires_grad) {
          ensure_grad(pw);
          Eigen::Map<RowMat> dw(pw.grad.data(), co, K);
          dw.noalias() += g * col_b.transpose();
        }
        if (px.requires_grad) {
          ensure_grad(px);
          Eigen::Map<const RowMat> wm(pw.val.data(), co, K);
          ColMat dcol = wm.transpose() * g;
          col2im_add(dcol, k, stride, pad, ho, wo, px.grad);
        }
      });
}

Var warp_bilinear(const Var& src, const Var& flow) {
  const Shape ss = src->val.shape;
  const Shape fs = flow->val.shape;
  LVC_CHECK(fs.c == 2 && fs.h == ss.h && fs.w == ss.w,
            "flow must be (2,H,W) matching source ", ss.str());
  LVC_CHECK(flow->val.all_finite(), "warp rejects non-finite flow");

  if (MacCounter* mc = active_mac_counter()) mc->warp(ss.numel());

  const int H = ss.h, W = ss.w, C = ss.c;
  Tensor out(ss);
  const auto clampi = [](int v, int hi) {
    return v < 0 ? 0 : (v > hi ? hi : v);
  };
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const float xf = float(x) + flow->val.at(0, y, x);
      const float yf = float(y) + flow->val.at(1, y, x);
      const int x0 = int(std::floor(xf));
      const int y0 = int(std::floor(yf));
      const float ax = xf - float(x0);
      const float ay = yf - float(y0);
      const int xc0 = clampi(x0, W - 1), xc1 = clampi(x0 + 1, W - 1);
      const int yc0 = clampi(y0, H - 1), yc1 = clampi(y0 + 1, H - 1);
      for (int c = 0; c < C; ++c) {
        const float s00 = src->val.at(c, yc0, xc0);
        const float s01 = src->val.at(c, yc0, xc1);
        const float s10 = src->val.at(c, yc1, xc0);
        const float s11 = src->val.at(c, yc1, xc1);
        out.at(c, y, x) = (1.0f - ay) * ((1.0f - ax) * s00 + ax * s01) +
                          ay * ((1.0f - ax) * s10 + ax * s11);
      }
    }

  return make_op(std::move(out), {src, flow}, [](TapeNode& n) {
    auto& ps = *n.parents[0];
    auto& pf = *n.parents[1];
    const Shape ss = ps.val.shape;
    const int H = ss.h, W = ss.w, C = ss.c;
    if (ps.requires_grad) ensure_grad(ps);
    if (pf.requires_grad) ensure_grad(pf);
    const auto clampi = [](int v, int hi) {
      return v < 0 ? 0 : (v > hi ? hi : v);
    };
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const float xf = float(x) + pf.val.at(0, y, x);
        const float yf = float(y) + pf.val.at(1, y, x);
        const int x0 = int(std::floor(xf));
        const int y0 = int(std::floor(yf));
        const float ax = xf - float(x0);
        const float ay = yf - float(y0);
        const int xc0 = clampi(x0, W - 1), xc1 = clampi(x0 + 1, W - 1);
        const int yc0 = clampi(y0, H - 1), yc1 = clampi(y0 + 1, H - 1);
        float gfx = 0.0f, gfy = 0.0f;
        for (int c = 0; c < C; ++c) {
          const float g = n.grad.at(c, y, x);
          const float s00 = ps.val.at(c, yc0, xc0);
          const float s01 = ps.val.at(c, yc0, xc1);
          const float s10 = ps.val.at(c, yc1, xc0);
          const float s11 = ps.val.at(c, yc1, xc1);
          if (ps.requires_grad) {
            ps.grad.at(c, yc0, xc0) += g * (1.0f - ay) * (1.0f - ax);
            ps.grad.at(c, yc0, xc1) += g * (1.0f - ay) * ax;
            ps.grad.at(c, yc1, xc0) += g * ay * (1.0f - ax);
            ps.grad.at(c, yc1, xc1) += g * ay * ax;
          }
          gfx += g * ((1.0f - ay) * (s01 - s00) + ay * (s11 - s10));
          gfy += g * ((1.0f - ax) * (s10 - s00) + ax * (s11 - s01));
        }
        if (pf.requires_grad) {
          pf.grad.at(0, y, x) += gfx;
          pf.grad.at(1, y, x) += gfy;
        }
      }
  });
}

namespace {

double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}
double std_normal_pdf(double z) {
  return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

}  // namespace

Var gaussian_likelihood(const Var& v, const Var& mean, const Var& scale,
                        double p_min) {
  const Shape s = v->val.shape;
  LVC_CHECK(mean->val.shape == s && scale->val.shape == s,
            "likelihood operand shape mismatch");
  Tensor out(s);
  for (size_t i = 0; i < out.v.size(); ++i) {
    const double sigma = scale->val.v[i];
    LVC_CHECK(sigma > 0.0, "likelihood requires positive scale");
    const double d = double(v->val.v[i]) - double(mean->val.v[i]);
    const double p = std_normal_cdf((d + 0.5) / sigma) -
                     std_normal_cdf((d - 0.5) / sigma);
    out.v[i] = float(std::max(p, p_min));
  }
  return make_op(std::move(out), {v, mean, scale}, [p_min](TapeNode& n) {
    auto& pv = *n.parents[0];
    auto& pm = *n.parents[1];
    auto& ps = *n.parents[2];
    if (pv.requires_grad) ensure_grad(pv);
    if (pm.requires_grad) ensure_grad(pm);
    if (ps.requires_grad) ensure_grad(ps);
    for (size_t i = 0; i < n.grad.v.size(); ++i) {
      const double sigma = ps.val.v[i];
      const double d = double(pv.val.v[i]) - double(pm.val.v[i]);
      const double a = (d + 0.5) / sigma;
      const double b = (d - 0.5) / sigma;
      const double p = std_normal_cdf(a) - std_normal_cdf(b);
      if (p <= p_min) continue;  // floor active: gradient is zero
      const double g = n.grad.v[i];
      const double pa = std_normal_pdf(a);
      const double pb = std_normal_pdf(b);
      const double dp_dd = (pa - pb) / sigma;
      if (pv.requires_grad) pv.grad.v[i] += float(g * dp_dd);
      if (pm.requires_grad) pm.grad.v[i] -= float(g * dp_dd);
      if (ps.requires_grad)
        ps.grad.v[i] += float(g * (-(a * pa - b * pb) / sigma));
    }
  });
}

Var bits_total(const Var& p) {
  double acc = 0.0;
  for (float x : p->val.v) {
    LVC_CHECK(x > 0.0f && x <= 1.0f, "bits_total expects likelihoods in (0,1]");
    acc -= std::log2(double(x));
  }
  Tensor out(1, 1, 1);
  out.v[0] = float(acc);
  return make_op(std::move(out), {p}, [](TapeNode& n) {
    auto& p = *n.parents[0];
    if (!p.requires_grad) return;
    ensure_grad(p);
    const double g = n.grad.v[0];
    const double inv_ln2 = 1.4426950408889634074;
    for (size_t i = 0; i < p.grad.v.size(); ++i)
      p.grad.v[i] -= float(g * inv_ln2 / double(p.val.v[i]));
  });
}

Var mse(const Var& a, const Var& b) {
  LVC_CHECK(a->val.shape == b->val.shape, "mse shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a->val.v.size(); ++i) {
    const double d = double(a->val.v[i]) - double(b->val.v[i]);
    acc += d * d;
  }
  const double inv_n = 1.0 / double(a->val.numel());
  Tensor out(1, 1, 1);
  out.v[0] = float(acc * inv_n);
  return make_op(std::move(out), {a, b}, [inv_n](TapeNode& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    const double g = 2.0 * inv_n * n.grad.v[0];
    if (pa.requires_grad) ensure_grad(pa);
    if (pb.requires_grad) ensure_grad(pb);
    for (size_t i = 0; i < pa.val.v.size(); ++i) {
      const float d = float(g * (double(pa.val.v[i]) - double(pb.val.v[i])));
      if (pa.requires_grad) pa.grad.v[i] += d;
      if (pb.requires_grad) pb.grad.v[i] -= d;
    }
  });
}

}  // namespace lvc
