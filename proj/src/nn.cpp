#include "lvc/nn.h"

#include <cmath>

#include "lvc/common.h"
#include "lvc/rng.h"

namespace lvc {

Var ParamStore::add(const std::string& name, Tensor init) {
  LVC_CHECK(!index_.count(name), "duplicate parameter name ", name);
  Var p = parameter(std::move(init));
  index_[name] = items_.size();
  items_.emplace_back(name, p);
  return p;
}

Var ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  LVC_CHECK(it != index_.end(), "unknown parameter ", name);
  return items_[it->second].second;
}

int64_t ParamStore::param_count() const {
  int64_t n = 0;
  for (const auto& [name, p] : items_) n += p->val.numel();
  return n;
}

uint64_t ParamStore::weight_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [name, p] : items_) {
    h = fnv1a64(name.data(), name.size(), h);
    const int dims[3] = {p->val.shape.c, p->val.shape.h, p->val.shape.w};
    h = fnv1a64(dims, sizeof(dims), h);
    h = fnv1a64(p->val.v.data(), p->val.v.size() * sizeof(float), h);
  }
  return h;
}

void ParamStore::load(const std::map<std::string, Tensor>& named) {
  LVC_CHECK(named.size() == items_.size(), "parameter count mismatch: have ",
            items_.size(), ", loading ", named.size());
  for (auto& [name, p] : items_) {
    auto it = named.find(name);
    LVC_CHECK(it != named.end(), "missing parameter ", name);
    LVC_CHECK(it->second.shape == p->val.shape, "shape mismatch for ", name,
              ": ", p->val.shape.str(), " vs ", it->second.shape.str());
    p->val = it->second;
  }
}

Conv2d::Conv2d(ParamStore& store, const std::string& name, int cin, int cout,
               int k, int stride, Init init, uint64_t master_seed)
    : name(name), cin(cin), cout(cout), k(k), stride(stride), pad(k / 2) {
  Tensor wt(cout, cin, k * k);
  if (init == Init::He) {
    Rng rng(master_seed ^ fnv1a64(name.data(), name.size()));
    const double bound = std::sqrt(6.0 / (double(cin) * k * k));
    for (auto& x : wt.v) x = float(rng.uniform(-bound, bound));
  }
  w = store.add(name + ".w", std::move(wt));
  b = store.add(name + ".b", Tensor(cout, 1, 1));
}

Var Conv2d::operator()(const Var& x) const {
  return conv2d(x, w, b, k, stride, pad);
}

void Conv2d::profile(MacCounter& mc, int& h, int& w_) const {
  const int ho = (h + 2 * pad - k) / stride + 1;
  const int wo = (w_ + 2 * pad - k) / stride + 1;
  mc.conv(ho, wo, k, k, cin, cout);
  h = ho;
  w_ = wo;
}

ResBlock::ResBlock(ParamStore& store, const std::string& name, int ch,
                   uint64_t master_seed)
    : c0(store, name + ".c0", ch, ch, 3, 1, Init::He, master_seed),
      c1(store, name + ".c1", ch, ch, 3, 1, Init::He, master_seed) {}

Var ResBlock::operator()(const Var& x) const {
  return add(x, c1(leaky_relu(c0(x))));
}

void ResBlock::profile(MacCounter& mc, int& h, int& w) const {
  c0.profile(mc, h, w);
  c1.profile(mc, h, w);
}

}  // namespace lvc
