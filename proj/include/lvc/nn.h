#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvc/autograd.h"
#include "lvc/profiler.h"

namespace lvc {

// Named parameter registry. Registration order is fixed by model
// construction, which makes checkpoints and the weight hash stable.
class ParamStore {
 public:
  Var add(const std::string& name, Tensor init);
  const std::vector<std::pair<std::string, Var>>& items() const {
    return items_;
  }
  Var find(const std::string& name) const;
  int64_t param_count() const;
  // FNV-1a over shapes and raw float bytes in registration order.
  uint64_t weight_hash() const;
  void load(const std::map<std::string, Tensor>& named);

 private:
  std::vector<std::pair<std::string, Var>> items_;
  std::map<std::string, size_t> index_;
};

enum class Init { He, Zero };

// Square-kernel convolution layer. Weights are stored (C_out, C_in, k*k).
// Zero init is used for prediction heads so untrained networks degrade to
// identity-like behavior (zero flow, zero residual, mask logit 0).
struct Conv2d {
  std::string name;
  int cin = 0, cout = 0, k = 1, stride = 1, pad = 0;
  Var w, b;

  Conv2d() = default;
  Conv2d(ParamStore& store, const std::string& name, int cin, int cout, int k,
         int stride, Init init, uint64_t master_seed);

  Var operator()(const Var& x) const;
  // Advances (h, w) to this layer's output resolution while accounting MACs.
  void profile(MacCounter& mc, int& h, int& w) const;
  int64_t params() const { return int64_t(cout) * cin * k * k + cout; }
};

// Two 3x3 convolutions with a skip connection, LeakyReLU inside.
struct ResBlock {
  Conv2d c0, c1;

  ResBlock() = default;
  ResBlock(ParamStore& store, const std::string& name, int ch,
           uint64_t master_seed);
  Var operator()(const Var& x) const;
  void profile(MacCounter& mc, int& h, int& w) const;
};

}  // namespace lvc
