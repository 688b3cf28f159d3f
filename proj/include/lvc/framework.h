#pragma once

#include <optional>
#include <string>

#include "lvc/autograd.h"

namespace lvc {

enum class Framework : uint8_t { RC = 0, CC = 1, CRC = 2, MCR = 3 };
enum class BufferStrategy : uint8_t { Explicit = 0, Implicit = 1, Hybrid = 2 };

// Structural switches of an inter-frame coding framework.
//   RC  codes the residual against a pixel prediction, no conditioning.
//   CC  codes the frame directly with contextual conditioning.
//   CRC codes the residual with contextual conditioning.
//   MCR codes a masked residual (per-pixel blend between RC and CC) with
//       conditioning.
struct FrameworkSpec {
  Framework id = Framework::RC;
  bool uses_condition = false;
  bool uses_pixel_prediction = false;
  bool uses_mask = false;
};

FrameworkSpec framework_spec(Framework f);
Framework framework_from_name(const std::string& name);
std::string framework_name(Framework f);

// Signal handed to the inter encoder. mask is (1,H,W) in [0,1]; prediction
// and mask presence must match the spec's switches.
Var compose_coded_signal(const FrameworkSpec& spec, const Var& x,
                         const std::optional<Var>& prediction,
                         const std::optional<Var>& mask);

// Inverse composition on the decoder side: g is the decoded signal.
Var compose_reconstruction(const FrameworkSpec& spec, const Var& g,
                           const std::optional<Var>& prediction,
                           const std::optional<Var>& mask);

}  // namespace lvc
