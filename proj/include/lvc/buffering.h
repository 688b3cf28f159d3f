#pragma once

#include <optional>
#include <string>

#include "lvc/autograd.h"
#include "lvc/framework.h"

namespace lvc {

BufferStrategy strategy_from_name(const std::string& name);
std::string strategy_name(BufferStrategy s);

// Decoder-propagated channels per pixel for a strategy: explicit keeps the
// reconstructed frame (3), implicit keeps a feature map (implicit_channels),
// hybrid keeps both.
int buffer_channel_count(BufferStrategy s, int implicit_channels);

// Temporal state carried between frames on the decoder side. Contents follow
// the strategy except immediately after an intra frame, where only the
// decoded intra frame is available and the implicit slot is empty.
class TemporalBuffer {
 public:
  static TemporalBuffer after_intra(BufferStrategy s, int implicit_channels,
                                    Var intra_recon);
  static TemporalBuffer after_inter(BufferStrategy s, int implicit_channels,
                                    Var recon, Var implicit_features);

  BufferStrategy strategy() const { return strategy_; }
  int implicit_channels() const { return implicit_channels_; }
  bool holds_intra_only() const { return intra_only_; }

  // Reference input to the feature extractor: the buffered content in a fixed
  // channel order (explicit frame first for hybrid).
  Var reference() const;
  int reference_channels() const;

  const std::optional<Var>& explicit_frame() const { return explicit_; }
  const std::optional<Var>& implicit_features() const { return implicit_; }

  // Channels * H * W actually held, the footprint the strategy pays for.
  int64_t footprint() const;

 private:
  BufferStrategy strategy_ = BufferStrategy::Explicit;
  int implicit_channels_ = 0;
  bool intra_only_ = false;
  std::optional<Var> explicit_;
  std::optional<Var> implicit_;
};

}  // namespace lvc
