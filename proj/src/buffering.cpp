#include "lvc/buffering.h"

namespace lvc {

BufferStrategy strategy_from_name(const std::string& name) {
  if (name == "explicit") return BufferStrategy::Explicit;
  if (name == "implicit") return BufferStrategy::Implicit;
  if (name == "hybrid") return BufferStrategy::Hybrid;
  throw UsageError("unknown buffering strategy '" + name +
                   "' (explicit, implicit, hybrid)");
}

std::string strategy_name(BufferStrategy s) {
  switch (s) {
    case BufferStrategy::Explicit:
      return "explicit";
    case BufferStrategy::Implicit:
      return "implicit";
    case BufferStrategy::Hybrid:
      return "hybrid";
  }
  throw DataError("unknown strategy");
}

int buffer_channel_count(BufferStrategy s, int implicit_channels) {
  switch (s) {
    case BufferStrategy::Explicit:
      return 3;
    case BufferStrategy::Implicit:
      LVC_CHECK(implicit_channels > 0, "implicit buffering needs channels");
      return implicit_channels;
    case BufferStrategy::Hybrid:
      LVC_CHECK(implicit_channels > 0, "hybrid buffering needs channels");
      return 3 + implicit_channels;
  }
  throw DataError("unknown strategy");
}

TemporalBuffer TemporalBuffer::after_intra(BufferStrategy s,
                                           int implicit_channels,
                                           Var intra_recon) {
  LVC_CHECK(intra_recon && intra_recon->val.shape.c == 3,
            "intra reconstruction must be a 3-channel frame");
  TemporalBuffer b;
  b.strategy_ = s;
  b.implicit_channels_ = implicit_channels;
  b.intra_only_ = true;
  b.explicit_ = std::move(intra_recon);
  return b;
}

TemporalBuffer TemporalBuffer::after_inter(BufferStrategy s,
                                           int implicit_channels, Var recon,
                                           Var implicit_features) {
  TemporalBuffer b;
  b.strategy_ = s;
  b.implicit_channels_ = implicit_channels;
  switch (s) {
    case BufferStrategy::Explicit:
      LVC_CHECK(recon && recon->val.shape.c == 3, "explicit slot needs frame");
      b.explicit_ = std::move(recon);
      break;
    case BufferStrategy::Implicit:
      LVC_CHECK(implicit_features &&
                    implicit_features->val.shape.c == implicit_channels,
                "implicit slot channel mismatch");
      b.implicit_ = std::move(implicit_features);
      break;
    case BufferStrategy::Hybrid:
      LVC_CHECK(recon && recon->val.shape.c == 3, "hybrid needs frame");
      LVC_CHECK(implicit_features &&
                    implicit_features->val.shape.c == implicit_channels,
                "hybrid implicit channel mismatch");
      b.explicit_ = std::move(recon);
      b.implicit_ = std::move(implicit_features);
      break;
  }
  return b;
}

Var TemporalBuffer::reference() const {
  if (intra_only_) return *explicit_;
  switch (strategy_) {
    case BufferStrategy::Explicit:
      return *explicit_;
    case BufferStrategy::Implicit:
      return *implicit_;
    case BufferStrategy::Hybrid:
      return concat_ch({*explicit_, *implicit_});
  }
  throw DataError("unknown strategy");
}

int TemporalBuffer::reference_channels() const {
  if (intra_only_) return 3;
  return buffer_channel_count(strategy_, implicit_channels_);
}

int64_t TemporalBuffer::footprint() const {
  int64_t n = 0;
  if (explicit_) n += (*explicit_)->val.numel();
  if (implicit_) n += (*implicit_)->val.numel();
  return n;
}

}  // namespace lvc
