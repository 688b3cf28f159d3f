#include "lvc/framework.h"

namespace lvc {

FrameworkSpec framework_spec(Framework f) {
  switch (f) {
    case Framework::RC:
      return {f, false, true, false};
    case Framework::CC:
      return {f, true, false, false};
    case Framework::CRC:
      return {f, true, true, false};
    case Framework::MCR:
      return {f, true, true, true};
  }
  throw DataError("unknown framework");
}

Framework framework_from_name(const std::string& name) {
  if (name == "RC") return Framework::RC;
  if (name == "CC") return Framework::CC;
  if (name == "CRC") return Framework::CRC;
  if (name == "MCR") return Framework::MCR;
  throw UsageError("unknown framework '" + name + "' (RC, CC, CRC, MCR)");
}

std::string framework_name(Framework f) {
  switch (f) {
    case Framework::RC:
      return "RC";
    case Framework::CC:
      return "CC";
    case Framework::CRC:
      return "CRC";
    case Framework::MCR:
      return "MCR";
  }
  throw DataError("unknown framework");
}

namespace {

void check_operands(const FrameworkSpec& spec,
                    const std::optional<Var>& prediction,
                    const std::optional<Var>& mask) {
  LVC_CHECK(spec.uses_pixel_prediction == prediction.has_value(),
            framework_name(spec.id),
            spec.uses_pixel_prediction ? " requires a pixel prediction"
                                       : " takes no pixel prediction");
  LVC_CHECK(spec.uses_mask == mask.has_value(), framework_name(spec.id),
            spec.uses_mask ? " requires a mask" : " takes no mask");
}

}  // namespace

Var compose_coded_signal(const FrameworkSpec& spec, const Var& x,
                         const std::optional<Var>& prediction,
                         const std::optional<Var>& mask) {
  check_operands(spec, prediction, mask);
  switch (spec.id) {
    case Framework::RC:
    case Framework::CRC:
      return sub(x, *prediction);
    case Framework::CC:
      return x;
    case Framework::MCR:
      return sub(x, mul_mask(*prediction, *mask));
  }
  throw DataError("unknown framework");
}

Var compose_reconstruction(const FrameworkSpec& spec, const Var& g,
                           const std::optional<Var>& prediction,
                           const std::optional<Var>& mask) {
  check_operands(spec, prediction, mask);
  switch (spec.id) {
    case Framework::RC:
    case Framework::CRC:
      return add(g, *prediction);
    case Framework::CC:
      return g;
    case Framework::MCR:
      return add(g, mul_mask(*prediction, *mask));
  }
  throw DataError("unknown framework");
}

}  // namespace lvc
