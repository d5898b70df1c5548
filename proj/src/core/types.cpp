#include "clipfusion/core/types.hpp"

#include "clipfusion/error.hpp"

namespace clipfusion {

void FusionWeights::validate() const {
  if (!(alpha_seg >= 0.0 && alpha_seg <= 1.0)) throw InvalidArgument("alpha_seg must lie in [0, 1]");
  if (!(alpha_cls >= 0.0 && alpha_cls <= 1.0)) throw InvalidArgument("alpha_cls must lie in [0, 1]");
}

}  // namespace clipfusion
