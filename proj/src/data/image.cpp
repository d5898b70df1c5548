#include "clipfusion/data/image.hpp"

#include "clipfusion/error.hpp"

namespace clipfusion {

Tensor3::Tensor3(int c, int h, int w, float fill) : channels(c), height(h), width(w) {
  if (c < 1 || h < 1 || w < 1) throw InvalidArgument("tensor dimensions must be positive");
  data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

}  // namespace clipfusion
