#pragma once

#include "clipfusion/data/image.hpp"

namespace clipfusion {

enum class ResampleFilter { kBilinear, kBicubic };

// Separable convolution resampling with half-pixel centers. With `antialias`,
// the kernel widens by the downscale factor (area-aware, as in PIL);
// upscaling is unaffected. Bicubic uses the Keys kernel with a = -0.5.
Tensor3 resample(const Tensor3& in, int out_h, int out_w, ResampleFilter filter, bool antialias = true);

}  // namespace clipfusion
