#pragma once

#include <array>

#include "clipfusion/data/image.hpp"

namespace clipfusion {

inline constexpr int kClipResolution = 240;
inline constexpr int kDiffusionResolution = 512;
inline constexpr std::array<float, 3> kClipMean = {0.48145466f, 0.4578275f, 0.40821073f};
inline constexpr std::array<float, 3> kClipStd = {0.26862954f, 0.26130258f, 0.27577711f};

// RGB in [0, 1] -> 3 x 240 x 240, bicubic resize then per-channel standardization.
Tensor3 preprocess_clip(const Image& image);

// RGB in [0, 1] -> 3 x 512 x 512, bilinear resize then mapped to [-1, 1].
Tensor3 preprocess_diffusion(const Image& image);

}  // namespace clipfusion
