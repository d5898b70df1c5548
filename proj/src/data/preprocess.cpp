#include "clipfusion/data/preprocess.hpp"

#include "clipfusion/data/resample.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

Tensor3 preprocess_clip(const Image& image) {
  if (image.channels != 3) throw IngestionError("expected an RGB image");
  Tensor3 out = resample(image, kClipResolution, kClipResolution, ResampleFilter::kBicubic);
  for (int c = 0; c < 3; ++c) {
    float* plane = out.data.data() + c * out.plane();
    for (std::size_t i = 0; i < out.plane(); ++i) plane[i] = (plane[i] - kClipMean[c]) / kClipStd[c];
  }
  return out;
}

Tensor3 preprocess_diffusion(const Image& image) {
  if (image.channels != 3) throw IngestionError("expected an RGB image");
  Tensor3 out = resample(image, kDiffusionResolution, kDiffusionResolution, ResampleFilter::kBilinear);
  for (float& v : out.data) v = 2.0f * v - 1.0f;
  return out;
}

}  // namespace clipfusion
