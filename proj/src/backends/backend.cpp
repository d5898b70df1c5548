#include "clipfusion/backends/backend.hpp"

#include <cmath>

#include "clipfusion/error.hpp"

namespace clipfusion {

std::vector<TimestepBlock> default_timestep_blocks() { return {{201, 3}, {401, 2}, {801, 1}}; }

void VisionLanguageBackend::check_image(const Tensor3& image) const {
  const int r = handle_.input_resolution;
  if (image.channels != 3 || image.height != r || image.width != r) {
    throw InvalidArgument("vision-language backend expects a 3x" + std::to_string(r) + "x" +
                          std::to_string(r) + " tensor");
  }
}

std::vector<double> VisionLanguageBackend::global_embedding(const Tensor3& image) {
  check_image(image);
  return do_global_embedding(image);
}

FeatureGrid VisionLanguageBackend::patch_embeddings(const Tensor3& image) {
  check_image(image);
  return do_patch_embeddings(image);
}

std::vector<FeatureGrid> VisionLanguageBackend::block_features(const Tensor3& image,
                                                               std::span<const int> blocks) {
  for (int b : blocks) {
    if (b < 0 || b >= encoder_depth()) {
      throw InvalidArgument("encoder block " + std::to_string(b) + " outside [0, " +
                            std::to_string(encoder_depth()) + ")");
    }
  }
  if (blocks.empty()) return {};
  check_image(image);
  return do_block_features(image, blocks);
}

std::vector<double> VisionLanguageBackend::text_embedding(const std::string& prompt) {
  if (prompt.empty()) throw InvalidArgument("text prompt must not be empty");
  return do_text_embedding(prompt);
}

void DiffusionBackend::check_image(const Tensor3& image) const {
  const int r = handle_.input_resolution;
  if (image.channels != 3 || image.height != r || image.width != r) {
    throw InvalidArgument("diffusion backend expects a 3x" + std::to_string(r) + "x" +
                          std::to_string(r) + " tensor");
  }
}

ScoreMap DiffusionBackend::cross_attention(const CrossAttentionRequest& request) {
  if (request.image == nullptr) throw InvalidArgument("cross-attention request has no image");
  if (request.timestep < 1 || request.timestep > 999) {
    throw InvalidArgument("cross-attention timestep must be in [1, 999]");
  }
  check_image(*request.image);
  const auto tokens = state_token_indices(request.prompt);
  ScoreMap map = do_cross_attention(request, tokens);
  if (map.min() < 0.0) throw InvalidArgument("backend produced negative attention mass");
  return map;
}

std::vector<FeatureGrid> DiffusionBackend::decoder_features(const Tensor3& image, const std::string& prompt,
                                                            std::span<const TimestepBlock> pairs) {
  for (const auto& p : pairs) {
    if (p.block == 0) {
      throw InvalidArgument("decoder block 0 is excluded from feature extraction");
    }
    SourceTag::diffusion(p.timestep, p.block);  // range check
  }
  if (pairs.empty()) return {};
  check_image(image);
  return do_decoder_features(image, prompt, pairs);
}

}  // namespace clipfusion
