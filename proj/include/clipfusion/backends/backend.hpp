#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clipfusion/backends/attention.hpp"
#include "clipfusion/core/feature_grid.hpp"
#include "clipfusion/core/score_map.hpp"
#include "clipfusion/data/image.hpp"
#include "clipfusion/prompts/prompts.hpp"

namespace clipfusion {

struct BackendHandle {
  std::string model_id;
  std::string device = "cpu";
  int input_resolution = 0;
  double temperature = 0.01;  // vision-language only
};

struct TimestepBlock {
  int timestep = 0;
  int block = 0;

  friend bool operator==(const TimestepBlock&, const TimestepBlock&) = default;
};

// Default decoder taps: higher timesteps paired with coarser decoder blocks.
std::vector<TimestepBlock> default_timestep_blocks();

struct CrossAttentionRequest {
  const Tensor3* image = nullptr;  // preprocessed, 3 x 512 x 512
  RenderedPrompt prompt;           // carries the [state] character span
  int timestep = 401;
  LayerSelection layer_selection = LayerSelection::kEncoderAndDecoderNoBottleneck;
};

// Contrastive vision-language encoder tap. Not thread-safe: one consumer per
// instance. Public entry points validate inputs, then defer to the model.
class VisionLanguageBackend {
 public:
  explicit VisionLanguageBackend(BackendHandle handle) : handle_(std::move(handle)) {}
  virtual ~VisionLanguageBackend() = default;

  const BackendHandle& handle() const noexcept { return handle_; }
  virtual int encoder_depth() const = 0;
  virtual int patch_size() const = 0;
  int grid_side() const { return handle_.input_resolution / patch_size(); }

  // Projected class-token embedding in the joint image-text space.
  std::vector<double> global_embedding(const Tensor3& image);
  // Per-patch embeddings with the final projection applied per patch.
  FeatureGrid patch_embeddings(const Tensor3& image);
  // One grid per requested block, read from the value-value attention path.
  std::vector<FeatureGrid> block_features(const Tensor3& image, std::span<const int> blocks);
  std::vector<double> text_embedding(const std::string& prompt);

 protected:
  virtual std::vector<double> do_global_embedding(const Tensor3& image) = 0;
  virtual FeatureGrid do_patch_embeddings(const Tensor3& image) = 0;
  virtual std::vector<FeatureGrid> do_block_features(const Tensor3& image, std::span<const int> blocks) = 0;
  virtual std::vector<double> do_text_embedding(const std::string& prompt) = 0;

 private:
  void check_image(const Tensor3& image) const;

  BackendHandle handle_;
};

// Text-conditioned inpainting denoiser tap, always driven with an all-zero
// mask and a single forward pass at the requested timestep.
class DiffusionBackend {
 public:
  explicit DiffusionBackend(BackendHandle handle) : handle_(std::move(handle)) {}
  virtual ~DiffusionBackend() = default;

  const BackendHandle& handle() const noexcept { return handle_; }

  // Attention mass on the [state] token(s), aggregated over the selected
  // layers at a 64 x 64 common resolution. Non-negative.
  ScoreMap cross_attention(const CrossAttentionRequest& request);

  // One grid per (timestep, decoder block). Block 0 is rejected.
  std::vector<FeatureGrid> decoder_features(const Tensor3& image, const std::string& prompt,
                                            std::span<const TimestepBlock> pairs);

  static constexpr int kCommonSide = 64;

 protected:
  virtual ScoreMap do_cross_attention(const CrossAttentionRequest& request,
                                      std::span<const int> state_tokens) = 0;
  virtual std::vector<int> state_token_indices(const RenderedPrompt& prompt) = 0;
  virtual std::vector<FeatureGrid> do_decoder_features(const Tensor3& image, const std::string& prompt,
                                                       std::span<const TimestepBlock> pairs) = 0;

 private:
  void check_image(const Tensor3& image) const;

  BackendHandle handle_;
};

}  // namespace clipfusion
