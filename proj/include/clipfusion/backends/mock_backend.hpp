#pragma once

#include <span>
#include <string>
#include <vector>

#include "clipfusion/backends/backend.hpp"

namespace clipfusion {

// Deterministic GPU-free stand-ins for both taps, selected by model id "mock".
//
// Cell features are phase-encoded local statistics: each statistic s is
// clamped to a fixed range, mapped to an angle t in [0, pi] and stored as
// (cos t, sin t). The statistics are the per-channel means, the luminance
// standard deviation, and the mean absolute horizontal and vertical luminance
// gradients. Four position-independent channels seeded from the model id (and
// the tap) are appended, so every cell has positive norm. A constant brightness
// shift therefore moves only the channel-mean pairs.
//
// "Irregularity" of a cell is 1 - exp(-|e - median(e)|^2 / 0.5), where e is the
// encoded statistics vector and the median is taken per channel over all cells
// of the image. It drives the language-guided outputs:
//  - joint-space patch/global embeddings are (2 * irr - 1, constant hash part);
//  - text embeddings carry a condition channel (+1 for prompts naming damage,
//    -1 for prompts naming a perfect object) plus hash channels of the prompt
//    that are orthogonal to the image hash channels;
//  - cross-attention logits of the state tokens grow with irregularity.

// Encoded statistics of the window [y0, y0+h) x [x0, x0+w) of a tensor whose
// first three channels are colour; `ranges` gives (lo, hi) for mean, standard
// deviation and gradient statistics.
struct StatRanges {
  double mean_lo, mean_hi, std_hi, grad_hi;
};
inline constexpr int kMockStatChannels = 12;
inline constexpr int kMockHashChannels = 4;
inline constexpr int kMockFeatureDim = kMockStatChannels + kMockHashChannels;

void encode_window_stats(const Tensor3& image, int y0, int x0, int h, int w, const StatRanges& ranges,
                         float* out);

// Per-cell irregularity of row-major encoded cells (cells x kMockStatChannels).
std::vector<double> irregularity(std::span<const float> encoded, std::size_t cells);

class MockVisionLanguageBackend final : public VisionLanguageBackend {
 public:
  explicit MockVisionLanguageBackend(BackendHandle handle);

  int encoder_depth() const override { return 12; }
  int patch_size() const override { return 16; }

  static constexpr int kJointDim = 16;

  // Pre-attention cell features (statistics + hash channels), tagged with block 0.
  FeatureGrid cell_statistics(const Tensor3& image) const;

 protected:
  std::vector<double> do_global_embedding(const Tensor3& image) override;
  FeatureGrid do_patch_embeddings(const Tensor3& image) override;
  std::vector<FeatureGrid> do_block_features(const Tensor3& image, std::span<const int> blocks) override;
  std::vector<double> do_text_embedding(const std::string& prompt) override;

 private:
  std::vector<float> encoded_cells(const Tensor3& image) const;
  std::vector<double> joint_vector(double irr) const;

  std::uint64_t seed_;
};

class MockDiffusionBackend final : public DiffusionBackend {
 public:
  explicit MockDiffusionBackend(BackendHandle handle);

  // The mock autoencoder pools 16 x 16 pixel blocks: 512 input -> 32 x 32
  // latent with channels (mean R, mean G, mean B, luminance std), in [0, 1].
  static constexpr int kLatentSide = 32;

  Tensor3 encode_latent(const Tensor3& image) const;

  // What the denoiser sees: the clean latent passed through the inpainting
  // blend with an all-zero mask and seeded Gaussian noise.
  Tensor3 denoiser_input(const Tensor3& image, int timestep) const;

  // Grid side of decoder block b (1..3): 8, 16, 32.
  static int decoder_side(int block) { return kLatentSide >> (3 - block); }

  // Cross-attention layers of one forward pass, in execution order.
  std::vector<CrossAttentionLayer> attention_layers(const Tensor3& image, const RenderedPrompt& prompt,
                                                    int timestep) const;

 protected:
  ScoreMap do_cross_attention(const CrossAttentionRequest& request, std::span<const int> state_tokens) override;
  std::vector<int> state_token_indices(const RenderedPrompt& prompt) override;
  std::vector<FeatureGrid> do_decoder_features(const Tensor3& image, const std::string& prompt,
                                               std::span<const TimestepBlock> pairs) override;

 private:
  Tensor3 denoised_latent(const Tensor3& image, int timestep) const;

  std::uint64_t seed_;
};

}  // namespace clipfusion
