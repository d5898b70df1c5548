#pragma once

#include <span>
#include <vector>

#include "clipfusion/core/score_map.hpp"
#include "clipfusion/data/image.hpp"

namespace clipfusion {

// Row-major tokens x dim matrix.
struct TokenMatrix {
  int tokens = 0;
  int dim = 0;
  std::vector<double> data;

  TokenMatrix() = default;
  TokenMatrix(int t, int d) : tokens(t), dim(d), data(static_cast<std::size_t>(t) * d, 0.0) {}

  double& at(int t, int d) { return data[static_cast<std::size_t>(t) * dim + d]; }
  double at(int t, int d) const { return data[static_cast<std::size_t>(t) * dim + d]; }
};

// Scaled dot-product attention, channels split evenly across heads:
// per head softmax(Q K^T / sqrt(head_dim)) V, heads concatenated.
TokenMatrix multihead_attention(const TokenMatrix& q, const TokenMatrix& k, const TokenMatrix& v,
                                int num_heads);

// Value-value attention (CLIP surgery): the value projection stands in for
// both query and key, so each token attends to tokens with similar content
// rather than to the globally salient ones.
TokenMatrix vv_attention(const TokenMatrix& values, int num_heads);

// Where a cross-attention layer sits in the denoiser.
enum class UNetStage { kDown, kMid, kUp };

enum class LayerSelection { kEncoderAndDecoderNoBottleneck, kDecoderOnly, kAll };

bool layer_selected(UNetStage stage, LayerSelection selection);

// Softmax attention probabilities of one cross-attention layer, laid out as
// [head][position][token], positions row-major over height x width.
struct CrossAttentionLayer {
  UNetStage stage = UNetStage::kDown;
  int height = 0;
  int width = 0;
  int heads = 0;
  int tokens = 0;
  std::vector<float> probs;

  float prob(int head, int pos, int token) const {
    return probs[(static_cast<std::size_t>(head) * height * width + pos) * tokens + token];
  }
};

// Per selected layer: mean over heads and over the given token indices, then
// bilinear upsampling to common_side x common_side; the result is the mean of
// the per-layer maps. Throws InvalidArgument if nothing is selected.
ScoreMap aggregate_cross_attention(std::span<const CrossAttentionLayer> layers,
                                   std::span<const int> token_indices, LayerSelection selection,
                                   int common_side = 64);

// Cumulative product of (1 - beta) under the scaled-linear schedule
// (beta from 0.00085 to 0.012 over 1000 steps).
double alpha_bar(int timestep);

// Inpainting input latent: inside the mask the clean latent is replaced by
// sqrt(ab) * clean + sqrt(1 - ab) * noise; outside it passes through untouched.
// `mask` is H x W with values in [0, 1]. An all-zero mask returns `clean`
// bit-for-bit, whatever the timestep.
Tensor3 prepare_inpainting_latent(const Tensor3& clean, std::span<const float> mask,
                                  const Tensor3& noise, int timestep);

}  // namespace clipfusion
