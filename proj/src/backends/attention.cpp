#include "clipfusion/backends/attention.hpp"

#include <algorithm>
#include <cmath>

#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

TokenMatrix multihead_attention(const TokenMatrix& q, const TokenMatrix& k, const TokenMatrix& v,
                                int num_heads) {
  if (num_heads < 1 || q.dim % num_heads != 0) {
    throw InvalidArgument("attention: dim must be divisible by the head count");
  }
  if (q.dim != k.dim || q.dim != v.dim || k.tokens != v.tokens) {
    throw InvalidArgument("attention: q/k/v shapes disagree");
  }
  const int head_dim = q.dim / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  TokenMatrix out(q.tokens, v.dim);
  std::vector<double> logits(k.tokens);

  for (int h = 0; h < num_heads; ++h) {
    const int c0 = h * head_dim;
    for (int i = 0; i < q.tokens; ++i) {
      double peak = -INFINITY;
      for (int j = 0; j < k.tokens; ++j) {
        double dot = 0.0;
        for (int c = c0; c < c0 + head_dim; ++c) dot += q.at(i, c) * k.at(j, c);
        logits[j] = dot * scale;
        peak = std::max(peak, logits[j]);
      }
      double total = 0.0;
      for (double& l : logits) {
        l = std::exp(l - peak);
        total += l;
      }
      for (int j = 0; j < k.tokens; ++j) {
        const double w = logits[j] / total;
        for (int c = c0; c < c0 + head_dim; ++c) out.at(i, c) += w * v.at(j, c);
      }
    }
  }
  return out;
}

TokenMatrix vv_attention(const TokenMatrix& values, int num_heads) {
  return multihead_attention(values, values, values, num_heads);
}

bool layer_selected(UNetStage stage, LayerSelection selection) {
  switch (selection) {
    case LayerSelection::kAll:
      return true;
    case LayerSelection::kDecoderOnly:
      return stage == UNetStage::kUp;
    case LayerSelection::kEncoderAndDecoderNoBottleneck:
      return stage != UNetStage::kMid;
  }
  return false;
}

ScoreMap aggregate_cross_attention(std::span<const CrossAttentionLayer> layers,
                                   std::span<const int> token_indices, LayerSelection selection,
                                   int common_side) {
  if (token_indices.empty()) throw InvalidArgument("cross-attention: no state tokens given");
  std::vector<ScoreMap> per_layer;
  for (const auto& layer : layers) {
    if (!layer_selected(layer.stage, selection)) continue;
    const int positions = layer.height * layer.width;
    if (layer.probs.size() != static_cast<std::size_t>(layer.heads) * positions * layer.tokens) {
      throw InvalidArgument("cross-attention layer has inconsistent probability storage");
    }
    for (int t : token_indices) {
      if (t < 0 || t >= layer.tokens) throw InvalidArgument("cross-attention token index out of range");
    }
    std::vector<double> cell(positions, 0.0);
    for (int p = 0; p < positions; ++p) {
      double acc = 0.0;
      for (int h = 0; h < layer.heads; ++h)
        for (int t : token_indices) acc += layer.prob(h, p, t);
      cell[p] = acc / (static_cast<double>(layer.heads) * token_indices.size());
    }
    per_layer.push_back(
        resize_map(ScoreMap(layer.height, layer.width, std::move(cell)), common_side, common_side));
  }
  if (per_layer.empty()) throw InvalidArgument("cross-attention: layer selection matched no layers");
  return mean_maps(per_layer);
}

double alpha_bar(int timestep) {
  if (timestep < 0 || timestep > 999) throw InvalidArgument("timestep must be in [0, 999]");
  const double lo = std::sqrt(0.00085), hi = std::sqrt(0.012);
  double prod = 1.0;
  for (int i = 0; i <= timestep; ++i) {
    const double s = lo + (hi - lo) * i / 999.0;
    prod *= 1.0 - s * s;
  }
  return prod;
}

Tensor3 prepare_inpainting_latent(const Tensor3& clean, std::span<const float> mask,
                                  const Tensor3& noise, int timestep) {
  if (mask.size() != clean.plane()) throw InvalidArgument("inpainting mask does not match the latent plane");
  if (noise.channels != clean.channels || noise.height != clean.height || noise.width != clean.width) {
    throw InvalidArgument("noise tensor does not match the latent shape");
  }
  const double ab = alpha_bar(timestep);
  const double signal = std::sqrt(ab), sigma = std::sqrt(1.0 - ab);
  Tensor3 out = clean;
  for (int c = 0; c < clean.channels; ++c) {
    for (std::size_t i = 0; i < clean.plane(); ++i) {
      const float m = mask[i];
      if (m <= 0.0f) continue;
      const std::size_t idx = c * clean.plane() + i;
      const double noisy = signal * clean.data[idx] + sigma * noise.data[idx];
      out.data[idx] = static_cast<float>((1.0 - m) * clean.data[idx] + m * noisy);
    }
  }
  return out;
}

}  // namespace clipfusion
