#include "clipfusion/backends/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clipfusion/backends/tokenizer.hpp"
#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/data/rng.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

constexpr StatRanges kClipRanges{-1.8, 2.1, 1.2, 1.2};
constexpr StatRanges kLatentRanges{0.0, 1.0, 0.3, 0.3};
constexpr double kIrregularityScale = 0.5;
constexpr double kHashAmplitude = 0.25;
constexpr double kVvGain = 12.0;

void phase(double s, double lo, double hi, float* out) {
  const double t = std::clamp((s - lo) / (hi - lo), 0.0, 1.0) * std::numbers::pi;
  out[0] = static_cast<float>(std::cos(t));
  out[1] = static_cast<float>(std::sin(t));
}

void encode_stats(const double mean[3], double sd, double gx, double gy, const StatRanges& r, float* out) {
  for (int c = 0; c < 3; ++c) phase(mean[c], r.mean_lo, r.mean_hi, out + 2 * c);
  phase(sd, 0.0, r.std_hi, out + 6);
  phase(gx, 0.0, r.grad_hi, out + 8);
  phase(gy, 0.0, r.grad_hi, out + 10);
}

void hash_channels(std::uint64_t key, float* out) {
  for (int i = 0; i < kMockHashChannels; ++i) {
    out[i] = static_cast<float>(kHashAmplitude * hash_unit(key + 0x51ED27ULL * (i + 1)));
  }
}

std::uint64_t tap_key(std::uint64_t seed, int a, int b) {
  return mix64(seed ^ mix64(static_cast<std::uint64_t>(a) * 1000003ULL + static_cast<std::uint64_t>(b)));
}

ScoreMap plane_map(const Tensor3& t, int c) {
  return ScoreMap(t.height, t.width,
                  std::vector<double>(t.data.begin() + c * t.plane(), t.data.begin() + (c + 1) * t.plane()));
}

Tensor3 pool(const Tensor3& t, int side) {
  const int f = t.height / side;
  Tensor3 out(t.channels, side, side);
  for (int c = 0; c < t.channels; ++c)
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < f; ++dy)
          for (int dx = 0; dx < f; ++dx) acc += t.at(c, y * f + dy, x * f + dx);
        out.at(c, y, x) = static_cast<float>(acc / (f * f));
      }
  return out;
}

// Encoded statistics per cell of a pooled latent grid.
std::vector<float> encode_latent_grid(const Tensor3& g) {
  const int s = g.height;
  std::vector<float> out(static_cast<std::size_t>(s) * s * kMockStatChannels);
  auto lum = [&](int y, int x) {
    y = std::clamp(y, 0, s - 1);
    x = std::clamp(x, 0, s - 1);
    return (g.at(0, y, x) + g.at(1, y, x) + g.at(2, y, x)) / 3.0;
  };
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      const double mean[3] = {g.at(0, y, x), g.at(1, y, x), g.at(2, y, x)};
      const double gx = std::fabs(lum(y, x + 1) - lum(y, x - 1)) / 2.0;
      const double gy = std::fabs(lum(y + 1, x) - lum(y - 1, x)) / 2.0;
      encode_stats(mean, g.at(3, y, x), gx, gy, kLatentRanges,
                   out.data() + (static_cast<std::size_t>(y) * s + x) * kMockStatChannels);
    }
  return out;
}

}  // namespace

void encode_window_stats(const Tensor3& image, int y0, int x0, int h, int w, const StatRanges& ranges,
                         float* out) {
  double mean[3] = {0, 0, 0};
  double lsum = 0.0, lsq = 0.0, gx = 0.0, gy = 0.0;
  int ngx = 0, ngy = 0;
  auto lum = [&](int y, int x) { return (image.at(0, y, x) + image.at(1, y, x) + image.at(2, y, x)) / 3.0; };
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) {
      for (int c = 0; c < 3; ++c) mean[c] += image.at(c, y, x);
      const double l = lum(y, x);
      lsum += l;
      lsq += l * l;
      if (x + 1 < x0 + w) {
        gx += std::fabs(lum(y, x + 1) - l);
        ++ngx;
      }
      if (y + 1 < y0 + h) {
        gy += std::fabs(lum(y + 1, x) - l);
        ++ngy;
      }
    }
  const double n = static_cast<double>(h) * w;
  for (double& m : mean) m /= n;
  const double lmean = lsum / n;
  const double sd = std::sqrt(std::max(0.0, lsq / n - lmean * lmean));
  encode_stats(mean, sd, ngx ? gx / ngx : 0.0, ngy ? gy / ngy : 0.0, ranges, out);
}

std::vector<double> irregularity(std::span<const float> encoded, std::size_t cells) {
  std::vector<double> median(kMockStatChannels);
  std::vector<float> column(cells);
  for (int c = 0; c < kMockStatChannels; ++c) {
    for (std::size_t i = 0; i < cells; ++i) column[i] = encoded[i * kMockStatChannels + c];
    auto mid = column.begin() + static_cast<std::ptrdiff_t>((cells - 1) / 2);
    std::nth_element(column.begin(), mid, column.end());
    median[c] = *mid;
  }
  std::vector<double> irr(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    double d2 = 0.0;
    for (int c = 0; c < kMockStatChannels; ++c) {
      const double d = encoded[i * kMockStatChannels + c] - median[c];
      d2 += d * d;
    }
    irr[i] = 1.0 - std::exp(-d2 / kIrregularityScale);
  }
  return irr;
}

// ---------------------------------------------------------------------------
// Vision-language mock

MockVisionLanguageBackend::MockVisionLanguageBackend(BackendHandle handle)
    : VisionLanguageBackend(std::move(handle)), seed_(fnv1a64(this->handle().model_id)) {}

std::vector<float> MockVisionLanguageBackend::encoded_cells(const Tensor3& image) const {
  const int side = grid_side(), p = patch_size();
  std::vector<float> out(static_cast<std::size_t>(side) * side * kMockStatChannels);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      encode_window_stats(image, y * p, x * p, p, p, kClipRanges,
                          out.data() + (static_cast<std::size_t>(y) * side + x) * kMockStatChannels);
  return out;
}

FeatureGrid MockVisionLanguageBackend::cell_statistics(const Tensor3& image) const {
  const int side = grid_side();
  const auto enc = encoded_cells(image);
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(side) * side * kMockFeatureDim);
  float hash[kMockHashChannels];
  hash_channels(tap_key(seed_, 0, 0), hash);
  for (std::size_t i = 0; i < static_cast<std::size_t>(side) * side; ++i) {
    data.insert(data.end(), enc.begin() + i * kMockStatChannels, enc.begin() + (i + 1) * kMockStatChannels);
    data.insert(data.end(), hash, hash + kMockHashChannels);
  }
  return FeatureGrid(side, side, kMockFeatureDim, SourceTag::clip(0), std::move(data));
}

std::vector<double> MockVisionLanguageBackend::joint_vector(double irr) const {
  // Channel 0: signed irregularity. Channels 1..7: image-side constant.
  // Channels 8..15 are reserved for the text side.
  std::vector<double> v(kJointDim, 0.0);
  v[0] = 2.0 * irr - 1.0;
  for (int i = 1; i < 8; ++i) v[i] = 0.5 * hash_unit(seed_ + 0xA11CEULL * i) / std::sqrt(7.0);
  return v;
}

std::vector<double> MockVisionLanguageBackend::do_global_embedding(const Tensor3& image) {
  const auto enc = encoded_cells(image);
  const auto irr = irregularity(enc, enc.size() / kMockStatChannels);
  return joint_vector(*std::max_element(irr.begin(), irr.end()));
}

FeatureGrid MockVisionLanguageBackend::do_patch_embeddings(const Tensor3& image) {
  const int side = grid_side();
  const auto enc = encoded_cells(image);
  const auto irr = irregularity(enc, enc.size() / kMockStatChannels);
  std::vector<float> data;
  data.reserve(irr.size() * kJointDim);
  for (double r : irr) {
    for (double v : joint_vector(r)) data.push_back(static_cast<float>(v));
  }
  return FeatureGrid(side, side, kJointDim, SourceTag::clip(encoder_depth() - 1), std::move(data));
}

std::vector<FeatureGrid> MockVisionLanguageBackend::do_block_features(const Tensor3& image,
                                                                      std::span<const int> blocks) {
  const int side = grid_side();
  const int cells = side * side;
  const auto enc = encoded_cells(image);

  // 3x3 neighbourhood mean of the encoded cells.
  std::vector<double> neighbourhood(enc.size(), 0.0);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      int n = 0;
      double* dst = neighbourhood.data() + (static_cast<std::size_t>(y) * side + x) * kMockStatChannels;
      for (int yy = std::max(0, y - 1); yy <= std::min(side - 1, y + 1); ++yy)
        for (int xx = std::max(0, x - 1); xx <= std::min(side - 1, x + 1); ++xx) {
          const float* src = enc.data() + (static_cast<std::size_t>(yy) * side + xx) * kMockStatChannels;
          for (int c = 0; c < kMockStatChannels; ++c) dst[c] += src[c];
          ++n;
        }
      for (int c = 0; c < kMockStatChannels; ++c) dst[c] /= n;
    }

  std::vector<FeatureGrid> out;
  out.reserve(blocks.size());
  for (int b : blocks) {
    // Deeper blocks mix in more context before the value-value attention.
    const double context = static_cast<double>(b) / (encoder_depth() - 1);
    TokenMatrix values(cells, kMockStatChannels);
    for (int i = 0; i < cells; ++i) {
      double norm2 = 0.0;
      for (int c = 0; c < kMockStatChannels; ++c) {
        const double v = enc[static_cast<std::size_t>(i) * kMockStatChannels + c] +
                         context * neighbourhood[static_cast<std::size_t>(i) * kMockStatChannels + c];
        values.at(i, c) = v;
        norm2 += v * v;
      }
      const double scale = kVvGain / std::sqrt(norm2);
      for (int c = 0; c < kMockStatChannels; ++c) values.at(i, c) *= scale;
    }
    const TokenMatrix attended = vv_attention(values, 1);

    float hash[kMockHashChannels];
    hash_channels(tap_key(seed_, 0, b), hash);
    std::vector<float> data;
    data.reserve(static_cast<std::size_t>(cells) * kMockFeatureDim);
    for (int i = 0; i < cells; ++i) {
      for (int c = 0; c < kMockStatChannels; ++c) data.push_back(static_cast<float>(attended.at(i, c) / kVvGain));
      data.insert(data.end(), hash, hash + kMockHashChannels);
    }
    out.emplace_back(side, side, kMockFeatureDim, SourceTag::clip(b), std::move(data));
  }
  return out;
}

std::vector<double> MockVisionLanguageBackend::do_text_embedding(const std::string& prompt) {
  static const std::vector<std::string> kAbnormal = {"damaged", "damage", "defective", "broken", "anomalous",
                                                     "flawed"};
  static const std::vector<std::string> kNormal = {"perfect", "flawless", "normal", "intact"};
  const auto tokens = tokenize_with_offsets(prompt, prompt.size() + 1);
  auto contains = [&](const std::vector<std::string>& words) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) {
      return !t.special && std::find(words.begin(), words.end(), t.text) != words.end();
    });
  };
  const double condition = contains(kAbnormal) ? 1.0 : (contains(kNormal) ? -1.0 : 0.0);

  std::vector<double> v(kJointDim, 0.0);
  v[0] = 0.01 * condition;
  const std::uint64_t key = seed_ ^ fnv1a64(prompt);
  for (int i = 8; i < kJointDim; ++i) v[i] = 0.3 * hash_unit(key + 0x7E47ULL * i);
  return v;
}

// ---------------------------------------------------------------------------
// Diffusion mock

namespace {

struct LayerSpec {
  UNetStage stage;
  int side;
};

// Mirrors the cross-attention placement of a latent-diffusion U-Net on a
// 32 x 32 latent: two transformers per down level, one in the mid block,
// three per up level.
constexpr LayerSpec kLayers[] = {
    {UNetStage::kDown, 32}, {UNetStage::kDown, 32}, {UNetStage::kDown, 16}, {UNetStage::kDown, 16},
    {UNetStage::kDown, 8},  {UNetStage::kDown, 8},  {UNetStage::kMid, 4},   {UNetStage::kUp, 8},
    {UNetStage::kUp, 8},    {UNetStage::kUp, 8},    {UNetStage::kUp, 16},   {UNetStage::kUp, 16},
    {UNetStage::kUp, 16},   {UNetStage::kUp, 32},   {UNetStage::kUp, 32},   {UNetStage::kUp, 32},
};
constexpr int kHeads = 2;

}  // namespace

MockDiffusionBackend::MockDiffusionBackend(BackendHandle handle)
    : DiffusionBackend(std::move(handle)), seed_(fnv1a64(this->handle().model_id)) {}

Tensor3 MockDiffusionBackend::encode_latent(const Tensor3& image) const {
  const int f = image.height / kLatentSide;
  Tensor3 latent(4, kLatentSide, kLatentSide);
  for (int y = 0; y < kLatentSide; ++y)
    for (int x = 0; x < kLatentSide; ++x) {
      double mean[3] = {0, 0, 0}, lsum = 0.0, lsq = 0.0;
      for (int dy = 0; dy < f; ++dy)
        for (int dx = 0; dx < f; ++dx) {
          double l = 0.0;
          for (int c = 0; c < 3; ++c) {
            const double v = 0.5 * (image.at(c, y * f + dy, x * f + dx) + 1.0);
            mean[c] += v;
            l += v;
          }
          l /= 3.0;
          lsum += l;
          lsq += l * l;
        }
      const double n = static_cast<double>(f) * f;
      for (int c = 0; c < 3; ++c) latent.at(c, y, x) = static_cast<float>(mean[c] / n);
      const double lm = lsum / n;
      latent.at(3, y, x) = static_cast<float>(std::sqrt(std::max(0.0, lsq / n - lm * lm)));
    }
  return latent;
}

Tensor3 MockDiffusionBackend::denoiser_input(const Tensor3& image, int timestep) const {
  const Tensor3 clean = encode_latent(image);
  Tensor3 noise(clean.channels, clean.height, clean.width);
  SplitMix64 rng(seed_ ^ mix64(static_cast<std::uint64_t>(timestep)));
  for (float& v : noise.data) v = static_cast<float>(rng.normal());
  const std::vector<float> empty_mask(clean.plane(), 0.0f);
  return prepare_inpainting_latent(clean, empty_mask, noise, timestep);
}

Tensor3 MockDiffusionBackend::denoised_latent(const Tensor3& image, int timestep) const {
  // Larger timesteps blur more: the denoiser reads the input as noisier and
  // keeps only coarse structure.
  const Tensor3 latent = denoiser_input(image, timestep);
  const double sigma = timestep / 400.0;
  Tensor3 out(latent.channels, latent.height, latent.width);
  for (int c = 0; c < latent.channels; ++c) {
    const ScoreMap smoothed = gaussian_smooth(plane_map(latent, c), sigma);
    auto v = smoothed.values();
    std::transform(v.begin(), v.end(), out.data.begin() + c * out.plane(),
                   [](double d) { return static_cast<float>(d); });
  }
  return out;
}

std::vector<int> MockDiffusionBackend::state_token_indices(const RenderedPrompt& prompt) {
  return tokens_for_span(tokenize_with_offsets(prompt.text), prompt.state_begin, prompt.state_end,
                         prompt.text.size());
}

std::vector<CrossAttentionLayer> MockDiffusionBackend::attention_layers(const Tensor3& image,
                                                                        const RenderedPrompt& prompt,
                                                                        int timestep) const {
  const auto tokens = tokenize_with_offsets(prompt.text);
  const auto state = tokens_for_span(tokens, prompt.state_begin, prompt.state_end, prompt.text.size());
  const Tensor3 latent = denoised_latent(image, timestep);

  std::vector<std::pair<int, std::vector<double>>> irr_cache;
  auto irr_at = [&](int side) -> const std::vector<double>& {
    for (const auto& [s, v] : irr_cache)
      if (s == side) return v;
    const auto enc = encode_latent_grid(pool(latent, side));
    irr_cache.emplace_back(side, irregularity(enc, static_cast<std::size_t>(side) * side));
    return irr_cache.back().second;
  };

  const int n_tok = static_cast<int>(tokens.size());
  std::vector<CrossAttentionLayer> layers;
  std::vector<double> logits(n_tok);
  for (std::size_t li = 0; li < std::size(kLayers); ++li) {
    const auto& spec = kLayers[li];
    const auto& irr = irr_at(spec.side);
    CrossAttentionLayer layer{spec.stage, spec.side, spec.side, kHeads, n_tok, {}};
    const int positions = spec.side * spec.side;
    layer.probs.resize(static_cast<std::size_t>(kHeads) * positions * n_tok);
    for (int h = 0; h < kHeads; ++h) {
      const std::uint64_t key = tap_key(seed_, static_cast<int>(li), h);
      std::vector<double> base(n_tok);
      for (int t = 0; t < n_tok; ++t) {
        base[t] = tokens[t].special ? 2.5 : 0.5 + 0.25 * (hash_unit(key ^ fnv1a64(tokens[t].text)) + 1.0);
      }
      for (int p = 0; p < positions; ++p) {
        for (int t = 0; t < n_tok; ++t) logits[t] = base[t];
        for (int t : state) logits[t] = -1.0 + 6.0 * irr[p] + 0.3 * base[t];
        const double peak = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        for (double& l : logits) {
          l = std::exp(l - peak);
          total += l;
        }
        float* dst = layer.probs.data() + (static_cast<std::size_t>(h) * positions + p) * n_tok;
        for (int t = 0; t < n_tok; ++t) dst[t] = static_cast<float>(logits[t] / total);
      }
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

ScoreMap MockDiffusionBackend::do_cross_attention(const CrossAttentionRequest& request,
                                                  std::span<const int> state_tokens) {
  const auto layers = attention_layers(*request.image, request.prompt, request.timestep);
  return aggregate_cross_attention(layers, state_tokens, request.layer_selection, kCommonSide);
}

std::vector<FeatureGrid> MockDiffusionBackend::do_decoder_features(const Tensor3& image, const std::string& prompt,
                                                                   std::span<const TimestepBlock> pairs) {
  std::vector<FeatureGrid> out;
  out.reserve(pairs.size());
  std::vector<std::pair<int, Tensor3>> latents;
  for (const auto& pair : pairs) {
    const Tensor3* latent = nullptr;
    for (const auto& [t, l] : latents)
      if (t == pair.timestep) latent = &l;
    if (latent == nullptr) {
      latents.emplace_back(pair.timestep, denoised_latent(image, pair.timestep));
      latent = &latents.back().second;
    }
    const int side = decoder_side(pair.block);
    const auto enc = encode_latent_grid(pool(*latent, side));
    float hash[kMockHashChannels];
    hash_channels(tap_key(seed_ ^ fnv1a64(prompt), pair.timestep, pair.block), hash);
    std::vector<float> data;
    data.reserve(static_cast<std::size_t>(side) * side * kMockFeatureDim);
    for (int i = 0; i < side * side; ++i) {
      data.insert(data.end(), enc.begin() + static_cast<std::ptrdiff_t>(i) * kMockStatChannels,
                  enc.begin() + static_cast<std::ptrdiff_t>(i + 1) * kMockStatChannels);
      data.insert(data.end(), hash, hash + kMockHashChannels);
    }
    out.emplace_back(side, side, kMockFeatureDim, SourceTag::diffusion(pair.timestep, pair.block), std::move(data));
  }
  return out;
}

}  // namespace clipfusion
