#include "clipfusion/scoring/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

void ScoringConfig::validate() const {
  fusion.validate();
  validate_states(states);
  for (const auto& p : diff_pairs) {
    if (p.block == 0) throw InvalidArgument("decoder block 0 is excluded from the timestep-block pairs");
    SourceTag::diffusion(p.timestep, p.block);
  }
  for (int b : clip_blocks)
    if (b < 0) throw InvalidArgument("CLIP block indices must be non-negative");
  if (cross_attention_timestep < 1 || cross_attention_timestep > 999) {
    throw InvalidArgument("cross-attention timestep must be in [1, 999]");
  }
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (smoothing_sigma < 0.0) throw InvalidArgument("smoothing sigma must be non-negative");
}

double abnormal_probability(double sim_normal, double sim_abnormal, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  // exp(a/t) / (exp(a/t) + exp(n/t)) written as a logistic for stability.
  const double z = (sim_abnormal - sim_normal) / temperature;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ComponentMap clip_language_map(const FeatureGrid& patches, std::span<const double> text_normal,
                               std::span<const double> text_abnormal, double temperature, int out_h, int out_w) {
  if (static_cast<int>(text_normal.size()) != patches.dim() || static_cast<int>(text_abnormal.size()) != patches.dim()) {
    throw InvalidArgument("patch embedding and text embedding dimensions differ");
  }
  std::vector<double> cell(patches.dim());
  std::vector<double> probs(patches.cells());
  for (std::size_t c = 0; c < patches.cells(); ++c) {
    auto v = patches.cell(c);
    std::copy(v.begin(), v.end(), cell.begin());
    probs[c] = abnormal_probability(cosine_similarity(cell, text_normal), cosine_similarity(cell, text_abnormal),
                                    temperature);
  }
  ScoreMap raw = resize_map(ScoreMap(patches.height(), patches.width(), std::move(probs)), out_h, out_w);
  ScoreMap norm = minmax_normalize(raw);
  return {std::move(raw), std::move(norm)};
}

ComponentMap diff_language_map(const Tensor3& diffusion_input, std::span<const RenderedPrompt> prompts,
                               DiffusionBackend& backend, int timestep, LayerSelection selection, int out_h,
                               int out_w) {
  if (prompts.empty()) throw InvalidArgument("diff_language_map needs at least one state prompt");
  std::vector<ScoreMap> maps;
  maps.reserve(prompts.size());
  for (const auto& p : prompts) {
    CrossAttentionRequest req{&diffusion_input, p, timestep, selection};
    maps.push_back(resize_map(backend.cross_attention(req), out_h, out_w));
  }
  ScoreMap raw = mean_maps(maps);
  ScoreMap norm = minmax_normalize(raw);
  return {std::move(raw), std::move(norm)};
}

ComponentMap vision_map(std::span<const FeatureGrid> query_grids, const ReferenceBank& bank, int out_h, int out_w) {
  if (query_grids.empty()) throw InvalidArgument("vision_map needs at least one query grid");
  std::vector<ScoreMap> maps;
  maps.reserve(query_grids.size());
  for (const auto& g : query_grids) {
    maps.push_back(resize_map(ScoreMap(g.height(), g.width(), bank.min_distances(g)), out_h, out_w));
  }
  ScoreMap raw = mean_maps(maps);
  ScoreMap norm = minmax_normalize(raw);
  return {std::move(raw), std::move(norm)};
}

ComponentMap fuse_maps(const MapComponents& maps, double alpha, bool zero_shot) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  std::vector<const ScoreMap*> clip_terms, diff_terms;
  if (maps.clip_language) clip_terms.push_back(&*maps.clip_language);
  if (!zero_shot && maps.clip_vision) clip_terms.push_back(&*maps.clip_vision);
  if (maps.diff_language) diff_terms.push_back(&*maps.diff_language);
  if (!zero_shot && maps.diff_vision) diff_terms.push_back(&*maps.diff_vision);
  if (clip_terms.empty() && diff_terms.empty()) throw InvalidArgument("fuse_maps: no component maps given");

  const ScoreMap& ref = clip_terms.empty() ? *diff_terms.front() : *clip_terms.front();
  auto sum = [&](const std::vector<const ScoreMap*>& terms) {
    std::vector<double> acc(ref.size(), 0.0);
    for (const ScoreMap* m : terms) {
      if (!m->same_shape(ref)) throw InvalidArgument("fuse_maps: component maps differ in shape");
      auto v = m->values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    }
    return acc;
  };
  const auto clip_sum = sum(clip_terms);
  const auto diff_sum = sum(diff_terms);
  std::vector<double> fused(ref.size());
  for (std::size_t i = 0; i < fused.size(); ++i) fused[i] = alpha * clip_sum[i] + (1.0 - alpha) * diff_sum[i];
  ScoreMap raw(ref.height(), ref.width(), std::move(fused));
  ScoreMap norm = minmax_normalize(raw);
  return {std::move(raw), std::move(norm)};
}

double clip_language_score(std::span<const double> global_embedding, std::span<const double> text_normal,
                           std::span<const double> text_abnormal, double temperature) {
  if (global_embedding.size() != text_normal.size() || global_embedding.size() != text_abnormal.size()) {
    throw InvalidArgument("global embedding and text embedding dimensions differ");
  }
  return abnormal_probability(cosine_similarity(global_embedding, text_normal),
                              cosine_similarity(global_embedding, text_abnormal), temperature);
}

double diff_language_score(const ScoreMap& map) {
  const double peak = map.max();
  if (peak <= 0.0) return 0.0;
  std::vector<double> v(map.values().begin(), map.values().end());
  auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return std::clamp(1.0 - *mid / peak, 0.0, 1.0);
}

double vision_score(const ScoreMap& map) { return map.max(); }

double fuse_scores(const ScoreComponents& s, double alpha, bool zero_shot) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  double clip = s.clip_language.value_or(0.0);
  double diff = s.diff_language.value_or(0.0);
  if (!zero_shot) {
    clip += s.clip_vision.value_or(0.0);
    diff += s.diff_vision.value_or(0.0);
  }
  const double out = alpha * clip + (1.0 - alpha) * diff;
  if (!std::isfinite(out)) throw InvalidArgument("fused score is not finite");
  return out;
}

}  // namespace clipfusion
