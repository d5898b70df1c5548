#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clipfusion/backends/backend.hpp"
#include "clipfusion/core/feature_grid.hpp"
#include "clipfusion/core/score_map.hpp"
#include "clipfusion/core/types.hpp"
#include "clipfusion/memory/reference_bank.hpp"
#include "clipfusion/prompts/prompts.hpp"

namespace clipfusion {

struct ScoringConfig {
  FusionWeights fusion;
  std::vector<int> clip_blocks = {6, 11};
  std::vector<TimestepBlock> diff_pairs = default_timestep_blocks();
  std::vector<std::string> states = default_states();
  int cross_attention_timestep = 401;
  double temperature = 0.01;
  LayerSelection layer_selection = LayerSelection::kEncoderAndDecoderNoBottleneck;
  double smoothing_sigma = 0.0;  // Gaussian blur of the fused map, in output pixels; 0 = off

  void validate() const;
};

// A component map before and after per-image min-max normalization. `raw` is
// already resized to the output resolution.
struct ComponentMap {
  ScoreMap raw;
  ScoreMap normalized;
};

// Abnormal-class probability of a two-way softmax over cosine similarities
// divided by the temperature.
double abnormal_probability(double sim_normal, double sim_abnormal, double temperature);

ComponentMap clip_language_map(const FeatureGrid& patches, std::span<const double> text_normal,
                               std::span<const double> text_abnormal, double temperature, int out_h, int out_w);

// Mean over prompts of each prompt's cross-attention map upsampled to the
// output size. Duplicate prompts are kept (they weigh in twice).
ComponentMap diff_language_map(const Tensor3& diffusion_input, std::span<const RenderedPrompt> prompts,
                               DiffusionBackend& backend, int timestep, LayerSelection selection, int out_h,
                               int out_w);

// Mean over tags of the per-cell nearest-reference distance maps.
ComponentMap vision_map(std::span<const FeatureGrid> query_grids, const ReferenceBank& bank, int out_h, int out_w);

struct MapComponents {
  std::optional<ScoreMap> clip_language;
  std::optional<ScoreMap> clip_vision;
  std::optional<ScoreMap> diff_language;
  std::optional<ScoreMap> diff_vision;
};

// alpha * (CLIP terms) + (1 - alpha) * (diffusion terms); absent terms count
// as zero and zero-shot ignores the vision terms. Needs at least one map.
ComponentMap fuse_maps(const MapComponents& maps, double alpha, bool zero_shot);

double clip_language_score(std::span<const double> global_embedding, std::span<const double> text_normal,
                           std::span<const double> text_abnormal, double temperature);

// 1 - median / max; the median is the lower-middle order statistic. An
// all-zero map scores 0.
double diff_language_score(const ScoreMap& map);

double vision_score(const ScoreMap& map);

struct ScoreComponents {
  std::optional<double> clip_language;
  std::optional<double> clip_vision;
  std::optional<double> diff_language;
  std::optional<double> diff_vision;
};

double fuse_scores(const ScoreComponents& scores, double alpha, bool zero_shot);

}  // namespace clipfusion
