#pragma once

#include <map>
#include <string>

#include "clipfusion/core/score_map.hpp"

namespace clipfusion {

// Component names used in DetectionResult maps and JSON output.
inline constexpr const char* kClipLanguage = "CLIP_L";
inline constexpr const char* kClipVision = "CLIP_V";
inline constexpr const char* kDiffLanguage = "Diff_L";
inline constexpr const char* kDiffVision = "Diff_V";

// alpha weighs the CLIP terms, (1 - alpha) the diffusion terms.
struct FusionWeights {
  double alpha_seg = 0.25;
  double alpha_cls = 0.75;

  void validate() const;
};

struct DetectionResult {
  std::string image_id;
  std::map<std::string, ScoreMap> component_maps;  // normalized, at output size
  ScoreMap fused_map = ScoreMap::filled(1, 1, 0.0);
  std::map<std::string, double> component_scores;
  double fused_score = 0.0;
};

}  // namespace clipfusion
