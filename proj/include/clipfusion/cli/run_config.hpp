#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "clipfusion/data/dataset.hpp"
#include "clipfusion/prompts/prompts.hpp"
#include "clipfusion/scoring/detector.hpp"
#include "clipfusion/scoring/scoring.hpp"

namespace clipfusion {

struct RunConfig {
  std::filesystem::path dataset_root;
  DatasetLayout layout = DatasetLayout::kMvtec;
  std::string category = "all";
  int shots = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  DetectorMode mode = DetectorMode::kFusion;
  std::string clip_model = "ViT-B-16-plus-240";
  std::string diffusion_model = "stabilityai/stable-diffusion-2-inpainting";
  ScoringConfig scoring;
  PromptCatalog prompts = PromptCatalog::builtin();
  std::filesystem::path out = "clipfusion_out";
  int jobs = 0;  // 0 = one per hardware thread
  bool heatmaps = true;
  double fpr_limit = 0.3;

  // Throws UsageError on violated invariants.
  void validate() const;

  // Applies --backend semantics: fusion | clip_only | diffusion_only | mock.
  // "mock" keeps fusion mode and points both models at the mock backend.
  void set_backend(const std::string& backend);

  // Overlays keys present in a JSON config object. Unknown keys are rejected.
  void apply_json(const nlohmann::json& config);
  void apply_json_file(const std::filesystem::path& path);

  std::vector<std::string> selected_categories(const DatasetIndex& index) const;
};

// Run directory label: "shot0" for zero-shot, "shot<k>_seed<s>" otherwise.
std::string run_label(int shots, std::uint64_t seed);

std::vector<TimestepBlock> parse_diff_pairs(const std::string& text);  // "201:3,401:2"
std::vector<int> parse_int_list(const std::string& text);              // "6,11"
std::vector<std::string> parse_word_list(const std::string& text);     // "crack,hole"
LayerSelection parse_layer_selection(const std::string& text);

}  // namespace clipfusion
