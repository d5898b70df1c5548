#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clipfusion/cli/run_config.hpp"
#include "clipfusion/data/synthetic.hpp"

namespace clipfusion {

// Output tree under RunConfig::out:
//   banks/<category>/shot<k>_seed<s>.bank, banks/manifest.json
//   results/<category>/<run>/results.jsonl, maps/*.f32|json, heatmaps/*.png
//   metrics/<category>/<run>.json, metrics/report.json, metrics/report.md
// where <run> is run_label(k, seed).

std::filesystem::path bank_path(const RunConfig& config, const std::string& category, std::uint64_t seed);
std::filesystem::path run_dir(const RunConfig& config, const std::string& category, std::uint64_t seed);

// Builds one reference bank per (category, seed). k = 0 is a usage error.
void cmd_build_bank(const RunConfig& config);

// Scores every test image per (category, seed). Few-shot runs read the banks
// written by cmd_build_bank; zero-shot runs once per category.
void cmd_detect(const RunConfig& config);

struct RunMetrics {
  std::string category;
  int shots = 0;
  std::uint64_t seed = 0;
  double auroc_image = 0.0;
  double aupr = 0.0;
  // Pixel metrics need ground-truth masks; absent otherwise.
  std::optional<double> auroc_pixel;
  std::optional<double> aupro;
  int n_images = 0;
};

nlohmann::json to_json(const RunMetrics& m);

// Per category: mean and population std over seeds. Overall: per-seed means
// over categories, then mean and std over seeds. Pixel metrics appear only
// when every contributing run has them.
nlohmann::json aggregate_report(const std::vector<RunMetrics>& runs, int shots);

// Markdown table of an aggregate report, values as percentages "mean±std".
std::string format_report(const nlohmann::json& report);

// Computes metrics for every result run found for the selected categories,
// writes per-run JSON and the aggregate report, and returns the runs in
// (category, seed) order.
std::vector<RunMetrics> cmd_evaluate(const RunConfig& config);

std::vector<std::string> cmd_make_synthetic(const std::filesystem::path& root, const SyntheticOptions& options);

}  // namespace clipfusion
