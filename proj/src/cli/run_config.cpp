#include "clipfusion/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "clipfusion/backends/factory.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw UsageError("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw UsageError("expected an integer, got '" + s + "'");
  return v;
}

}  // namespace

std::string run_label(int shots, std::uint64_t seed) {
  if (shots == 0) return "shot0";
  return "shot" + std::to_string(shots) + "_seed" + std::to_string(seed);
}

std::vector<TimestepBlock> parse_diff_pairs(const std::string& text) {
  std::vector<TimestepBlock> out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw UsageError("diffusion pair must look like t:b, got '" + item + "'");
    out.push_back({to_int(parts[0]), to_int(parts[1])});
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) out.push_back(to_int(item));
  return out;
}

std::vector<std::string> parse_word_list(const std::string& text) { return split(text, ','); }

LayerSelection parse_layer_selection(const std::string& text) {
  if (text == "no_bottleneck" || text == "encoder_and_decoder_no_bottleneck") {
    return LayerSelection::kEncoderAndDecoderNoBottleneck;
  }
  if (text == "decoder_only") return LayerSelection::kDecoderOnly;
  if (text == "all") return LayerSelection::kAll;
  throw UsageError("unknown layer selection '" + text + "'");
}

void RunConfig::validate() const {
  if (shots < 0) throw UsageError("--shots must be >= 0");
  if (seeds.empty()) throw UsageError("at least one seed is required");
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw UsageError("fpr limit must lie in (0, 1]");
  try {
    scoring.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

void RunConfig::set_backend(const std::string& backend) {
  if (backend == "mock") {
    mode = DetectorMode::kFusion;
    clip_model = kMockModelId;
    diffusion_model = kMockModelId;
    return;
  }
  mode = parse_detector_mode(backend);
}

void RunConfig::apply_json(const nlohmann::json& c) {
  static const std::set<std::string> kKnown = {
      "dataset_root", "layout",      "category",    "shots",          "seeds",     "backend",
      "clip_model",   "diffusion_model", "alpha_seg", "alpha_cls",    "states",    "diff_pairs",
      "clip_blocks",  "ca_timestep", "temperature", "smoothing_sigma", "layer_selection", "prompts",
      "out",          "jobs",        "heatmaps",    "fpr_limit"};
  if (!c.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, _] : c.items()) {
    if (!kKnown.count(key)) throw UsageError("unknown config key '" + key + "'");
  }
  try {
    if (c.contains("dataset_root")) dataset_root = c["dataset_root"].get<std::string>();
    if (c.contains("layout")) layout = parse_layout(c["layout"].get<std::string>());
    if (c.contains("category")) category = c["category"].get<std::string>();
    if (c.contains("shots")) shots = c["shots"].get<int>();
    if (c.contains("seeds")) seeds = c["seeds"].get<std::vector<std::uint64_t>>();
    if (c.contains("backend")) set_backend(c["backend"].get<std::string>());
    if (c.contains("clip_model")) clip_model = c["clip_model"].get<std::string>();
    if (c.contains("diffusion_model")) diffusion_model = c["diffusion_model"].get<std::string>();
    if (c.contains("alpha_seg")) scoring.fusion.alpha_seg = c["alpha_seg"].get<double>();
    if (c.contains("alpha_cls")) scoring.fusion.alpha_cls = c["alpha_cls"].get<double>();
    if (c.contains("states")) scoring.states = c["states"].get<std::vector<std::string>>();
    if (c.contains("diff_pairs")) {
      scoring.diff_pairs.clear();
      for (const auto& p : c["diff_pairs"]) scoring.diff_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    }
    if (c.contains("clip_blocks")) scoring.clip_blocks = c["clip_blocks"].get<std::vector<int>>();
    if (c.contains("ca_timestep")) scoring.cross_attention_timestep = c["ca_timestep"].get<int>();
    if (c.contains("temperature")) scoring.temperature = c["temperature"].get<double>();
    if (c.contains("smoothing_sigma")) scoring.smoothing_sigma = c["smoothing_sigma"].get<double>();
    if (c.contains("layer_selection")) scoring.layer_selection = parse_layer_selection(c["layer_selection"].get<std::string>());
    if (c.contains("prompts")) prompts.merge(PromptCatalog::from_json_text(c["prompts"].dump()));
    if (c.contains("out")) out = c["out"].get<std::string>();
    if (c.contains("jobs")) jobs = c["jobs"].get<int>();
    if (c.contains("heatmaps")) heatmaps = c["heatmaps"].get<bool>();
    if (c.contains("fpr_limit")) fpr_limit = c["fpr_limit"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

void RunConfig::apply_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  nlohmann::json c;
  try {
    in >> c;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  apply_json(c);
}

std::vector<std::string> RunConfig::selected_categories(const DatasetIndex& index) const {
  if (category == "all") return index.categories;
  std::vector<std::string> out;
  for (const auto& c : split(category, ',')) {
    index.category(c);
    out.push_back(c);
  }
  return out;
}

}  // namespace clipfusion
