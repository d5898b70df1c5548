#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "clipfusion/cli/commands.hpp"
#include "clipfusion/error.hpp"

using namespace clipfusion;

namespace {

// Flags left unset keep the value from --config, which keeps the default.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> dataset_root;
  std::optional<std::string> layout;
  std::optional<std::string> category;
  std::optional<int> shots;
  std::optional<std::string> seeds;
  std::optional<std::string> backend;
  std::optional<double> alpha_seg;
  std::optional<double> alpha_cls;
  std::optional<std::string> states;
  std::optional<std::string> diff_pairs;
  std::optional<std::string> clip_blocks;
  std::optional<int> ca_timestep;
  std::optional<double> temperature;
  std::optional<double> smoothing_sigma;
  std::optional<std::string> layer_selection;
  std::optional<std::string> prompts;
  std::optional<std::string> out;
  std::optional<std::string> clip_model;
  std::optional<std::string> diffusion_model;
  std::optional<int> jobs;
  std::optional<double> fpr_limit;
  bool no_heatmaps = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; explicit flags override it");
  cmd->add_option("--dataset-root", f.dataset_root, "Dataset root directory");
  cmd->add_option("--layout", f.layout, "mvtec | visa");
  cmd->add_option("--category", f.category, "Category name, comma list, or 'all'");
  cmd->add_option("--shots", f.shots, "Reference images per category (0 = zero-shot)");
  cmd->add_option("--seeds", f.seeds, "Comma-separated sampling seeds");
  cmd->add_option("--backend", f.backend, "fusion | clip_only | diffusion_only | mock");
  cmd->add_option("--alpha-seg", f.alpha_seg, "CLIP weight for segmentation maps");
  cmd->add_option("--alpha-cls", f.alpha_cls, "CLIP weight for image scores");
  cmd->add_option("--states", f.states, "Comma-separated anomaly state words");
  cmd->add_option("--diff-pairs", f.diff_pairs, "Diffusion taps as t:b, comma-separated");
  cmd->add_option("--clip-blocks", f.clip_blocks, "Comma-separated CLIP block indices");
  cmd->add_option("--ca-timestep", f.ca_timestep, "Cross-attention timestep");
  cmd->add_option("--temperature", f.temperature, "Softmax temperature for text similarities");
  cmd->add_option("--smoothing-sigma", f.smoothing_sigma, "Gaussian blur of fused maps in pixels (0 = off)");
  cmd->add_option("--layer-selection", f.layer_selection, "no_bottleneck | decoder_only | all");
  cmd->add_option("--prompts", f.prompts, "JSON prompt catalog merged over the built-in one");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--clip-model", f.clip_model, "Vision-language model id ('mock' for the mock)");
  cmd->add_option("--diffusion-model", f.diffusion_model, "Diffusion model id ('mock' for the mock)");
  cmd->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("--fpr-limit", f.fpr_limit, "AUPRO false-positive-rate limit");
  cmd->add_flag("--no-heatmaps", f.no_heatmaps, "Skip heatmap PNGs");
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) c.apply_json_file(*f.config);
  if (f.dataset_root) c.dataset_root = *f.dataset_root;
  if (f.layout) c.layout = parse_layout(*f.layout);
  if (f.category) c.category = *f.category;
  if (f.shots) c.shots = *f.shots;
  if (f.seeds) {
    c.seeds.clear();
    for (int s : parse_int_list(*f.seeds)) {
      if (s < 0) throw UsageError("seeds must be non-negative");
      c.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (f.backend) c.set_backend(*f.backend);
  if (f.alpha_seg) c.scoring.fusion.alpha_seg = *f.alpha_seg;
  if (f.alpha_cls) c.scoring.fusion.alpha_cls = *f.alpha_cls;
  if (f.states) c.scoring.states = parse_word_list(*f.states);
  if (f.diff_pairs) c.scoring.diff_pairs = parse_diff_pairs(*f.diff_pairs);
  if (f.clip_blocks) c.scoring.clip_blocks = parse_int_list(*f.clip_blocks);
  if (f.ca_timestep) c.scoring.cross_attention_timestep = *f.ca_timestep;
  if (f.temperature) c.scoring.temperature = *f.temperature;
  if (f.smoothing_sigma) c.scoring.smoothing_sigma = *f.smoothing_sigma;
  if (f.layer_selection) c.scoring.layer_selection = parse_layer_selection(*f.layer_selection);
  if (f.prompts) c.prompts.merge(PromptCatalog::from_json_file(*f.prompts));
  if (f.out) c.out = *f.out;
  if (f.clip_model) c.clip_model = *f.clip_model;
  if (f.diffusion_model) c.diffusion_model = *f.diffusion_model;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.fpr_limit) c.fpr_limit = *f.fpr_limit;
  if (f.no_heatmaps) c.heatmaps = false;
  return c;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kLookup:
      return 2;
    case ErrorKind::kBackendUnavailable:
    case ErrorKind::kTokenAlignment:
      return 4;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot anomaly detection with vision-language and diffusion features"};
  app.require_subcommand(1);

  Flags bank_flags, detect_flags, eval_flags;
  auto* build_bank = app.add_subcommand("build-bank", "Extract reference banks for k-shot runs");
  add_run_flags(build_bank, bank_flags);
  auto* detect = app.add_subcommand("detect", "Score test images and write maps");
  add_run_flags(detect, detect_flags);
  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics over detection results");
  add_run_flags(evaluate, eval_flags);

  std::string synth_root;
  SyntheticOptions synth;
  auto* make_synth = app.add_subcommand("make-synthetic", "Write a small synthetic dataset with masks");
  make_synth->add_option("--out", synth_root, "Dataset root to create")->required();
  make_synth->add_option("--categories", synth.categories, "Number of categories");
  make_synth->add_option("--test-images", synth.test_images, "Test images per category");
  make_synth->add_option("--train-images", synth.train_images, "Training normals per category");
  make_synth->add_option("--size", synth.image_size, "Image side in pixels");
  make_synth->add_option("--seed", synth.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build_bank) {
      cmd_build_bank(resolve(bank_flags));
    } else if (*detect) {
      cmd_detect(resolve(detect_flags));
    } else if (*evaluate) {
      cmd_evaluate(resolve(eval_flags));
    } else if (*make_synth) {
      cmd_make_synthetic(synth_root, synth);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
