#include "clipfusion/scoring/detector.hpp"

#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/data/preprocess.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

const char* to_string(DetectorMode mode) {
  switch (mode) {
    case DetectorMode::kFusion:
      return "fusion";
    case DetectorMode::kClipOnly:
      return "clip_only";
    case DetectorMode::kDiffusionOnly:
      return "diffusion_only";
  }
  return "fusion";
}

DetectorMode parse_detector_mode(const std::string& text) {
  if (text == "fusion") return DetectorMode::kFusion;
  if (text == "clip_only") return DetectorMode::kClipOnly;
  if (text == "diffusion_only") return DetectorMode::kDiffusionOnly;
  throw UsageError("unknown detector mode '" + text + "'");
}

namespace {

// Re-raises a component failure with the component name prefixed.
template <typename F>
auto in_component(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("[") + name + "] " + e.what());
  }
}

}  // namespace

Detector::Detector(VisionLanguageBackend* clip, DiffusionBackend* diffusion, PromptSpec prompts,
                   ScoringConfig config, DetectorMode mode)
    : clip_(clip), diffusion_(diffusion), prompts_(std::move(prompts)), config_(std::move(config)), mode_(mode) {
  config_.validate();
  prompts_.validate();
  if (mode_ == DetectorMode::kClipOnly) config_.fusion = {1.0, 1.0};
  if (mode_ == DetectorMode::kDiffusionOnly) config_.fusion = {0.0, 0.0};
  if (uses_clip() && clip_ == nullptr) throw InvalidArgument("detector mode needs a vision-language backend");
  if (uses_diffusion() && diffusion_ == nullptr) throw InvalidArgument("detector mode needs a diffusion backend");

  if (uses_clip()) {
    const auto [normal, abnormal] = render_clip_prompts(prompts_);
    text_normal_ = clip_->text_embedding(normal.text);
    text_abnormal_ = clip_->text_embedding(abnormal.text);
  }
  diffusion_prompts_ = render_diffusion_prompts(prompts_);
}

ReferenceBank Detector::build_reference_bank(std::span<const Image> references, const std::string& category,
                                             std::uint64_t seed) const {
  const std::vector<int> no_blocks;
  const std::vector<TimestepBlock> no_pairs;
  return build_bank(references, uses_clip() ? std::span<const int>(config_.clip_blocks) : no_blocks,
                    uses_diffusion() ? std::span<const TimestepBlock>(config_.diff_pairs) : no_pairs, clip_,
                    diffusion_, diffusion_prompts_.reference.text, category, seed);
}

DetectionResult Detector::detect(const Image& image, const std::string& image_id, const ReferenceBank* bank) const {
  const int out_h = image.height, out_w = image.width;
  const bool zero_shot = bank == nullptr;
  const bool clip_vision = !zero_shot && uses_clip() && !config_.clip_blocks.empty();
  const bool diff_vision = !zero_shot && uses_diffusion() && !config_.diff_pairs.empty();

  DetectionResult result;
  result.image_id = image_id;
  MapComponents maps;
  ScoreComponents scores;

  if (uses_clip()) {
    const Tensor3 input = preprocess_clip(image);
    in_component(kClipLanguage, [&] {
      const FeatureGrid patches = clip_->patch_embeddings(input);
      ComponentMap m = clip_language_map(patches, text_normal_, text_abnormal_, config_.temperature, out_h, out_w);
      scores.clip_language =
          clip_language_score(clip_->global_embedding(input), text_normal_, text_abnormal_, config_.temperature);
      maps.clip_language = m.normalized;
      result.component_maps.emplace(kClipLanguage, std::move(m.normalized));
      return 0;
    });
    if (clip_vision) {
      in_component(kClipVision, [&] {
        const auto grids = clip_->block_features(input, config_.clip_blocks);
        ComponentMap m = vision_map(grids, *bank, out_h, out_w);
        scores.clip_vision = vision_score(m.raw);
        maps.clip_vision = m.normalized;
        result.component_maps.emplace(kClipVision, std::move(m.normalized));
        return 0;
      });
    }
  }

  if (uses_diffusion()) {
    const Tensor3 input = preprocess_diffusion(image);
    in_component(kDiffLanguage, [&] {
      ComponentMap m = diff_language_map(input, diffusion_prompts_.queries, *diffusion_,
                                         config_.cross_attention_timestep, config_.layer_selection, out_h, out_w);
      scores.diff_language = diff_language_score(m.raw);
      maps.diff_language = m.normalized;
      result.component_maps.emplace(kDiffLanguage, std::move(m.normalized));
      return 0;
    });
    if (diff_vision) {
      in_component(kDiffVision, [&] {
        const auto grids = diffusion_->decoder_features(input, diffusion_prompts_.reference.text, config_.diff_pairs);
        ComponentMap m = vision_map(grids, *bank, out_h, out_w);
        scores.diff_vision = vision_score(m.raw);
        maps.diff_vision = m.normalized;
        result.component_maps.emplace(kDiffVision, std::move(m.normalized));
        return 0;
      });
    }
  }

  ComponentMap fused = fuse_maps(maps, config_.fusion.alpha_seg, zero_shot);
  result.fused_map = config_.smoothing_sigma > 0.0
                         ? minmax_normalize(gaussian_smooth(fused.raw, config_.smoothing_sigma))
                         : std::move(fused.normalized);

  auto record = [&](const char* name, const std::optional<double>& v) {
    if (v) result.component_scores[name] = *v;
  };
  record(kClipLanguage, scores.clip_language);
  record(kClipVision, scores.clip_vision);
  record(kDiffLanguage, scores.diff_language);
  record(kDiffVision, scores.diff_vision);
  result.fused_score = fuse_scores(scores, config_.fusion.alpha_cls, zero_shot);
  return result;
}

DetectionResult detect_image(const Image& image, const std::string& image_id, const ScoringConfig& config,
                             const PromptSpec& prompts, const ReferenceBank* bank, VisionLanguageBackend* clip,
                             DiffusionBackend* diffusion, DetectorMode mode) {
  return Detector(clip, diffusion, prompts, config, mode).detect(image, image_id, bank);
}

}  // namespace clipfusion
