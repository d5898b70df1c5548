#pragma once

#include <string>
#include <vector>

#include "clipfusion/backends/backend.hpp"
#include "clipfusion/core/types.hpp"
#include "clipfusion/data/image.hpp"
#include "clipfusion/memory/reference_bank.hpp"
#include "clipfusion/prompts/prompts.hpp"
#include "clipfusion/scoring/scoring.hpp"

namespace clipfusion {

enum class DetectorMode { kFusion, kClipOnly, kDiffusionOnly };

const char* to_string(DetectorMode mode);
DetectorMode parse_detector_mode(const std::string& text);

// Orchestrates the segmentation and classification pipelines for one
// category. Text embeddings and rendered prompts are computed once.
//
// Fusion mode needs both backends; single-model modes need only theirs and
// fuse with alpha fixed to 1 (CLIP) or 0 (diffusion) for both tasks.
class Detector {
 public:
  Detector(VisionLanguageBackend* clip, DiffusionBackend* diffusion, PromptSpec prompts, ScoringConfig config,
           DetectorMode mode = DetectorMode::kFusion);

  // Zero-shot when `bank` is null; otherwise the vision-guided components are
  // added. Maps are produced at the input image's resolution.
  DetectionResult detect(const Image& image, const std::string& image_id, const ReferenceBank* bank) const;

  // Reference bank for this detector's taps and prompts.
  ReferenceBank build_reference_bank(std::span<const Image> references, const std::string& category,
                                     std::uint64_t seed) const;

  const ScoringConfig& config() const noexcept { return config_; }
  DetectorMode mode() const noexcept { return mode_; }

 private:
  bool uses_clip() const { return mode_ != DetectorMode::kDiffusionOnly; }
  bool uses_diffusion() const { return mode_ != DetectorMode::kClipOnly; }

  VisionLanguageBackend* clip_;
  DiffusionBackend* diffusion_;
  PromptSpec prompts_;
  ScoringConfig config_;
  DetectorMode mode_;
  std::vector<double> text_normal_;
  std::vector<double> text_abnormal_;
  DiffusionPrompts diffusion_prompts_;
};

// One-shot convenience wrapper around Detector.
DetectionResult detect_image(const Image& image, const std::string& image_id, const ScoringConfig& config,
                             const PromptSpec& prompts, const ReferenceBank* bank, VisionLanguageBackend* clip,
                             DiffusionBackend* diffusion, DetectorMode mode = DetectorMode::kFusion);

}  // namespace clipfusion
