#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "clipfusion/backends/backend.hpp"

namespace clipfusion {

inline constexpr const char* kMockModelId = "mock";
inline constexpr const char* kDefaultClipModelId = "ViT-B-16-plus-240";
inline constexpr const char* kDefaultDiffusionModelId = "stabilityai/stable-diffusion-2-inpainting";

// Weight cache directory: $CLIPFUSION_MODEL_CACHE, else ~/.cache/clipfusion.
std::filesystem::path model_cache_dir();

// "mock" yields the deterministic mock. Any other id needs an inference
// runtime this build does not link, and throws BackendUnavailable.
std::unique_ptr<VisionLanguageBackend> make_vision_language_backend(const std::string& model_id,
                                                                    double temperature = 0.01,
                                                                    const std::string& device = "cpu");
std::unique_ptr<DiffusionBackend> make_diffusion_backend(const std::string& model_id,
                                                         const std::string& device = "cpu");

}  // namespace clipfusion
