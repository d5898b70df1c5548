#include "clipfusion/backends/factory.hpp"

#include <cstdlib>

#include "clipfusion/backends/mock_backend.hpp"
#include "clipfusion/data/preprocess.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

std::filesystem::path model_cache_dir() {
  if (const char* env = std::getenv("CLIPFUSION_MODEL_CACHE"); env != nullptr && *env != '\0') return env;
  if (const char* home = std::getenv("HOME"); home != nullptr) {
    return std::filesystem::path(home) / ".cache" / "clipfusion";
  }
  return ".clipfusion-cache";
}

namespace {

[[noreturn]] void unavailable(const std::string& kind, const std::string& model_id) {
  throw BackendUnavailable("cannot load " + kind + " checkpoint '" + model_id + "' (cache: " +
                           model_cache_dir().string() +
                           "): this build has no neural inference runtime; use model id 'mock'");
}

}  // namespace

std::unique_ptr<VisionLanguageBackend> make_vision_language_backend(const std::string& model_id,
                                                                    double temperature,
                                                                    const std::string& device) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (model_id == kMockModelId) {
    return std::make_unique<MockVisionLanguageBackend>(
        BackendHandle{model_id, device, kClipResolution, temperature});
  }
  unavailable("vision-language", model_id);
}

std::unique_ptr<DiffusionBackend> make_diffusion_backend(const std::string& model_id, const std::string& device) {
  if (model_id == kMockModelId) {
    return std::make_unique<MockDiffusionBackend>(BackendHandle{model_id, device, kDiffusionResolution, 0.0});
  }
  unavailable("diffusion", model_id);
}

}  // namespace clipfusion
