#include "clipfusion/core/feature_grid.hpp"

#include <cmath>
#include <regex>

#include "clipfusion/error.hpp"

namespace clipfusion {

SourceTag SourceTag::clip(int block) {
  if (block < 0) throw InvalidArgument("clip block index must be non-negative");
  return SourceTag{ModelKind::kClip, block, std::nullopt};
}

SourceTag SourceTag::diffusion(int timestep, int block) {
  if (block < 1 || block > 3) {
    throw InvalidArgument("diffusion decoder block must be in {1,2,3}, got " +
                          std::to_string(block));
  }
  if (timestep < 1 || timestep > 999) {
    throw InvalidArgument("diffusion timestep must be in [1, 999], got " +
                          std::to_string(timestep));
  }
  return SourceTag{ModelKind::kDiffusion, block, timestep};
}

std::string SourceTag::to_string() const {
  if (model == ModelKind::kClip) return "clip/b" + std::to_string(block);
  return "diffusion/t" + std::to_string(timestep.value_or(0)) + "/b" + std::to_string(block);
}

SourceTag SourceTag::parse(const std::string& text) {
  static const std::regex clip_re(R"(clip/b(\d+))");
  static const std::regex diff_re(R"(diffusion/t(\d+)/b(\d+))");
  std::smatch m;
  if (std::regex_match(text, m, clip_re)) return clip(std::stoi(m[1]));
  if (std::regex_match(text, m, diff_re)) return diffusion(std::stoi(m[1]), std::stoi(m[2]));
  throw FormatError("malformed source tag '" + text + "'");
}

FeatureGrid::FeatureGrid(int height, int width, int dim, SourceTag tag, std::vector<float> data)
    : height_(height), width_(width), dim_(dim), tag_(tag), data_(std::move(data)) {
  if (height < 1 || width < 1 || dim < 1) {
    throw InvalidArgument("feature grid dimensions must be positive");
  }
  if (data_.size() != cells() * static_cast<std::size_t>(dim)) {
    throw InvalidArgument("feature grid data size does not match H*W*D");
  }
  for (std::size_t c = 0; c < cells(); ++c) {
    double norm2 = 0.0;
    for (float v : cell(c)) {
      if (!std::isfinite(v)) throw InvalidArgument("feature grid contains a non-finite value");
      norm2 += static_cast<double>(v) * v;
    }
    if (!(norm2 > 0.0)) {
      throw InvalidArgument("feature grid cell " + std::to_string(c) + " has zero norm");
    }
  }
}

}  // namespace clipfusion
