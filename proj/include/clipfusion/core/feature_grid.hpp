#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clipfusion {

enum class ModelKind { kClip = 0, kDiffusion = 1 };

// Identifies where a feature grid was tapped: a CLIP encoder block, or a
// diffusion decoder block at a given timestep.
struct SourceTag {
  ModelKind model = ModelKind::kClip;
  int block = 0;
  std::optional<int> timestep;

  static SourceTag clip(int block);
  static SourceTag diffusion(int timestep, int block);

  // "clip/b6", "diffusion/t201/b3"
  std::string to_string() const;
  static SourceTag parse(const std::string& text);

  friend auto operator<=>(const SourceTag&, const SourceTag&) = default;
};

// Spatial grid of D-dimensional feature vectors. Every cell is finite and has
// strictly positive Euclidean norm, so cosine similarity is always defined.
class FeatureGrid {
 public:
  FeatureGrid(int height, int width, int dim, SourceTag tag, std::vector<float> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int dim() const noexcept { return dim_; }
  std::size_t cells() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  const SourceTag& tag() const noexcept { return tag_; }

  std::span<const float> cell(std::size_t index) const {
    return {data_.data() + index * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const float> cell(int y, int x) const {
    return cell(static_cast<std::size_t>(y) * width_ + x);
  }
  std::span<const float> data() const noexcept { return data_; }

 private:
  int height_;
  int width_;
  int dim_;
  SourceTag tag_;
  std::vector<float> data_;
};

}  // namespace clipfusion
