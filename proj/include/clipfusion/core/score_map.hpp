#pragma once

#include <span>
#include <vector>

namespace clipfusion {

// Dense H x W grid of per-pixel anomaly evidence, row-major.
//
// Values are immutable once constructed; every entry is finite and, when the
// map carries the normalized flag, lies in [0, 1].
class ScoreMap {
 public:
  ScoreMap(int height, int width, std::vector<double> values, bool normalized = false);

  static ScoreMap filled(int height, int width, double value);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool normalized() const noexcept { return normalized_; }

  double at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const noexcept { return values_; }

  double min() const;
  double max() const;

  bool same_shape(const ScoreMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ScoreMap&, const ScoreMap&) = default;

 private:
  int height_;
  int width_;
  std::vector<double> values_;
  bool normalized_;
};

}  // namespace clipfusion
