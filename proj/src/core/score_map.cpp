#include "clipfusion/core/score_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clipfusion/error.hpp"

namespace clipfusion {

ScoreMap::ScoreMap(int height, int width, std::vector<double> values, bool normalized)
    : height_(height), width_(width), values_(std::move(values)), normalized_(normalized) {
  if (height < 1 || width < 1) {
    throw InvalidArgument("score map dimensions must be positive, got " + std::to_string(height) +
                          "x" + std::to_string(width));
  }
  if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw InvalidArgument("score map value count does not match its dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("score map contains a non-finite value");
    if (normalized_ && (v < 0.0 || v > 1.0)) {
      throw InvalidArgument("normalized score map has a value outside [0, 1]");
    }
  }
}

ScoreMap ScoreMap::filled(int height, int width, double value) {
  if (height < 1 || width < 1) throw InvalidArgument("score map dimensions must be positive");
  return ScoreMap(height, width,
                  std::vector<double>(static_cast<std::size_t>(height) * width, value));
}

double ScoreMap::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScoreMap::max() const { return *std::max_element(values_.begin(), values_.end()); }

}  // namespace clipfusion
