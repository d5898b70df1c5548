#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "clipfusion/core/score_map.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

// Rescales to [0, 1] with (x - min) / (max - min). A constant map carries no
// localized evidence and normalizes to all zeros.
ScoreMap minmax_normalize(const ScoreMap& map);

// Bilinear resampling with half-pixel centers (corners not aligned); source
// coordinates below zero clamp to the first row/column.
ScoreMap resize_map(const ScoreMap& map, int target_h, int target_w);

// Element-wise mean of equally shaped maps.
ScoreMap mean_maps(std::span<const ScoreMap> maps);

// Separable Gaussian blur with reflected borders; sigma <= 0 returns the input.
ScoreMap gaussian_smooth(const ScoreMap& map, double sigma);

// (1 - cos(u, v)) / 2, clamped to [0, 1]. Computed in double on the raw vectors.
template <typename T, typename U>
double half_cosine_distance(std::span<const T> u, std::span<const U> v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw InvalidArgument("cosine distance of a zero vector");
  // sqrt(uu * vv) keeps d(u, u) exactly 0.
  const double d = 0.5 * (1.0 - dot / std::sqrt(uu * vv));
  return d < 0.0 ? 0.0 : (d > 1.0 ? 1.0 : d);
}

inline double half_cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
  return half_cosine_distance(std::span<const double>(u), std::span<const double>(v));
}

// Plain cosine similarity; same preconditions as half_cosine_distance.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace clipfusion
