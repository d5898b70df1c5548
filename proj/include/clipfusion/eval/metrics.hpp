#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clipfusion/core/score_map.hpp"

namespace clipfusion {

// Binary ground truth, row-major, nonzero = anomalous.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t size() const noexcept { return pixels.size(); }
};

// Probability that a random positive outscores a random negative, ties
// counting one half. Throws UndefinedMetric unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision: sum over distinct thresholds of (recall step) x precision.
// Throws UndefinedMetric without positives.
double aupr(std::span<const double> scores, std::span<const int> labels);

// AUROC over all pixels of all maps, pooled.
double pixel_auroc(std::span<const ScoreMap> maps, std::span<const BinaryMask> masks);

// 8-connected components of a mask. Returns labels (0 = background, 1..n).
std::vector<int> label_regions(const BinaryMask& mask, int& region_count);

struct AuproOptions {
  double fpr_limit = 0.3;
  // 0 sweeps every distinct score; otherwise at most this many thresholds
  // taken at evenly spaced score quantiles.
  std::size_t max_thresholds = 0;
};

// Area under the per-region-overlap vs. false-positive-rate curve on
// [0, fpr_limit], by the trapezoid rule with linear interpolation at the
// limit, divided by fpr_limit. Each threshold t classifies score >= t as
// anomalous; PRO is the mean over all ground-truth regions of the fraction of
// the region recovered; FPR is taken over all normal pixels.
double aupro(std::span<const ScoreMap> maps, std::span<const BinaryMask> masks, const AuproOptions& options = {});

// Integrates a monotone (fpr, pro) curve starting at (0, 0) as above.
double integrate_pro_curve(std::span<const double> fpr, std::span<const double> pro, double fpr_limit);

}  // namespace clipfusion
