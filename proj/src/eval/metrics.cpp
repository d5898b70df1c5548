#include "clipfusion/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

void check_pairs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_pairs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U, kept integral: each (pos, neg) win counts 2,
  // each tie 1.
  std::uint64_t negatives_below = 0, positives = 0, negatives = 0, twice_u = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? pos : neg)++;
      ++j;
    }
    twice_u += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    positives += pos;
    negatives += neg;
    i = j;
  }
  if (positives == 0 || negatives == 0) throw UndefinedMetric("AUROC needs both positive and negative samples");
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double aupr(std::span<const double> scores, std::span<const int> labels) {
  check_pairs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto total_pos = static_cast<std::uint64_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  if (total_pos == 0) throw UndefinedMetric("AUPR needs at least one positive sample");

  double ap = 0.0;
  std::uint64_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t new_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] != 0) ++new_tp;
      ++j;
    }
    tp += new_tp;
    seen += j - i;
    if (new_tp > 0) {
      ap += (static_cast<double>(new_tp) / total_pos) * (static_cast<double>(tp) / seen);
    }
    i = j;
  }
  return ap;
}

namespace {

void check_maps(std::span<const ScoreMap> maps, std::span<const BinaryMask> masks) {
  if (maps.size() != masks.size()) throw InvalidArgument("maps and masks differ in count");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].height() != masks[i].height || maps[i].width() != masks[i].width ||
        masks[i].pixels.size() != maps[i].size()) {
      throw InvalidArgument("map and mask shapes differ for item " + std::to_string(i));
    }
  }
}

}  // namespace

double pixel_auroc(std::span<const ScoreMap> maps, std::span<const BinaryMask> masks) {
  check_maps(maps, masks);
  std::size_t total = 0;
  for (const auto& m : maps) total += m.size();
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(total);
  labels.reserve(total);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    auto v = maps[i].values();
    scores.insert(scores.end(), v.begin(), v.end());
    for (auto p : masks[i].pixels) labels.push_back(p != 0 ? 1 : 0);
  }
  return auroc(scores, labels);
}

std::vector<int> label_regions(const BinaryMask& mask, int& region_count) {
  const int h = mask.height, w = mask.width;
  std::vector<int> labels(mask.pixels.size(), 0);
  region_count = 0;
  std::vector<int> stack;
  for (int start = 0; start < h * w; ++start) {
    if (mask.pixels[start] == 0 || labels[start] != 0) continue;
    labels[start] = ++region_count;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int y = p / w, x = p % w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          const int q = yy * w + xx;
          if (mask.pixels[q] != 0 && labels[q] == 0) {
            labels[q] = region_count;
            stack.push_back(q);
          }
        }
    }
  }
  return labels;
}

double integrate_pro_curve(std::span<const double> fpr, std::span<const double> pro, double fpr_limit) {
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) throw InvalidArgument("fpr_limit must lie in (0, 1]");
  double area = 0.0;
  double x0 = 0.0, y0 = 0.0;
  for (std::size_t i = 0; i < fpr.size(); ++i) {
    const double x1 = fpr[i], y1 = pro[i];
    if (x1 >= fpr_limit) {
      if (x1 > x0) {
        const double y_lim = y0 + (y1 - y0) * (fpr_limit - x0) / (x1 - x0);
        area += 0.5 * (y0 + y_lim) * (fpr_limit - x0);
      }
      return area / fpr_limit;
    }
    area += 0.5 * (y0 + y1) * (x1 - x0);
    x0 = x1;
    y0 = y1;
  }
  // Curve ended before the limit: extend flat.
  area += y0 * (fpr_limit - x0);
  return area / fpr_limit;
}

double aupro(std::span<const ScoreMap> maps, std::span<const BinaryMask> masks, const AuproOptions& options) {
  check_maps(maps, masks);
  if (!(options.fpr_limit > 0.0 && options.fpr_limit <= 1.0)) throw InvalidArgument("fpr_limit must lie in (0, 1]");

  // Pixel records: score and global region id (-1 for normal pixels).
  struct Pixel {
    double score;
    int region;
  };
  std::vector<Pixel> pixels;
  std::vector<std::uint64_t> region_sizes;
  std::uint64_t normal_count = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    int n = 0;
    const auto labels = label_regions(masks[i], n);
    const int offset = static_cast<int>(region_sizes.size());
    region_sizes.resize(region_sizes.size() + n, 0);
    auto v = maps[i].values();
    for (std::size_t p = 0; p < v.size(); ++p) {
      const int r = labels[p] == 0 ? -1 : offset + labels[p] - 1;
      if (r < 0) ++normal_count;
      else ++region_sizes[r];
      pixels.push_back({v[p], r});
    }
  }
  if (region_sizes.empty()) throw UndefinedMetric("AUPRO needs at least one anomalous region");
  if (normal_count == 0) throw UndefinedMetric("AUPRO needs normal pixels to measure false positives");

  std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) { return a.score > b.score; });

  std::vector<double> thresholds;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (i == 0 || pixels[i].score != pixels[i - 1].score) thresholds.push_back(pixels[i].score);
  }
  if (options.max_thresholds > 0 && thresholds.size() > options.max_thresholds) {
    std::vector<double> picked;
    const std::size_t n = options.max_thresholds;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t idx = n == 1 ? pixels.size() - 1 : k * (pixels.size() - 1) / (n - 1);
      const double t = pixels[idx].score;
      if (picked.empty() || t != picked.back()) picked.push_back(t);
    }
    thresholds = std::move(picked);
  }

  const double regions = static_cast<double>(region_sizes.size());
  std::vector<double> fpr, pro;
  std::uint64_t false_pos = 0;
  double overlap_sum = 0.0;
  std::size_t next = 0;
  for (double t : thresholds) {
    while (next < pixels.size() && pixels[next].score >= t) {
      const int r = pixels[next].region;
      if (r < 0) ++false_pos;
      else overlap_sum += 1.0 / static_cast<double>(region_sizes[r]);
      ++next;
    }
    fpr.push_back(static_cast<double>(false_pos) / normal_count);
    pro.push_back(overlap_sum / regions);
  }
  return integrate_pro_curve(fpr, pro, options.fpr_limit);
}

}  // namespace clipfusion
