#pragma once

// Brute-force reference implementations. They share no code with the library
// and favour the most literal reading of each definition over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// Counts over every (positive, negative) pair; returns twice the Mann-Whitney
// U statistic and the pair count, so the caller can compare exactly.
struct PairCount {
  long long twice_u = 0;
  long long pairs = 0;
  double auroc() const { return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pairs)); }
};

inline PairCount auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  PairCount c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++c.pairs;
      if (scores[i] > scores[j]) c.twice_u += 2;
      else if (scores[i] == scores[j]) c.twice_u += 1;
    }
  }
  return c;
}

// Connected components by breadth-first flood fill, 8-neighbourhood.
inline std::vector<std::vector<int>> regions_8(const std::vector<int>& mask, int h, int w) {
  std::vector<int> seen(mask.size(), 0);
  std::vector<std::vector<int>> regions;
  for (int start = 0; start < h * w; ++start) {
    if (!mask[start] || seen[start]) continue;
    std::vector<int> region;
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      region.push_back(p);
      const int y = p / w, x = p % w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          const int q = ny * w + nx;
          if (mask[q] && !seen[q]) {
            seen[q] = 1;
            queue.push_back(q);
          }
        }
      }
    }
    regions.push_back(region);
  }
  return regions;
}

struct MapMask {
  int h = 0, w = 0;
  std::vector<double> scores;
  std::vector<int> mask;
};

// For every distinct score t (descending), counts from scratch the normal
// pixels at or above t and, per region, the recovered fraction. The curve
// starts at (0, 0); the area up to `limit` uses trapezoids with linear
// interpolation at the limit, and is divided by the limit.
inline double aupro(const std::vector<MapMask>& items, double limit) {
  std::set<double, std::greater<double>> thresholds;
  long long normals = 0;
  for (const auto& it : items) {
    for (std::size_t p = 0; p < it.scores.size(); ++p) {
      thresholds.insert(it.scores[p]);
      if (!it.mask[p]) ++normals;
    }
  }
  std::vector<std::pair<double, double>> curve{{0.0, 0.0}};
  for (double t : thresholds) {
    long long fp = 0;
    double pro_sum = 0.0;
    int region_count = 0;
    for (const auto& it : items) {
      for (std::size_t p = 0; p < it.scores.size(); ++p) {
        if (!it.mask[p] && it.scores[p] >= t) ++fp;
      }
      for (const auto& region : regions_8(it.mask, it.h, it.w)) {
        int hit = 0;
        for (int p : region) hit += it.scores[p] >= t ? 1 : 0;
        pro_sum += static_cast<double>(hit) / static_cast<double>(region.size());
        ++region_count;
      }
    }
    curve.emplace_back(static_cast<double>(fp) / static_cast<double>(normals), pro_sum / region_count);
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    auto [x0, y0] = curve[i - 1];
    auto [x1, y1] = curve[i];
    if (x1 >= limit) {
      if (x1 > x0) area += 0.5 * (y0 + (y0 + (y1 - y0) * (limit - x0) / (x1 - x0))) * (limit - x0);
      return area / limit;
    }
    area += 0.5 * (y0 + y1) * (x1 - x0);
  }
  area += curve.back().second * (limit - curve.back().first);
  return area / limit;
}

// Average precision by literal definition: for each distinct threshold,
// precision at that cut times the recall gained.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  long long positives = 0;
  for (int l : labels) positives += l;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    long long tp = 0, selected = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++selected;
        tp += labels[i];
      }
    }
    const double recall = static_cast<double>(tp) / positives;
    ap += (recall - prev_recall) * static_cast<double>(tp) / selected;
    prev_recall = recall;
  }
  return ap;
}

// Bilinear sample of a source grid at output pixel (y, x), half-pixel centers,
// evaluated independently per output pixel.
inline double bilinear_at(const std::vector<double>& src, int sh, int sw, int th, int tw, int y, int x) {
  auto coord = [](int o, int s, int t) {
    double c = (o + 0.5) * static_cast<double>(s) / t - 0.5;
    return c < 0.0 ? 0.0 : c;
  };
  const double cy = coord(y, sh, th), cx = coord(x, sw, tw);
  const int y0 = std::min(static_cast<int>(std::floor(cy)), sh - 1);
  const int x0 = std::min(static_cast<int>(std::floor(cx)), sw - 1);
  const int y1 = std::min(y0 + 1, sh - 1), x1 = std::min(x0 + 1, sw - 1);
  const double fy = cy - y0, fx = cx - x0;
  auto v = [&](int yy, int xx) { return src[static_cast<std::size_t>(yy) * sw + xx]; };
  return (1 - fy) * ((1 - fx) * v(y0, x0) + fx * v(y0, x1)) + fy * ((1 - fx) * v(y1, x0) + fx * v(y1, x1));
}

// Minimum over the bank of (1 - cos) / 2, literal and unclamped-until-the-end.
inline double min_half_cos(const std::vector<std::vector<double>>& bank, const std::vector<double>& q) {
  double best = 1.0;
  for (const auto& r : bank) {
    double dot = 0, qq = 0, rr = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      dot += q[i] * r[i];
      qq += q[i] * q[i];
      rr += r[i] * r[i];
    }
    double d = 0.5 * (1.0 - dot / (std::sqrt(qq) * std::sqrt(rr)));
    d = std::clamp(d, 0.0, 1.0);
    best = std::min(best, d);
  }
  return best;
}

// Random 8x8-style instance with at least one region and one normal pixel.
// Scores are drawn from a small lattice so ties occur.
inline MapMask random_map_mask(std::mt19937_64& rng, int h, int w) {
  MapMask m;
  m.h = h;
  m.w = w;
  m.scores.resize(static_cast<std::size_t>(h) * w);
  m.mask.assign(m.scores.size(), 0);
  std::uniform_int_distribution<int> lattice(0, 15);
  std::uniform_int_distribution<int> blobs(1, 3);
  std::uniform_int_distribution<int> py(0, h - 1), px(0, w - 1), ext(0, 2);
  const int n = blobs(rng);
  for (int b = 0; b < n; ++b) {
    const int y0 = py(rng), x0 = px(rng), hh = ext(rng), ww = ext(rng);
    for (int y = y0; y <= std::min(h - 1, y0 + hh); ++y) {
      for (int x = x0; x <= std::min(w - 1, x0 + ww); ++x) m.mask[y * w + x] = 1;
    }
  }
  if (std::count(m.mask.begin(), m.mask.end(), 1) == static_cast<long>(m.mask.size())) m.mask[0] = 0;
  for (std::size_t p = 0; p < m.scores.size(); ++p) {
    m.scores[p] = lattice(rng) / 15.0 + (m.mask[p] ? 0.2 : 0.0);
  }
  return m;
}

}  // namespace oracle
