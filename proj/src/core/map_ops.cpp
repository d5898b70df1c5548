#include "clipfusion/core/map_ops.hpp"

#include <algorithm>

namespace clipfusion {

ScoreMap minmax_normalize(const ScoreMap& map) {
  const double lo = map.min();
  const double hi = map.max();
  std::vector<double> out(map.size(), 0.0);
  if (hi > lo) {
    const double range = hi - lo;
    auto in = map.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (in[i] - lo) / range;
  }
  return ScoreMap(map.height(), map.width(), std::move(out), true);
}

namespace {

struct Tap {
  int i0;
  int i1;
  double frac;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    if (s < 0.0) s = 0.0;
    int i0 = static_cast<int>(s);
    if (i0 > src - 1) i0 = src - 1;
    const int i1 = std::min(i0 + 1, src - 1);
    taps[d] = {i0, i1, s - i0};
  }
  return taps;
}

}  // namespace

ScoreMap resize_map(const ScoreMap& map, int target_h, int target_w) {
  if (target_h < 1 || target_w < 1) {
    throw InvalidArgument("resize target must be positive, got " + std::to_string(target_h) +
                          "x" + std::to_string(target_w));
  }
  if (target_h == map.height() && target_w == map.width()) return map;

  const auto ty = bilinear_taps(map.height(), target_h);
  const auto tx = bilinear_taps(map.width(), target_w);
  std::vector<double> out(static_cast<std::size_t>(target_h) * target_w);
  for (int y = 0; y < target_h; ++y) {
    for (int x = 0; x < target_w; ++x) {
      const double v00 = map.at(ty[y].i0, tx[x].i0);
      const double v01 = map.at(ty[y].i0, tx[x].i1);
      const double v10 = map.at(ty[y].i1, tx[x].i0);
      const double v11 = map.at(ty[y].i1, tx[x].i1);
      const double top = v00 + tx[x].frac * (v01 - v00);
      const double bottom = v10 + tx[x].frac * (v11 - v10);
      out[static_cast<std::size_t>(y) * target_w + x] = top + ty[y].frac * (bottom - top);
    }
  }
  return ScoreMap(target_h, target_w, std::move(out));
}

ScoreMap mean_maps(std::span<const ScoreMap> maps) {
  if (maps.empty()) throw InvalidArgument("mean of an empty set of maps");
  std::vector<double> acc(maps.front().size(), 0.0);
  for (const auto& m : maps) {
    if (!m.same_shape(maps.front())) throw InvalidArgument("mean_maps: shape mismatch");
    auto v = m.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  const double n = static_cast<double>(maps.size());
  for (double& a : acc) a /= n;
  return ScoreMap(maps.front().height(), maps.front().width(), std::move(acc));
}

ScoreMap gaussian_smooth(const ScoreMap& map, double sigma) {
  if (!(sigma > 0.0)) return map;
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  auto reflect = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  const int h = map.height(), w = map.width();
  std::vector<double> tmp(map.size()), out(map.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * map.at(y, reflect(x + k, w));
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp[static_cast<std::size_t>(reflect(y + k, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return ScoreMap(h, w, std::move(out));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InvalidArgument("cosine similarity: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw InvalidArgument("cosine similarity of a zero vector");
  return dot / std::sqrt(uu * vv);
}

}  // namespace clipfusion
