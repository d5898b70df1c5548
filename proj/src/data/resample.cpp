#include "clipfusion/data/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

double bilinear_kernel(double x) {
  x = std::fabs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

double bicubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

struct AxisWeights {
  std::vector<int> start;
  std::vector<std::vector<double>> weights;
};

AxisWeights axis_weights(int in_len, int out_len, ResampleFilter filter, bool antialias) {
  const double support = filter == ResampleFilter::kBicubic ? 2.0 : 1.0;
  auto kernel = filter == ResampleFilter::kBicubic ? bicubic_kernel : bilinear_kernel;
  const double scale = static_cast<double>(in_len) / out_len;
  const double fscale = antialias ? std::max(scale, 1.0) : 1.0;
  const double reach = support * fscale;

  AxisWeights aw;
  aw.start.resize(out_len);
  aw.weights.resize(out_len);
  for (int i = 0; i < out_len; ++i) {
    const double center = (i + 0.5) * scale;
    const int lo = std::max(static_cast<int>(std::floor(center - reach + 0.5)), 0);
    const int hi = std::min(static_cast<int>(std::floor(center + reach + 0.5)), in_len);
    std::vector<double> w;
    double total = 0.0;
    for (int j = lo; j < hi; ++j) {
      const double v = kernel((j - center + 0.5) / fscale);
      w.push_back(v);
      total += v;
    }
    if (total != 0.0)
      for (double& v : w) v /= total;
    aw.start[i] = lo;
    aw.weights[i] = std::move(w);
  }
  return aw;
}

}  // namespace

Tensor3 resample(const Tensor3& in, int out_h, int out_w, ResampleFilter filter, bool antialias) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("resample target must be positive");
  if (out_h == in.height && out_w == in.width) return in;

  const auto wx = axis_weights(in.width, out_w, filter, antialias);
  const auto wy = axis_weights(in.height, out_h, filter, antialias);

  Tensor3 horiz(in.channels, in.height, out_w);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < out_w; ++x) {
        double acc = 0.0;
        const auto& w = wx.weights[x];
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * in.at(c, y, wx.start[x] + static_cast<int>(k));
        horiz.at(c, y, x) = static_cast<float>(acc);
      }

  Tensor3 out(in.channels, out_h, out_w);
  for (int c = 0; c < in.channels; ++c)
    for (int y = 0; y < out_h; ++y) {
      const auto& w = wy.weights[y];
      for (int x = 0; x < out_w; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * horiz.at(c, wy.start[y] + static_cast<int>(k), x);
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  return out;
}

}  // namespace clipfusion
