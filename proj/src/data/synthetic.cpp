#include "clipfusion/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "clipfusion/data/png_io.hpp"
#include "clipfusion/data/rng.hpp"
#include "clipfusion/error.hpp"

namespace fs = std::filesystem;

namespace clipfusion {

namespace {

constexpr const char* kNames[] = {"fabric", "panel", "plate", "board", "sheet", "tile", "mesh", "foil"};
constexpr const char* kDefects[] = {"square", "blob", "scratch"};
constexpr double kMinFraction = 0.005;
constexpr double kMaxFraction = 0.05;

struct Texture {
  std::array<double, 3> base;
  double angle, freq, amp, cross_amp, noise;
};

Texture make_texture(SplitMix64& rng) {
  Texture t;
  for (double& c : t.base) c = 0.3 + 0.4 * rng.uniform();
  t.angle = rng.uniform() * std::numbers::pi;
  t.freq = 6.0 + 8.0 * rng.uniform();
  t.amp = 0.06 + 0.06 * rng.uniform();
  t.cross_amp = 0.03;
  t.noise = 0.015;
  return t;
}

Image render_normal(const Texture& t, int size, SplitMix64& rng) {
  const double phase = rng.uniform() * 2.0 * std::numbers::pi;
  const double cross_phase = rng.uniform() * 2.0 * std::numbers::pi;
  const double jitter = 0.04 * (rng.uniform() - 0.5);
  const double ca = std::cos(t.angle), sa = std::sin(t.angle);
  const double k = 2.0 * std::numbers::pi * t.freq / size;
  Image img(3, size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double u = ca * x + sa * y, v = -sa * x + ca * y;
      const double pattern = t.amp * std::sin(k * u + phase) + t.cross_amp * std::sin(0.5 * k * v + cross_phase);
      for (int c = 0; c < 3; ++c) {
        const double value = t.base[c] + jitter + pattern + t.noise * rng.normal();
        img.at(c, y, x) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  return img;
}

// Rasterizes one defect shape into `mask`; returns the marked pixel count.
std::size_t draw_defect(const std::string& kind, int size, SplitMix64& rng, std::vector<std::uint8_t>& mask) {
  std::fill(mask.begin(), mask.end(), 0);
  const double area = (0.008 + 0.032 * rng.uniform()) * size * size;
  const double cx = size * (0.2 + 0.6 * rng.uniform());
  const double cy = size * (0.2 + 0.6 * rng.uniform());
  auto mark = [&](int x, int y) {
    if (x >= 0 && x < size && y >= 0 && y < size) mask[static_cast<std::size_t>(y) * size + x] = 1;
  };
  if (kind == "square") {
    const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(area))));
    const int x0 = static_cast<int>(cx) - side / 2, y0 = static_cast<int>(cy) - side / 2;
    for (int y = y0; y < y0 + side; ++y)
      for (int x = x0; x < x0 + side; ++x) mark(x, y);
  } else if (kind == "blob") {
    const double aspect = 0.6 + rng.uniform();
    const double a = std::sqrt(area * aspect / std::numbers::pi), b = area / (std::numbers::pi * a);
    const double rot = rng.uniform() * std::numbers::pi;
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double u = cr * dx + sr * dy, v = -sr * dx + cr * dy;
        if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) mark(x, y);
      }
  } else {
    const double width = 3.0;
    const double length = area / width;
    const double rot = rng.uniform() * std::numbers::pi;
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double along = cr * dx + sr * dy, across = -sr * dx + cr * dy;
        if (std::fabs(along) <= length / 2 && std::fabs(across) <= width / 2) mark(x, y);
      }
  }
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

std::string numbered(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return buf;
}

}  // namespace

std::vector<std::string> make_synthetic_dataset(const fs::path& root, const SyntheticOptions& o) {
  if (o.categories < 1 || o.test_images < 2 || o.train_images < 1 || o.image_size < 32) {
    throw InvalidArgument("synthetic dataset options out of range");
  }
  std::vector<std::string> names;
  for (int ci = 0; ci < o.categories; ++ci) {
    const std::string name = ci < static_cast<int>(std::size(kNames)) ? kNames[ci] : "texture_" + std::to_string(ci);
    names.push_back(name);
    SplitMix64 rng(mix64(o.seed) ^ fnv1a64(name));
    const Texture tex = make_texture(rng);
    const fs::path cat = root / name;
    fs::create_directories(cat / "train" / "good");
    fs::create_directories(cat / "test" / "good");

    for (int i = 0; i < o.train_images; ++i) {
      save_png_rgb(cat / "train" / "good" / (numbered(i) + ".png"), render_normal(tex, o.image_size, rng));
    }
    const int normals = o.test_images / 2;
    for (int i = 0; i < normals; ++i) {
      save_png_rgb(cat / "test" / "good" / (numbered(i) + ".png"), render_normal(tex, o.image_size, rng));
    }

    const std::size_t n_pixels = static_cast<std::size_t>(o.image_size) * o.image_size;
    std::vector<std::uint8_t> mask(n_pixels);
    std::array<int, 3> counters{0, 0, 0};
    for (int i = 0; i < o.test_images - normals; ++i) {
      const int kind_index = i % 3;
      const std::string kind = kDefects[kind_index];
      Image img = render_normal(tex, o.image_size, rng);

      std::size_t marked = 0;
      do {
        marked = draw_defect(kind, o.image_size, rng, mask);
      } while (marked < kMinFraction * n_pixels || marked > kMaxFraction * n_pixels);

      std::array<double, 3> colour;
      for (int c = 0; c < 3; ++c) {
        const double delta = 0.25 + 0.15 * rng.uniform();
        colour[c] = std::clamp(tex.base[c] + (tex.base[c] > 0.5 ? -delta : delta), 0.0, 1.0);
      }
      for (std::size_t p = 0; p < n_pixels; ++p) {
        if (!mask[p]) continue;
        const int y = static_cast<int>(p / o.image_size), x = static_cast<int>(p % o.image_size);
        for (int c = 0; c < 3; ++c) {
          img.at(c, y, x) = static_cast<float>(std::clamp(colour[c] + 0.02 * rng.normal(), 0.0, 1.0));
        }
      }

      const std::string stem = numbered(counters[kind_index]++);
      fs::create_directories(cat / "test" / kind);
      fs::create_directories(cat / "ground_truth" / kind);
      save_png_rgb(cat / "test" / kind / (stem + ".png"), img);
      std::vector<std::uint8_t> mask_png(n_pixels);
      std::transform(mask.begin(), mask.end(), mask_png.begin(), [](std::uint8_t m) { return m ? 255 : 0; });
      save_png_gray(cat / "ground_truth" / kind / (stem + "_mask.png"), mask_png, o.image_size, o.image_size);
    }
  }
  return names;
}

}  // namespace clipfusion
