#pragma once

#include <cstddef>
#include <vector>

namespace clipfusion {

// Planar C x H x W float tensor. Decoded images use C = 3 with values in [0, 1];
// preprocessed tensors hold whatever range the consuming backend expects.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w, float fill = 0.0f);

  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  float& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int y, int x) const {
    return data[c * plane() + static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

using Image = Tensor3;

}  // namespace clipfusion
