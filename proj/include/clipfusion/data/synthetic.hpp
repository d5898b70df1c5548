#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace clipfusion {

struct SyntheticOptions {
  int categories = 3;
  int test_images = 40;   // per category; the first half are normal
  int train_images = 10;  // per category
  int image_size = 128;
  std::uint64_t seed = 0;
};

// Writes a procedurally textured dataset in the MVTec layout. Each category
// has its own striped texture; abnormal test images carry one injected defect
// (square, blob or scratch) covering 0.5%-5% of the image, with an exact mask.
// Returns the category names.
std::vector<std::string> make_synthetic_dataset(const std::filesystem::path& root, const SyntheticOptions& options);

}  // namespace clipfusion
