#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clipfusion/eval/metrics.hpp"

namespace clipfusion {

enum class DatasetLayout { kMvtec, kVisaOrganized };

DatasetLayout parse_layout(const std::string& text);

struct TestSample {
  std::filesystem::path image;
  std::string defect;  // "good" for normal samples
  bool abnormal = false;
  std::optional<std::filesystem::path> mask;

  // "<defect>/<stem>"
  std::string id() const;
};

struct CategoryIndex {
  std::vector<std::filesystem::path> train_normal;  // sorted by path
  std::vector<TestSample> test;                     // sorted by (defect, path)
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<std::string> categories;  // sorted
  std::map<std::string, CategoryIndex> per_category;

  const CategoryIndex& category(const std::string& name) const;
};

// Directory shape (both layouts):
//   <root>/<category>/train/good/*.png
//   <root>/<category>/test/<defect>/*.png
//   <root>/<category>/ground_truth/<defect>/<stem>_mask.png
// Throws IngestionError naming the offending path on any violation.
DatasetIndex discover(const std::filesystem::path& root, DatasetLayout layout = DatasetLayout::kMvtec);

// k distinct training normals drawn uniformly without replacement, in draw
// order. The draw is a partial Fisher-Yates shuffle driven by
// SplitMix64(fnv1a64(category) ^ mix64(seed)), so it reproduces across runs and
// platforms.
std::vector<std::filesystem::path> sample_k_shot(const DatasetIndex& index, const std::string& category, int k,
                                                 std::uint64_t seed);

// Loads a ground-truth mask, binarized at > 0.
BinaryMask load_mask(const std::filesystem::path& path);

}  // namespace clipfusion
