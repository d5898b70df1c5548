#include "clipfusion/data/dataset.hpp"

#include <algorithm>

#include "clipfusion/data/png_io.hpp"
#include "clipfusion/data/rng.hpp"
#include "clipfusion/error.hpp"

namespace fs = std::filesystem;

namespace clipfusion {

DatasetLayout parse_layout(const std::string& text) {
  if (text == "mvtec") return DatasetLayout::kMvtec;
  if (text == "visa" || text == "visa_organized") return DatasetLayout::kVisaOrganized;
  throw UsageError("unknown dataset layout '" + text + "'");
}

std::string TestSample::id() const { return defect + "/" + image.stem().string(); }

const CategoryIndex& DatasetIndex::category(const std::string& name) const {
  auto it = per_category.find(name);
  if (it == per_category.end()) throw IngestionError("category '" + name + "' not found under " + root.string());
  return it->second;
}

namespace {

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::vector<fs::path> images_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DatasetIndex discover(const fs::path& root, DatasetLayout /*layout*/) {
  if (!fs::is_directory(root)) throw IngestionError("dataset root '" + root.string() + "' is not a directory");
  DatasetIndex index;
  index.root = root;
  for (const auto& cat_dir : subdirs(root)) {
    const auto name = cat_dir.filename().string();
    if (!fs::is_directory(cat_dir / "train") && !fs::is_directory(cat_dir / "test")) continue;

    const fs::path train_good = cat_dir / "train" / "good";
    if (!fs::is_directory(train_good)) throw IngestionError("missing directory '" + train_good.string() + "'");
    const fs::path test_dir = cat_dir / "test";
    if (!fs::is_directory(test_dir)) throw IngestionError("missing directory '" + test_dir.string() + "'");

    CategoryIndex ci;
    ci.train_normal = images_in(train_good);
    if (ci.train_normal.empty()) throw IngestionError("no training images in '" + train_good.string() + "'");
    for (const auto& defect_dir : subdirs(test_dir)) {
      const auto defect = defect_dir.filename().string();
      for (const auto& img : images_in(defect_dir)) {
        TestSample s{img, defect, defect != "good", std::nullopt};
        if (s.abnormal) {
          const fs::path mask = cat_dir / "ground_truth" / defect / (img.stem().string() + "_mask.png");
          if (!fs::is_regular_file(mask)) {
            throw IngestionError("abnormal image '" + img.string() + "' has no mask at '" + mask.string() + "'");
          }
          s.mask = mask;
        }
        ci.test.push_back(std::move(s));
      }
    }
    if (ci.test.empty()) throw IngestionError("no test images under '" + test_dir.string() + "'");
    index.categories.push_back(name);
    index.per_category.emplace(name, std::move(ci));
  }
  if (index.categories.empty()) throw IngestionError("no categories found under '" + root.string() + "'");
  return index;
}

std::vector<fs::path> sample_k_shot(const DatasetIndex& index, const std::string& category, int k,
                                    std::uint64_t seed) {
  const auto& ci = index.category(category);
  if (k < 0) throw InvalidArgument("k must be non-negative");
  if (static_cast<std::size_t>(k) > ci.train_normal.size()) {
    throw InvalidArgument("k=" + std::to_string(k) + " exceeds the " + std::to_string(ci.train_normal.size()) +
                          " training images of '" + category + "'");
  }
  std::vector<fs::path> pool = ci.train_normal;
  SplitMix64 rng(fnv1a64(category) ^ mix64(seed));
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

BinaryMask load_mask(const fs::path& path) {
  BinaryMask mask;
  auto gray = load_png_gray(path, mask.height, mask.width);
  mask.pixels.resize(gray.size());
  std::transform(gray.begin(), gray.end(), mask.pixels.begin(), [](std::uint8_t v) { return v > 0 ? 1 : 0; });
  return mask;
}

}  // namespace clipfusion
