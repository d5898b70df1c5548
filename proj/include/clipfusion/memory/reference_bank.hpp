#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clipfusion/backends/backend.hpp"
#include "clipfusion/core/feature_grid.hpp"
#include "clipfusion/data/image.hpp"

namespace clipfusion {

// Reference feature vectors of k normal images, grouped by source tag.
// Nearest-neighbour search is exhaustive and exact.
class ReferenceBank {
 public:
  struct Entry {
    int dim = 0;
    std::size_t cells_per_image = 0;
    std::vector<float> vectors;  // count x dim, row-major, as extracted

    std::size_t count() const { return dim ? vectors.size() / dim : 0; }

    // Search layout: dim x count doubles and per-vector squared norms.
    std::vector<double> transposed;
    std::vector<double> squared_norms;
  };

  ReferenceBank(std::string category, int shots, std::uint64_t seed);

  // Appends every cell of `grid` under its tag. All grids of one tag must
  // share dimension and cell count.
  void add(const FeatureGrid& grid);
  // Appends raw vectors (used by deserialization).
  void add_vectors(const SourceTag& tag, int dim, std::size_t cells_per_image, std::vector<float> vectors);

  const std::string& category() const noexcept { return category_; }
  int shots() const noexcept { return shots_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool contains(const SourceTag& tag) const { return entries_.count(tag) > 0; }
  std::vector<SourceTag> tags() const;
  const Entry& entry(const SourceTag& tag) const;

  // min over r of (1 - cos(query, r)) / 2.
  double min_distance(const SourceTag& tag, std::span<const float> query) const;
  // min_distance for every cell of the grid, using the grid's tag.
  std::vector<double> min_distances(const FeatureGrid& grid) const;

 private:
  void rebuild(Entry& e);

  std::string category_;
  int shots_;
  std::uint64_t seed_;
  std::map<SourceTag, Entry> entries_;
};

double bank_min_distance(const ReferenceBank& bank, const SourceTag& tag, std::span<const float> query);

// Extracts reference features of every image for every CLIP block and
// diffusion (timestep, block) pair. A backend may be null when its tap list
// is empty. `reference_prompt` conditions the diffusion pass.
ReferenceBank build_bank(std::span<const Image> references, std::span<const int> clip_blocks,
                         std::span<const TimestepBlock> diff_pairs, VisionLanguageBackend* clip,
                         DiffusionBackend* diffusion, const std::string& reference_prompt,
                         const std::string& category, std::uint64_t seed);

}  // namespace clipfusion
