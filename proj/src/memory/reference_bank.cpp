#include "clipfusion/memory/reference_bank.hpp"

#include <algorithm>
#include <cmath>

#include "clipfusion/data/preprocess.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

ReferenceBank::ReferenceBank(std::string category, int shots, std::uint64_t seed)
    : category_(std::move(category)), shots_(shots), seed_(seed) {
  if (shots < 1) throw InvalidArgument("a reference bank needs k >= 1 shots");
}

void ReferenceBank::add(const FeatureGrid& grid) {
  auto d = grid.data();
  add_vectors(grid.tag(), grid.dim(), grid.cells(), std::vector<float>(d.begin(), d.end()));
}

void ReferenceBank::add_vectors(const SourceTag& tag, int dim, std::size_t cells_per_image,
                                std::vector<float> vectors) {
  if (dim < 1 || cells_per_image == 0 || vectors.size() % (static_cast<std::size_t>(dim) * cells_per_image) != 0) {
    throw InvalidArgument("reference vectors do not form whole grids for " + tag.to_string());
  }
  for (std::size_t i = 0; i < vectors.size(); i += dim) {
    double n2 = 0.0;
    for (int c = 0; c < dim; ++c) n2 += static_cast<double>(vectors[i + c]) * vectors[i + c];
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      throw InvalidArgument("reference vector with zero or non-finite norm for " + tag.to_string());
    }
  }
  auto [it, inserted] = entries_.try_emplace(tag);
  Entry& e = it->second;
  if (inserted) {
    e.dim = dim;
    e.cells_per_image = cells_per_image;
  } else if (e.dim != dim || e.cells_per_image != cells_per_image) {
    throw InvalidArgument("grid shape for " + tag.to_string() + " differs from earlier references");
  }
  e.vectors.insert(e.vectors.end(), vectors.begin(), vectors.end());
  rebuild(e);
}

void ReferenceBank::rebuild(Entry& e) {
  const std::size_t n = e.count();
  e.transposed.assign(static_cast<std::size_t>(e.dim) * n, 0.0);
  e.squared_norms.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double vv = 0.0;
    for (int c = 0; c < e.dim; ++c) {
      const double v = e.vectors[i * e.dim + c];
      e.transposed[static_cast<std::size_t>(c) * n + i] = v;
      vv += v * v;
    }
    e.squared_norms[i] = vv;
  }
}

std::vector<SourceTag> ReferenceBank::tags() const {
  std::vector<SourceTag> out;
  for (const auto& [tag, _] : entries_) out.push_back(tag);
  return out;
}

const ReferenceBank::Entry& ReferenceBank::entry(const SourceTag& tag) const {
  auto it = entries_.find(tag);
  if (it == entries_.end()) throw LookupError("reference bank has no entry for " + tag.to_string());
  return it->second;
}

namespace {

double clamp01(double d) { return d < 0.0 ? 0.0 : (d > 1.0 ? 1.0 : d); }

double squared_norm(std::span<const float> v) {
  double qq = 0.0;
  for (float q : v) qq += static_cast<double>(q) * q;
  if (!(qq > 0.0)) throw InvalidArgument("query vector has zero norm");
  return qq;
}

// Nearest reference distance for up to kQ queries at once. Each dot product
// accumulates over channels in order, as half_cosine_distance does; tiling
// over queries and references only reuses loads.
constexpr int kQ = 6;
constexpr int kR = 4;

void nearest_block(const ReferenceBank::Entry& e, const float* const* queries, int nq, double* best) {
  const std::size_t n = e.count();
  const int dim = e.dim;
  // Padding slots repeat the first query; their results are dropped.
  double qq[kQ];
  std::vector<double> qbuf(static_cast<std::size_t>(kQ) * dim);
  for (int q = 0; q < kQ; ++q) {
    const float* src = queries[q < nq ? q : 0];
    for (int c = 0; c < dim; ++c) qbuf[static_cast<std::size_t>(q) * dim + c] = src[c];
    qq[q] = squared_norm({src, static_cast<std::size_t>(dim)});
  }
  const double* qv = qbuf.data();
  for (int q = 0; q < nq; ++q) best[q] = 1.0;

  auto consider = [&](int q, double dot, std::size_t r) {
    const double d = clamp01(0.5 * (1.0 - dot / std::sqrt(qq[q] * e.squared_norms[r])));
    if (d < best[q]) best[q] = d;
  };

  const double* t = e.transposed.data();
  std::size_t i = 0;
  for (; i + kR <= n; i += kR) {
    double acc[kQ][kR] = {};
    for (int c = 0; c < dim; ++c) {
      const double* row = t + static_cast<std::size_t>(c) * n + i;
      for (int q = 0; q < kQ; ++q) {
        const double v = qv[q * dim + c];
        for (int j = 0; j < kR; ++j) acc[q][j] += v * row[j];
      }
    }
    for (int q = 0; q < nq; ++q) {
      for (int j = 0; j < kR; ++j) consider(q, acc[q][j], i + j);
    }
  }
  for (; i < n; ++i) {
    for (int q = 0; q < nq; ++q) {
      double dot = 0.0;
      for (int c = 0; c < dim; ++c) dot += qv[q * dim + c] * t[static_cast<std::size_t>(c) * n + i];
      consider(q, dot, i);
    }
  }
}

}  // namespace

double ReferenceBank::min_distance(const SourceTag& tag, std::span<const float> query) const {
  const Entry& e = entry(tag);
  if (static_cast<int>(query.size()) != e.dim) {
    throw InvalidArgument("query dimension " + std::to_string(query.size()) + " does not match bank dimension " +
                          std::to_string(e.dim));
  }
  const float* q = query.data();
  double best[kQ];
  nearest_block(e, &q, 1, best);
  return best[0];
}

std::vector<double> ReferenceBank::min_distances(const FeatureGrid& grid) const {
  const Entry& e = entry(grid.tag());
  if (grid.dim() != e.dim) throw InvalidArgument("query grid dimension does not match bank for " + grid.tag().to_string());
  std::vector<double> out(grid.cells());
  for (std::size_t c = 0; c < grid.cells(); c += kQ) {
    const int nq = static_cast<int>(std::min<std::size_t>(kQ, grid.cells() - c));
    const float* qs[kQ];
    for (int q = 0; q < nq; ++q) qs[q] = grid.cell(c + q).data();
    double best[kQ];
    nearest_block(e, qs, nq, best);
    for (int q = 0; q < nq; ++q) out[c + q] = best[q];
  }
  return out;
}

double bank_min_distance(const ReferenceBank& bank, const SourceTag& tag, std::span<const float> query) {
  return bank.min_distance(tag, query);
}

ReferenceBank build_bank(std::span<const Image> references, std::span<const int> clip_blocks,
                         std::span<const TimestepBlock> diff_pairs, VisionLanguageBackend* clip,
                         DiffusionBackend* diffusion, const std::string& reference_prompt,
                         const std::string& category, std::uint64_t seed) {
  if (references.empty()) throw InvalidArgument("build_bank needs at least one reference image");
  if (!clip_blocks.empty() && clip == nullptr) throw InvalidArgument("CLIP blocks requested without a CLIP backend");
  if (!diff_pairs.empty() && diffusion == nullptr) {
    throw InvalidArgument("diffusion pairs requested without a diffusion backend");
  }
  ReferenceBank bank(category, static_cast<int>(references.size()), seed);
  for (const Image& img : references) {
    if (!clip_blocks.empty()) {
      for (const auto& g : clip->block_features(preprocess_clip(img), clip_blocks)) bank.add(g);
    }
    if (!diff_pairs.empty()) {
      for (const auto& g : diffusion->decoder_features(preprocess_diffusion(img), reference_prompt, diff_pairs)) {
        bank.add(g);
      }
    }
  }
  return bank;
}

}  // namespace clipfusion
