#pragma once

#include <filesystem>

#include "clipfusion/core/score_map.hpp"

namespace clipfusion {

// Raster layout: H*W little-endian float32 values, row-major, in `<stem>.f32`,
// with a JSON sidecar `<stem>.json` holding {"height", "width", "normalized"}.
void save_score_map(const std::filesystem::path& raster_path, const ScoreMap& map);
ScoreMap load_score_map(const std::filesystem::path& raster_path);

// Sidecar path for a given raster path.
std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);

// 8-bit grayscale heatmap; values are min-max scaled first unless the map is
// already normalized.
void save_heatmap_png(const std::filesystem::path& path, const ScoreMap& map);

}  // namespace clipfusion
