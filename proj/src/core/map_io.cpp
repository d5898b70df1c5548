#include "clipfusion/core/map_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "clipfusion/core/map_ops.hpp"
#include "clipfusion/data/png_io.hpp"
#include "clipfusion/error.hpp"

namespace clipfusion {

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
  auto p = raster_path;
  p.replace_extension(".json");
  return p;
}

void save_score_map(const std::filesystem::path& raster_path, const ScoreMap& map) {
  std::string bytes;
  bytes.reserve(map.size() * 4);
  for (double v : map.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int shift = 0; shift < 32; shift += 8) bytes.push_back(static_cast<char>((bits >> shift) & 0xFF));
  }
  std::ofstream out(raster_path, std::ios::binary);
  if (!out) throw IngestionError("cannot open '" + raster_path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));

  nlohmann::json meta = {{"height", map.height()}, {"width", map.width()}, {"normalized", map.normalized()}};
  std::ofstream side(sidecar_path(raster_path));
  side << meta.dump() << "\n";
  if (!out || !side) throw IngestionError("failed writing score map '" + raster_path.string() + "'");
}

ScoreMap load_score_map(const std::filesystem::path& raster_path) {
  std::ifstream side(sidecar_path(raster_path));
  if (!side) throw IngestionError("missing score map sidecar for '" + raster_path.string() + "'");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad score map sidecar '" + sidecar_path(raster_path).string() + "': " + e.what());
  }
  const int h = meta.at("height").get<int>();
  const int w = meta.at("width").get<int>();
  const bool normalized = meta.value("normalized", false);

  std::ifstream in(raster_path, std::ios::binary);
  if (!in) throw IngestionError("cannot open score map '" + raster_path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != static_cast<std::size_t>(h) * w * 4) {
    throw FormatError("score map raster '" + raster_path.string() + "' has the wrong size");
  }
  std::vector<double> values(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return ScoreMap(h, w, std::move(values), normalized);
}

void save_heatmap_png(const std::filesystem::path& path, const ScoreMap& map) {
  const ScoreMap scaled = map.normalized() ? map : minmax_normalize(map);
  std::vector<std::uint8_t> pixels(scaled.size());
  auto v = scaled.values();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>(std::lround(v[i] * 255.0));
  }
  save_png_gray(path, pixels, scaled.height(), scaled.width());
}

}  // namespace clipfusion
