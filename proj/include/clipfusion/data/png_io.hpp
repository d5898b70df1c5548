#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "clipfusion/data/image.hpp"

namespace clipfusion {

// Decodes any PNG to RGB in [0, 1]. Throws IngestionError on failure.
Image load_png_rgb(const std::filesystem::path& path);

// Decodes a PNG to a single 8-bit gray plane (used for ground-truth masks).
std::vector<std::uint8_t> load_png_gray(const std::filesystem::path& path, int& height, int& width);

// Writes an RGB image in [0, 1] as 8-bit PNG (values rounded and clamped).
void save_png_rgb(const std::filesystem::path& path, const Image& image);

void save_png_gray(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                   int height, int width);

}  // namespace clipfusion
