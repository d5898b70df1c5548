#include "clipfusion/data/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "clipfusion/error.hpp"

namespace clipfusion {

namespace {

std::vector<std::uint8_t> read_png(const std::filesystem::path& path, std::uint32_t format,
                                   int& height, int& width) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IngestionError("cannot decode image '" + path.string() + "': " + image.message);
  }
  image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IngestionError("cannot decode image '" + path.string() + "': " + image.message);
  }
  height = static_cast<int>(image.height);
  width = static_cast<int>(image.width);
  return buffer;
}

void write_png(const std::filesystem::path& path, std::uint32_t format, int height, int width,
               const std::vector<std::uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IngestionError("cannot write image '" + path.string() + "': " + image.message);
  }
}

}  // namespace

Image load_png_rgb(const std::filesystem::path& path) {
  int h = 0, w = 0;
  auto buffer = read_png(path, PNG_FORMAT_RGB, h, w);
  Image img(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = buffer[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0f;
  return img;
}

std::vector<std::uint8_t> load_png_gray(const std::filesystem::path& path, int& height, int& width) {
  return read_png(path, PNG_FORMAT_GRAY, height, width);
}

void save_png_rgb(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 3) throw InvalidArgument("save_png_rgb expects a 3-channel image");
  std::vector<std::uint8_t> buffer(image.plane() * 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        buffer[(static_cast<std::size_t>(y) * image.width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  write_png(path, PNG_FORMAT_RGB, image.height, image.width, buffer);
}

void save_png_gray(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                   int height, int width) {
  if (pixels.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("gray buffer size does not match dimensions");
  }
  write_png(path, PNG_FORMAT_GRAY, height, width, pixels);
}

}  // namespace clipfusion
