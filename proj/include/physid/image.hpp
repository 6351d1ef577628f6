#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace physid {

// Interleaved 8-bit image, row-major, top row first.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  [[nodiscard]] std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

Image make_image(int width, int height, int channels, std::uint8_t fill = 0);

// PNG (any bit depth is expanded to 8-bit) or binary PGM (P5) / PPM (P6).
Image decode_image(std::string_view bytes);
Image load_image(const std::filesystem::path& path);

std::string encode_png(const Image& image);
void save_png(const std::filesystem::path& path, const Image& image);
std::string encode_pgm(const Image& image);

// Luma conversion for masks; single-channel input is returned as is.
Image to_grayscale(const Image& image);

// Sub-rectangle; throws InvalidParameter unless it lies inside the image and is non-empty.
Image crop(const Image& image, int x, int y, int width, int height);

} // namespace physid
