#include "physid/image.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>

namespace physid {

Image make_image(int width, int height, int channels, std::uint8_t fill) {
  if (width < 0 || height < 0 || channels < 1 || channels > 4) {
    throw Error(Errc::InvalidImage, "bad image dimensions");
  }
  Image img{width, height, channels, {}};
  img.pixels.assign(static_cast<std::size_t>(width) * height * channels, fill);
  return img;
}

namespace {

Image decode_png(std::string_view bytes) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error(Errc::InvalidImage, std::string("png: ") + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  int channels = 1;
  if (color) {
    png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    channels = alpha ? 4 : 3;
  } else {
    png.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
    channels = alpha ? 2 : 1;
  }
  Image img = make_image(static_cast<int>(png.width), static_cast<int>(png.height), channels);
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw Error(Errc::InvalidImage, std::string("png: ") + png.message);
  }
  return img;
}

// Netpbm binary formats: header tokens separated by whitespace, '#' comments.
Image decode_pnm(std::string_view bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw Error(Errc::InvalidImage, "pnm: bad header");
    return value;
  };
  const int channels = bytes[1] == '5' ? 1 : 3;
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (maxval != 255) throw Error(Errc::InvalidImage, "pnm: only maxval 255 supported");
  ++pos; // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w * h * channels);
  if (bytes.size() < pos + need) throw Error(Errc::InvalidImage, "pnm: truncated data");
  Image img = make_image(static_cast<int>(w), static_cast<int>(h), channels);
  std::memcpy(img.pixels.data(), bytes.data() + pos, need);
  return img;
}

} // namespace

Image decode_image(std::string_view bytes) {
  if (bytes.size() >= 8 && static_cast<unsigned char>(bytes[0]) == 0x89 && bytes.substr(1, 3) == "PNG") {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes);
  }
  throw Error(Errc::InvalidImage, "unrecognized image format");
}

Image load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

std::string encode_png(const Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  switch (image.channels) {
  case 1: png.format = PNG_FORMAT_GRAY; break;
  case 2: png.format = PNG_FORMAT_GA; break;
  case 3: png.format = PNG_FORMAT_RGB; break;
  default: png.format = PNG_FORMAT_RGBA; break;
  }
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(Errc::InvalidImage, std::string("png encode: ") + png.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(Errc::InvalidImage, std::string("png encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_png(const std::filesystem::path& path, const Image& image) {
  write_file(path, encode_png(image));
}

std::string encode_pgm(const Image& image) {
  const Image gray = to_grayscale(image);
  std::string out = "P5\n" + std::to_string(gray.width) + " " + std::to_string(gray.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(gray.pixels.data()), gray.pixels.size());
  return out;
}

Image to_grayscale(const Image& image) {
  if (image.channels == 1) return image;
  Image out = make_image(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (image.channels <= 2) {
        out.at(x, y) = image.at(x, y, 0);
      } else {
        const double l = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
        out.at(x, y) = static_cast<std::uint8_t>(l + 0.5);
      }
    }
  }
  return out;
}

} // namespace physid

namespace physid {

Image crop(const Image& image, int x, int y, int width, int height) {
  if (width <= 0 || height <= 0 || x < 0 || y < 0 || x + width > image.width || y + height > image.height) {
    throw Error(Errc::InvalidParameter, "crop rectangle outside the image");
  }
  Image out = make_image(width, height, image.channels);
  const std::size_t row = static_cast<std::size_t>(width) * image.channels;
  for (int r = 0; r < height; ++r) {
    const auto* src = &image.pixels[(static_cast<std::size_t>(y + r) * image.width + x) * image.channels];
    std::copy(src, src + row, &out.pixels[static_cast<std::size_t>(r) * row]);
  }
  return out;
}

} // namespace physid
