#ifndef FACEWARP_PNG_IO_HPP
#define FACEWARP_PNG_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "facewarp/error.hpp"
#include "facewarp/imaging.hpp"

namespace facewarp {

namespace detail {

// Owns a png_image and releases libpng's read state on scope exit.
struct PngImageHandle {
  png_image image{};
  PngImageHandle() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageHandle() { png_image_free(&image); }
  PngImageHandle(const PngImageHandle&) = delete;
  PngImageHandle& operator=(const PngImageHandle&) = delete;
};

inline RasterImage finish_png_read(PngImageHandle& h, const std::string& origin) {
  if (h.image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw IoError(origin + ": 16-bit PNG is not supported; convert to 8-bit RGB or RGBA");
  }
  const bool alpha = (h.image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  h.image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int channels = alpha ? 4 : 3;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(h.image));
  if (!png_image_finish_read(&h.image, nullptr, buffer.data(), 0, nullptr)) {
    throw IoError(origin + ": " + h.image.message);
  }
  return RasterImage(static_cast<int>(h.image.width), static_cast<int>(h.image.height), channels,
                     std::move(buffer));
}

}  // namespace detail

inline RasterImage decode_png(const std::vector<std::uint8_t>& bytes,
                              const std::string& origin = "<memory>") {
  detail::PngImageHandle h;
  if (!png_image_begin_read_from_memory(&h.image, bytes.data(), bytes.size())) {
    throw IoError(origin + ": not a readable PNG (" + h.image.message + ")");
  }
  return detail::finish_png_read(h, origin);
}

inline RasterImage load_png(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot open image '" + path.string() + "': no such file");
  }
  detail::PngImageHandle h;
  if (!png_image_begin_read_from_file(&h.image, path.c_str())) {
    throw IoError("'" + path.string() + "' is not a readable PNG (" + h.image.message + ")");
  }
  return detail::finish_png_read(h, path.string());
}

inline void save_png(const RasterImage& img, const std::filesystem::path& path) {
  detail::PngImageHandle h;
  h.image.width = static_cast<png_uint_32>(img.width());
  h.image.height = static_cast<png_uint_32>(img.height());
  h.image.format = img.channels() == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&h.image, path.c_str(), 0, img.pixels().data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + h.image.message);
  }
}

}  // namespace facewarp

#endif  // FACEWARP_PNG_IO_HPP
