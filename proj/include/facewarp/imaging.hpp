#ifndef FACEWARP_IMAGING_HPP
#define FACEWARP_IMAGING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"
#include "facewarp/parallel.hpp"

namespace facewarp {

// Row-major interleaved 8-bit image with 3 (RGB) or 4 (RGBA) channels.
class RasterImage {
 public:
  RasterImage(int width, int height, int channels)
      : RasterImage(width, height, channels,
                    std::vector<std::uint8_t>(checked_size(width, height, channels), 0)) {}

  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (pixels_.size() != checked_size(width, height, channels)) {
      throw ValidationError("pixel buffer holds " + std::to_string(pixels_.size()) +
                            " samples, expected " +
                            std::to_string(checked_size(width, height, channels)));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  const std::uint8_t* pixel(int x, int y) const { return pixels_.data() + offset(x, y); }
  std::uint8_t* pixel(int x, int y) { return pixels_.data() + offset(x, y); }

  std::uint8_t at(int x, int y, int c) const { return pixels_[offset(x, y) + c]; }
  std::uint8_t& at(int x, int y, int c) { return pixels_[offset(x, y) + c]; }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  bool operator==(const RasterImage&) const = default;

 private:
  static std::size_t checked_size(int width, int height, int channels) {
    if (width < 1 || height < 1) {
      throw ValidationError("image dimensions must be positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    }
    if (channels != 3 && channels != 4) {
      throw ValidationError("images must have 3 or 4 channels, got " + std::to_string(channels));
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(channels);
  }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(channels_);
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> pixels_;
};

// Per-channel sample; only the first `channels` entries are meaningful.
struct Color {
  std::array<std::uint8_t, 4> value{};
  int channels = 0;

  std::uint8_t operator[](int c) const { return value[c]; }
  bool operator==(const Color&) const = default;
};

inline std::uint8_t round_to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

// Bilinear interpolation of the four lattice neighbours of (x, y), written to
// out[0..channels). Coordinates outside the image are clamped to the border.
inline void bilinear_sample_into(const RasterImage& img, double x, double y, std::uint8_t* out) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;

  const std::uint8_t* p00 = img.pixel(x0, y0);
  const std::uint8_t* p10 = img.pixel(x1, y0);
  const std::uint8_t* p01 = img.pixel(x0, y1);
  const std::uint8_t* p11 = img.pixel(x1, y1);
  for (int c = 0; c < img.channels(); ++c) {
    const double top = p00[c] * (1.0 - fx) + p10[c] * fx;
    const double bottom = p01[c] * (1.0 - fx) + p11[c] * fx;
    out[c] = round_to_channel(top * (1.0 - fy) + bottom * fy);
  }
}

inline Color bilinear_sample(const RasterImage& img, double x, double y) {
  Color c;
  c.channels = img.channels();
  bilinear_sample_into(img, x, y, c.value.data());
  return c;
}

// A backward map tells, for an output pixel, where to sample the source and
// whether the pixel is resampled at all.
template <typename M>
concept BackwardMap = requires(const M& m, int x, int y) {
  { m.source(x, y) } -> std::convertible_to<Point2>;
  { m.contains(x, y) } -> std::convertible_to<bool>;
};

// Backward map from two callables: source(Point2) -> Point2 and
// region(Point2) -> bool.
template <typename SourceFn, typename RegionFn>
class FunctionMap {
 public:
  FunctionMap(SourceFn source, RegionFn region)
      : source_(std::move(source)), region_(std::move(region)) {}

  Point2 source(int x, int y) const { return source_(Point2{double(x), double(y)}); }
  bool contains(int x, int y) const { return region_(Point2{double(x), double(y)}); }

 private:
  SourceFn source_;
  RegionFn region_;
};

template <typename SourceFn>
auto make_map(SourceFn source) {
  return FunctionMap(std::move(source), [](const Point2&) { return true; });
}

template <typename SourceFn, typename RegionFn>
auto make_map(SourceFn source, RegionFn region) {
  return FunctionMap(std::move(source), std::move(region));
}

// Tabulated source position for every pixel of a width x height frame.
class DenseMap {
 public:
  DenseMap(int width, int height)
      : width_(width), height_(height),
        sources_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}

  int width() const { return width_; }
  int height() const { return height_; }

  Point2 source(int x, int y) const { return sources_[index(x, y)]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  Point2& at(int x, int y) { return sources_[index(x, y)]; }
  std::span<const Point2> sources() const { return sources_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Point2> sources_;
};

// Resamples src through `map`: every output pixel inside the map's region
// takes the bilinear sample at map.source(x, y); every other pixel is copied.
template <BackwardMap Map>
RasterImage warp_backward(const RasterImage& src, const Map& map,
                          int threads = default_thread_count()) {
  RasterImage out = src;
  parallel_rows(src.height(), threads, [&](int first, int last) {
    for (int y = first; y < last; ++y) {
      for (int x = 0; x < src.width(); ++x) {
        if (!map.contains(x, y)) continue;
        const Point2 s = map.source(x, y);
        bilinear_sample_into(src, s.x, s.y, out.pixel(x, y));
      }
    }
  });
  return out;
}

}  // namespace facewarp

#endif  // FACEWARP_IMAGING_HPP
