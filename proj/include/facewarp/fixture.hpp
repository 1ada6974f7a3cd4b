#ifndef FACEWARP_FIXTURE_HPP
#define FACEWARP_FIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "facewarp/imaging.hpp"
#include "facewarp/landmarks.hpp"

namespace facewarp {

// Textured RGB test image for a landmark set: smooth color ramps, a fine
// checker so displacements are visible, and a dark dot on every landmark.
inline RasterImage render_synthetic_face(const LandmarkSet& lm, int width, int height) {
  RasterImage img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool checker = ((x / 8) + (y / 8)) % 2 == 0;
      std::uint8_t* px = img.pixel(x, y);
      px[0] = static_cast<std::uint8_t>(40 + (175 * x) / std::max(1, width - 1));
      px[1] = static_cast<std::uint8_t>(40 + (175 * y) / std::max(1, height - 1));
      px[2] = checker ? 200 : 120;
    }
  }
  const double dot_radius = std::max(1.5, std::min(width, height) / 200.0);
  for (const Point2& p : lm.points()) {
    const int x0 = std::max(0, static_cast<int>(std::floor(p.x - dot_radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(p.x + dot_radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(p.y - dot_radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(p.y + dot_radius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (std::hypot(x - p.x, y - p.y) <= dot_radius) {
          std::uint8_t* px = img.pixel(x, y);
          px[0] = 20;
          px[1] = 20;
          px[2] = 20;
        }
      }
    }
  }
  return img;
}

}  // namespace facewarp

#endif  // FACEWARP_FIXTURE_HPP
