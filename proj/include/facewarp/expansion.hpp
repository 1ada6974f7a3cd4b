#ifndef FACEWARP_EXPANSION_HPP
#define FACEWARP_EXPANSION_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"
#include "facewarp/imaging.hpp"
#include "facewarp/landmarks.hpp"

namespace facewarp {

// How the center of the circular deformation area is chosen.
enum class CenterScheme {
  CenterLandmark,   // the dedicated eye-center landmark
  CanthusMidpoint,  // midpoint of the outer and inner canthus
};

// Radial eye warp parameters. `strength` in [-100, 100]: positive enlarges,
// negative shrinks, 0 is the identity.
struct ExpansionParams {
  double strength = 50.0;
  CenterScheme scheme = CenterScheme::CenterLandmark;

  void validate() const {
    if (!std::isfinite(strength) || std::abs(strength) > 100.0) {
      throw ValidationError("expansion strength must lie in [-100, 100], got " +
                            std::to_string(strength));
    }
  }
};

struct EyeGeometry {
  Point2 center;  // E_c
  Point2 corner;  // inner canthus E_d
  double radius;  // |corner - center|
};

inline Point2 eye_center(const LandmarkSet& lm, EyeSide side, CenterScheme scheme) {
  if (scheme == CenterScheme::CenterLandmark) {
    return lm[landmark_index::eye_center(side)];
  }
  return midpoint(lm[landmark_index::outer_canthus(side)], lm[landmark_index::inner_canthus(side)]);
}

inline EyeGeometry eye_geometry(const LandmarkSet& lm, EyeSide side, CenterScheme scheme) {
  const Point2 c = eye_center(lm, side, scheme);
  const Point2 d = lm[landmark_index::inner_canthus(side)];
  const double r = distance(c, d);
  if (!(r > 0.0)) {
    throw DegenerateGeometryError(std::string(side == EyeSide::Left ? "left" : "right") +
                                  " eye center coincides with its inner canthus; "
                                  "the deformation radius is zero");
  }
  return {c, d, r};
}

// Expansion scale S at p; p must lie strictly inside the deformation circle.
//   S = 1 - (a/100) * (1 - r^2 / R^2)
inline double expansion_scale(const Point2& p, const EyeGeometry& geo, double strength) {
  const double r2 = squared_norm(p - geo.center);
  const double radius2 = geo.radius * geo.radius;
  return 1.0 - (strength / 100.0) * (1.0 - r2 / radius2);
}

// Pixel that p samples from: the center plus the offset scaled by s.
inline Point2 reference_pixel(const Point2& p, const EyeGeometry& geo, double s) {
  return {(p.x - geo.center.x) * s + geo.center.x, (p.y - geo.center.y) * s + geo.center.y};
}

inline bool inside_deformation_circle(const Point2& p, const EyeGeometry& geo) {
  return squared_norm(p - geo.center) < geo.radius * geo.radius;
}

// Radial map for one eye: identity outside the circle.
struct EyeExpansionMap {
  EyeGeometry geo;
  double strength;

  Point2 source(int x, int y) const {
    const Point2 p{double(x), double(y)};
    return reference_pixel(p, geo, expansion_scale(p, geo, strength));
  }
  bool contains(int x, int y) const {
    return inside_deformation_circle(Point2{double(x), double(y)}, geo);
  }
};

namespace detail {

// Resamples only the circle's bounding box of `img` in place, reading from an
// untouched copy of that image.
inline void expand_one_eye(RasterImage& img, const EyeExpansionMap& map, int threads) {
  const RasterImage snapshot = img;
  const double r = map.geo.radius;
  const int x_first = std::max(0, static_cast<int>(std::floor(map.geo.center.x - r)));
  const int x_last = std::min(img.width() - 1, static_cast<int>(std::ceil(map.geo.center.x + r)));
  const int y_first = std::max(0, static_cast<int>(std::floor(map.geo.center.y - r)));
  const int y_last = std::min(img.height() - 1, static_cast<int>(std::ceil(map.geo.center.y + r)));
  if (x_first > x_last || y_first > y_last) return;

  parallel_rows(y_last - y_first + 1, threads, [&](int first, int last) {
    for (int y = y_first + first; y < y_first + last; ++y) {
      for (int x = x_first; x <= x_last; ++x) {
        if (!map.contains(x, y)) continue;
        const Point2 s = map.source(x, y);
        bilinear_sample_into(snapshot, s.x, s.y, img.pixel(x, y));
      }
    }
  });
}

}  // namespace detail

// Enlarges (strength > 0) or shrinks (strength < 0) both eyes. The left eye is
// processed first; the right eye then reads the intermediate image, which only
// matters when the two circles overlap.
inline RasterImage expand_eyes(const RasterImage& img, const LandmarkSet& lm,
                               const ExpansionParams& params,
                               int threads = default_thread_count()) {
  params.validate();
  const EyeGeometry left = eye_geometry(lm, EyeSide::Left, params.scheme);
  const EyeGeometry right = eye_geometry(lm, EyeSide::Right, params.scheme);
  RasterImage out = img;
  if (params.strength == 0.0) return out;
  detail::expand_one_eye(out, {left, params.strength}, threads);
  detail::expand_one_eye(out, {right, params.strength}, threads);
  return out;
}

}  // namespace facewarp

#endif  // FACEWARP_EXPANSION_HPP
