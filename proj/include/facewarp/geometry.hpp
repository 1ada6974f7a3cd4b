#ifndef FACEWARP_GEOMETRY_HPP
#define FACEWARP_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include "facewarp/error.hpp"

namespace facewarp {

// Image frame: x grows rightward, y grows downward, origin at the center of
// the top-left pixel.

struct Vec2 {
  double dx = 0.0;
  double dy = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {dx + o.dx, dy + o.dy}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {dx - o.dx, dy - o.dy}; }
  constexpr Vec2 operator-() const { return {-dx, -dy}; }
  constexpr Vec2 operator*(double s) const { return {dx * s, dy * s}; }
  constexpr Vec2 operator/(double s) const { return {dx / s, dy / s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2 operator+(const Vec2& v) const { return {x + v.dx, y + v.dy}; }
  constexpr Point2 operator-(const Vec2& v) const { return {x - v.dx, y - v.dy}; }
  constexpr Vec2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  constexpr bool operator==(const Point2&) const = default;
};

inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }
inline bool is_finite(const Vec2& v) { return std::isfinite(v.dx) && std::isfinite(v.dy); }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.dx * b.dx + a.dy * b.dy; }

// z-component of the 3D cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.dx * b.dy - a.dy * b.dx; }

constexpr double squared_norm(const Vec2& v) { return dot(v, v); }
inline double norm(const Vec2& v) { return std::hypot(v.dx, v.dy); }

inline double distance(const Point2& a, const Point2& b) { return norm(b - a); }

constexpr Point2 midpoint(const Point2& a, const Point2& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

// Counterclockwise quarter turn: (x, y) -> (-y, x). The same convention is
// used by every rotation-aware formula in the library.
constexpr Vec2 perp(const Vec2& v) { return {-v.dy, v.dx}; }

// Signed angle in radians, normalized to (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : radians_(normalize(radians)) {}

  static Angle from_degrees(double degrees) {
    return Angle(degrees * std::numbers::pi / 180.0);
  }

  constexpr double radians() const { return radians_; }
  double degrees() const { return radians_ * 180.0 / std::numbers::pi; }
  double cos() const { return std::cos(radians_); }
  double sin() const { return std::sin(radians_); }

 private:
  static double normalize(double r) {
    if (!std::isfinite(r)) {
      throw ValidationError("angle must be finite");
    }
    r = std::remainder(r, 2.0 * std::numbers::pi);  // [-pi, pi]
    if (r <= -std::numbers::pi) {
      r += 2.0 * std::numbers::pi;
    }
    return r;
  }

  double radians_ = 0.0;
};

inline Vec2 rotate(const Vec2& v, const Angle& a) {
  const double c = a.cos();
  const double s = a.sin();
  return {c * v.dx - s * v.dy, s * v.dx + c * v.dy};
}

inline Point2 rotate_about(const Point2& p, const Point2& pivot, const Angle& a) {
  return pivot + rotate(p - pivot, a);
}

// Signed angle from the horizontal (1, 0) to the vector joining the two eye
// centers.
inline Angle eye_axis_angle(const Point2& left_eye, const Point2& right_eye) {
  const Vec2 axis = right_eye - left_eye;
  if (axis.dx == 0.0 && axis.dy == 0.0) {
    throw DegenerateGeometryError("eye centers coincide; the eye axis is undefined");
  }
  return Angle(std::atan2(axis.dy, axis.dx));
}

}  // namespace facewarp

#endif  // FACEWARP_GEOMETRY_HPP
