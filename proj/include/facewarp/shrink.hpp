#ifndef FACEWARP_SHRINK_HPP
#define FACEWARP_SHRINK_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"
#include "facewarp/landmarks.hpp"
#include "facewarp/mls.hpp"

namespace facewarp {

// Landmarks that drive face shrinking: the 15 nose points, 13 mouth points
// (outer ring plus the inner top-center) and the 21 jawline points centered
// on the chin. The three groups add up to 49; a nominal total of 51 is
// sometimes quoted for this scheme, but no selection satisfies both.
inline constexpr std::size_t kShrinkNoseCount = 15;
inline constexpr std::size_t kShrinkMouthCount = 13;
inline constexpr std::size_t kShrinkCheekCount = 21;
inline constexpr std::size_t kShrinkControlCount =
    kShrinkNoseCount + kShrinkMouthCount + kShrinkCheekCount;

struct GroupGains {
  double nose = 1.0;
  double mouth = 0.8;
  double cheek = 1.2;
};

struct ShrinkConfig {
  // Base moving distance in pixels; nullopt selects face_width / 60.
  std::optional<double> strength;
  double axis_epsilon = 1.0;
  int border_anchors = 4;
  GroupGains gains;

  void validate() const {
    if (strength && !(std::isfinite(*strength) && *strength >= 0.0)) {
      throw ValidationError("shrink strength must be a non-negative finite number");
    }
    if (!(std::isfinite(axis_epsilon) && axis_epsilon >= 0.0)) {
      throw ValidationError("axis epsilon must be a non-negative finite number");
    }
    if (border_anchors < 0) {
      throw ValidationError("border anchor count must be non-negative");
    }
    for (double g : {gains.nose, gains.mouth, gains.cheek}) {
      if (!(std::isfinite(g) && g >= 0.0)) {
        throw ValidationError("group gains must be non-negative finite numbers");
      }
    }
  }
};

inline std::array<std::size_t, kShrinkControlCount> select_control_points(const LandmarkSet&) {
  std::array<std::size_t, kShrinkControlCount> out{};
  std::size_t n = 0;
  for (std::size_t i = group_range(GroupId::Nose).first; i < group_range(GroupId::Nose).last; ++i) {
    out[n++] = i;
  }
  const IndexRange outer = group_range(GroupId::MouthOuter);
  for (std::size_t i = outer.first; i < outer.last; ++i) out[n++] = i;
  out[n++] = landmark_index::kMouthInnerTopCenter;
  for (std::size_t i = landmark_index::kChin - 10; i <= landmark_index::kChin + 10; ++i) {
    out[n++] = i;
  }
  assert(n == kShrinkControlCount);
  return out;
}

// Horizontal face extent: distance between the two jaw ends.
inline double face_width(const LandmarkSet& lm) {
  const IndexRange cheek = group_range(GroupId::Cheek);
  return distance(lm[cheek.first], lm[cheek.last - 1]);
}

inline double default_shrink_strength(const LandmarkSet& lm) { return face_width(lm) / 60.0; }

enum class FaceSide { Left, Right, OnAxis };

// Side of the facial midline, i.e. the line through the eye-center midpoint
// perpendicular to the eye axis.
inline FaceSide side_of_axis(const Point2& c, const LandmarkSet& lm, double axis_epsilon) {
  const Point2 left = lm.eye_center(EyeSide::Left);
  const Point2 right = lm.eye_center(EyeSide::Right);
  const Vec2 axis = right - left;
  const double len = norm(axis);
  if (!(len > 0.0)) {
    throw DegenerateGeometryError("eye centers coincide; the facial midline is undefined");
  }
  const double s = dot(c - midpoint(left, right), axis / len);
  if (std::abs(s) <= axis_epsilon) return FaceSide::OnAxis;
  return s < 0.0 ? FaceSide::Left : FaceSide::Right;
}

struct ShrinkPlan {
  std::array<std::size_t, kShrinkControlCount> control_indices{};
  std::array<Vec2, kShrinkControlCount> moving_vectors{};
  std::array<FaceSide, kShrinkControlCount> sides{};
  std::vector<Point2> anchors;
  Angle tilt;
  double strength = 0.0;
};

// Points spaced evenly along the image border: the four corners plus
// `per_edge` interior points on every edge. None when per_edge is 0.
inline std::vector<Point2> border_anchor_points(int width, int height, int per_edge) {
  std::vector<Point2> out;
  if (per_edge <= 0) return out;
  const double xmax = width - 1;
  const double ymax = height - 1;
  out.push_back({0.0, 0.0});
  out.push_back({xmax, 0.0});
  out.push_back({xmax, ymax});
  out.push_back({0.0, ymax});
  for (int k = 1; k <= per_edge; ++k) {
    const double t = double(k) / double(per_edge + 1);
    out.push_back({std::round(t * xmax), 0.0});
    out.push_back({std::round(t * xmax), ymax});
    out.push_back({0.0, std::round(t * ymax)});
    out.push_back({xmax, std::round(t * ymax)});
  }
  return out;
}

inline double group_gain(const GroupGains& g, std::size_t index) {
  switch (group_of(index)) {
    case GroupId::Nose: return g.nose;
    case GroupId::MouthOuter:
    case GroupId::MouthInner: return g.mouth;
    case GroupId::Cheek: return g.cheek;
    default: return 0.0;
  }
}

// Moving vectors for the shrink controls. Left-side points move along the eye
// axis V_e = (cos b, sin b), right-side points against it, midline points stay.
inline ShrinkPlan moving_vectors(const LandmarkSet& lm, const ShrinkConfig& cfg, int width,
                                 int height) {
  cfg.validate();
  ShrinkPlan plan;
  plan.tilt = eye_axis_angle(lm);
  plan.strength = cfg.strength ? *cfg.strength : default_shrink_strength(lm);
  plan.control_indices = select_control_points(lm);
  const Vec2 along{plan.tilt.cos(), plan.tilt.sin()};
  for (std::size_t k = 0; k < kShrinkControlCount; ++k) {
    const std::size_t index = plan.control_indices[k];
    const double l = plan.strength * group_gain(cfg.gains, index);
    const FaceSide side = side_of_axis(lm[index], lm, cfg.axis_epsilon);
    plan.sides[k] = side;
    switch (side) {
      case FaceSide::Left: plan.moving_vectors[k] = along * l; break;
      case FaceSide::Right: plan.moving_vectors[k] = -(along * l); break;
      case FaceSide::OnAxis: plan.moving_vectors[k] = Vec2{}; break;
    }
  }
  plan.anchors = border_anchor_points(width, height, cfg.border_anchors);
  return plan;
}

struct ControlPairsResult {
  ControlPairSet pairs;
  std::vector<std::string> diagnostics;
};

// Sources are the control landmarks followed by the anchors; targets add the
// moving vectors. Anchors that coincide with a landmark (or another anchor)
// are dropped with a diagnostic.
inline ControlPairsResult plan_to_control_pairs(const LandmarkSet& lm, const ShrinkPlan& plan) {
  std::vector<Point2> sources;
  std::vector<Point2> targets;
  std::vector<std::string> diagnostics;
  auto seen = [&](const Point2& p) {
    for (const Point2& s : sources) {
      if (s == p) return true;
    }
    return false;
  };
  for (std::size_t k = 0; k < kShrinkControlCount; ++k) {
    const Point2 p = lm[plan.control_indices[k]];
    if (seen(p)) {
      diagnostics.push_back("landmark " + std::to_string(plan.control_indices[k]) +
                            " duplicates an earlier control point; dropped");
      continue;
    }
    sources.push_back(p);
    targets.push_back(p + plan.moving_vectors[k]);
  }
  for (const Point2& a : plan.anchors) {
    if (seen(a)) {
      diagnostics.push_back("border anchor (" + std::to_string(a.x) + ", " + std::to_string(a.y) +
                            ") collides with an existing control point; dropped");
      continue;
    }
    sources.push_back(a);
    targets.push_back(a);
  }
  if (sources.empty()) {
    throw ValidationError("shrink plan produced no control pairs");
  }
  return {ControlPairSet(std::move(sources), std::move(targets)), std::move(diagnostics)};
}

}  // namespace facewarp

#endif  // FACEWARP_SHRINK_HPP
