#ifndef FACEWARP_LANDMARKS_HPP
#define FACEWARP_LANDMARKS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"

namespace facewarp {

inline constexpr std::size_t kLandmarkCount = 106;
inline constexpr int kLandmarkSchemaVersion = 1;

// Landmark groups of the 106-point layout. Index ranges:
//
//   Cheek           0-32   jaw contour, left jaw -> chin (16) -> right jaw
//   LeftEyebrow    33-41   outer end -> inner end
//   RightEyebrow   42-50   outer end -> inner end
//   LeftEye        51-58   51 outer canthus, 52-54 upper lid, 55 inner
//                          canthus, 56-58 lower lid
//   LeftEyeCenter  59
//   RightEye       60-67   same order as the left eye (60 outer, 64 inner)
//   RightEyeCenter 68
//   Nose           69-83   69-72 bridge (top -> tip), 73-83 lower arc left
//                          -> right, 78 on the midline
//   MouthOuter     84-95   84 left corner, 85-89 upper lip (87 center),
//                          90 right corner, 91-95 lower lip right -> left
//   MouthInner     96-105  96 left corner, 97-99 upper lip (98 center),
//                          100 right corner, 101-105 lower lip right -> left
//
// "Left" is the eye with the smaller x in an upright image.
enum class GroupId {
  Cheek,
  LeftEyebrow,
  RightEyebrow,
  LeftEye,
  RightEye,
  LeftEyeCenter,
  RightEyeCenter,
  Nose,
  MouthOuter,
  MouthInner,
};

inline constexpr std::array<GroupId, 10> kAllGroups = {
    GroupId::Cheek,         GroupId::LeftEyebrow,    GroupId::RightEyebrow, GroupId::LeftEye,
    GroupId::RightEye,      GroupId::LeftEyeCenter,  GroupId::RightEyeCenter, GroupId::Nose,
    GroupId::MouthOuter,    GroupId::MouthInner,
};

// Half-open index range [first, last).
struct IndexRange {
  std::size_t first;
  std::size_t last;

  constexpr std::size_t size() const { return last - first; }
  constexpr bool contains(std::size_t i) const { return i >= first && i < last; }
};

constexpr IndexRange group_range(GroupId g) {
  switch (g) {
    case GroupId::Cheek: return {0, 33};
    case GroupId::LeftEyebrow: return {33, 42};
    case GroupId::RightEyebrow: return {42, 51};
    case GroupId::LeftEye: return {51, 59};
    case GroupId::LeftEyeCenter: return {59, 60};
    case GroupId::RightEye: return {60, 68};
    case GroupId::RightEyeCenter: return {68, 69};
    case GroupId::Nose: return {69, 84};
    case GroupId::MouthOuter: return {84, 96};
    case GroupId::MouthInner: return {96, 106};
  }
  return {0, 0};
}

constexpr std::string_view group_name(GroupId g) {
  switch (g) {
    case GroupId::Cheek: return "cheek";
    case GroupId::LeftEyebrow: return "left-eyebrow";
    case GroupId::RightEyebrow: return "right-eyebrow";
    case GroupId::LeftEye: return "left-eye";
    case GroupId::RightEye: return "right-eye";
    case GroupId::LeftEyeCenter: return "left-eye-center";
    case GroupId::RightEyeCenter: return "right-eye-center";
    case GroupId::Nose: return "nose";
    case GroupId::MouthOuter: return "mouth-outer";
    case GroupId::MouthInner: return "mouth-inner";
  }
  return "?";
}

inline GroupId group_of(std::size_t index) {
  for (GroupId g : kAllGroups) {
    if (group_range(g).contains(index)) {
      return g;
    }
  }
  throw ValidationError("landmark index " + std::to_string(index) + " out of range");
}

enum class EyeSide { Left, Right };

namespace landmark_index {
inline constexpr std::size_t kChin = 16;
inline constexpr std::size_t kLeftOuterCanthus = 51;
inline constexpr std::size_t kLeftInnerCanthus = 55;
inline constexpr std::size_t kLeftEyeCenter = 59;
inline constexpr std::size_t kRightOuterCanthus = 60;
inline constexpr std::size_t kRightInnerCanthus = 64;
inline constexpr std::size_t kRightEyeCenter = 68;
inline constexpr std::size_t kMouthInnerTopCenter = 98;

constexpr std::size_t eye_center(EyeSide s) {
  return s == EyeSide::Left ? kLeftEyeCenter : kRightEyeCenter;
}
constexpr std::size_t outer_canthus(EyeSide s) {
  return s == EyeSide::Left ? kLeftOuterCanthus : kRightOuterCanthus;
}
constexpr std::size_t inner_canthus(EyeSide s) {
  return s == EyeSide::Left ? kLeftInnerCanthus : kRightInnerCanthus;
}
}  // namespace landmark_index

// Index of the anatomically mirrored landmark (left <-> right). Points on the
// facial midline map to themselves.
constexpr std::size_t mirrored_index(std::size_t i) {
  if (i <= 32) return 32 - i;                  // cheek
  if (i <= 41) return i + 9;                   // left brow -> right brow
  if (i <= 50) return i - 9;
  if (i <= 59) return i + 9;                   // left eye (+center) -> right
  if (i <= 68) return i - 9;
  if (i <= 72) return i;                       // nose bridge
  if (i <= 83) return 73 + 83 - i;             // nose lower arc
  if (i <= 90) return 84 + 90 - i;             // outer mouth corners + upper lip
  if (i <= 95) return 91 + 95 - i;             // outer lower lip
  if (i <= 100) return 96 + 100 - i;           // inner corners + upper lip
  if (i <= 105) return 101 + 105 - i;          // inner lower lip
  return i;
}

struct ImageExtent {
  int width = 0;
  int height = 0;
  bool operator==(const ImageExtent&) const = default;
};

// Validated, immutable set of 106 facial landmarks in pixel coordinates.
class LandmarkSet {
 public:
  using Points = std::array<Point2, kLandmarkCount>;

  explicit LandmarkSet(const Points& points, std::optional<ImageExtent> declared_extent = {})
      : points_(points), declared_extent_(declared_extent) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!is_finite(points_[i])) {
        throw ValidationError("landmark " + std::to_string(i) + " has a non-finite coordinate");
      }
    }
    if (points_[landmark_index::kLeftEyeCenter] == points_[landmark_index::kRightEyeCenter]) {
      throw DegenerateGeometryError("left and right eye centers coincide (indices 59 and 68)");
    }
  }

  const Point2& operator[](std::size_t i) const { return points_.at(i); }
  std::span<const Point2, kLandmarkCount> points() const { return points_; }
  int schema_version() const { return kLandmarkSchemaVersion; }
  const std::optional<ImageExtent>& declared_extent() const { return declared_extent_; }

  Point2 eye_center(EyeSide side) const { return points_[landmark_index::eye_center(side)]; }

  bool operator==(const LandmarkSet& o) const { return points_ == o.points_; }

 private:
  Points points_;
  std::optional<ImageExtent> declared_extent_;
};

inline Angle eye_axis_angle(const LandmarkSet& lm) {
  return eye_axis_angle(lm.eye_center(EyeSide::Left), lm.eye_center(EyeSide::Right));
}

struct IndexedPoint {
  std::size_t index;
  Point2 point;
  bool operator==(const IndexedPoint&) const = default;
};

inline std::vector<IndexedPoint> select_group(const LandmarkSet& lm, GroupId g) {
  const IndexRange r = group_range(g);
  std::vector<IndexedPoint> out;
  out.reserve(r.size());
  for (std::size_t i = r.first; i < r.last; ++i) {
    out.push_back({i, lm[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON I/O
//
//   {"schema_version": 1, "width": W, "height": H,
//    "points": [[x0, y0], ..., [x105, y105]]}
//
// width/height are optional. Non-finite coordinates may appear as the strings
// "NaN", "Infinity" or "-Infinity" and are rejected with their index.

namespace detail {

inline double parse_coordinate(const nlohmann::json& v, std::size_t index, int axis) {
  const char* axis_name = axis == 0 ? "x" : "y";
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ValidationError("landmark " + std::to_string(index) + " has a non-finite " +
                            axis_name + " coordinate");
    }
    return d;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "NaN" || s == "nan" || s == "Infinity" || s == "-Infinity" || s == "inf" ||
        s == "-inf") {
      throw ValidationError("landmark " + std::to_string(index) + " has a non-finite " +
                            axis_name + " coordinate (" + s + ")");
    }
  }
  throw ValidationError("landmark " + std::to_string(index) + ": " + axis_name +
                        " coordinate is not a number");
}

inline int parse_extent_field(const nlohmann::json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > (1LL << 30)) {
    throw ValidationError(std::string("'") + key + "' must be a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

}  // namespace detail

inline LandmarkSet parse_landmarks(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("malformed landmark JSON at byte ") + std::to_string(e.byte) +
                  ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    // e.g. a literal that overflows double
    throw IoError(std::string("malformed landmark JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("landmark JSON must be an object");
  }
  if (!doc.contains("schema_version")) {
    throw ValidationError("landmark JSON lacks 'schema_version'");
  }
  const auto& version = doc["schema_version"];
  if (!version.is_number_integer() || version.get<long long>() != kLandmarkSchemaVersion) {
    throw ValidationError("unsupported landmark schema_version " + version.dump() +
                          " (expected " + std::to_string(kLandmarkSchemaVersion) + ")");
  }

  std::optional<ImageExtent> extent;
  const bool has_w = doc.contains("width");
  const bool has_h = doc.contains("height");
  if (has_w != has_h) {
    throw ValidationError("'width' and 'height' must be given together");
  }
  if (has_w) {
    extent = ImageExtent{detail::parse_extent_field(doc, "width"),
                         detail::parse_extent_field(doc, "height")};
  }

  if (!doc.contains("points") || !doc["points"].is_array()) {
    throw ValidationError("landmark JSON lacks a 'points' array");
  }
  const auto& pts = doc["points"];
  if (pts.size() != kLandmarkCount) {
    throw ValidationError("expected " + std::to_string(kLandmarkCount) + " landmarks, found " +
                          std::to_string(pts.size()));
  }
  LandmarkSet::Points points;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const auto& p = pts[i];
    if (!p.is_array() || p.size() != 2) {
      throw ValidationError("landmark " + std::to_string(i) + " is not an [x, y] pair");
    }
    points[i] = {detail::parse_coordinate(p[0], i, 0), detail::parse_coordinate(p[1], i, 1)};
  }
  return LandmarkSet(points, extent);
}

inline std::string serialize_landmarks(const LandmarkSet& lm) {
  nlohmann::json doc;
  doc["schema_version"] = lm.schema_version();
  if (lm.declared_extent()) {
    doc["width"] = lm.declared_extent()->width;
    doc["height"] = lm.declared_extent()->height;
  }
  auto pts = nlohmann::json::array();
  for (const Point2& p : lm.points()) {
    pts.push_back({p.x, p.y});
  }
  doc["points"] = std::move(pts);
  return doc.dump();
}

// ---------------------------------------------------------------------------
// Validation against an image

enum class IssueKind { OutOfBounds, DegenerateEyeRadius, ExtentMismatch };

struct ValidationIssue {
  IssueKind kind;
  std::size_t index;  // offending landmark; eye-center index for eye issues
  std::string message;
};

inline std::vector<ValidationIssue> validate_against_image(const LandmarkSet& lm, int width,
                                                           int height) {
  std::vector<ValidationIssue> report;
  if (lm.declared_extent() && *lm.declared_extent() != ImageExtent{width, height}) {
    report.push_back({IssueKind::ExtentMismatch, 0,
                      "landmark file declares " + std::to_string(lm.declared_extent()->width) +
                          "x" + std::to_string(lm.declared_extent()->height) +
                          " but the image is " + std::to_string(width) + "x" +
                          std::to_string(height)});
  }
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const Point2& p = lm[i];
    if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height)) {
      report.push_back({IssueKind::OutOfBounds, i,
                        "landmark " + std::to_string(i) + " (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") lies outside the " +
                            std::to_string(width) + "x" + std::to_string(height) + " image"});
    }
  }
  for (EyeSide side : {EyeSide::Left, EyeSide::Right}) {
    const std::size_t c = landmark_index::eye_center(side);
    const std::size_t inner = landmark_index::inner_canthus(side);
    const std::size_t outer = landmark_index::outer_canthus(side);
    const char* name = side == EyeSide::Left ? "left" : "right";
    if (lm[c] == lm[inner]) {
      report.push_back({IssueKind::DegenerateEyeRadius, c,
                        std::string(name) + " eye center coincides with its inner canthus " +
                            "(landmark " + std::to_string(inner) + "); the eye radius is zero"});
    }
    if (lm[outer] == lm[inner]) {
      report.push_back({IssueKind::DegenerateEyeRadius, outer,
                        std::string(name) + " eye canthi coincide; the canthus-midpoint " +
                            "radius is zero"});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Synthetic fixture

namespace detail {

// Upright face layout in units of min(width, height), relative to the image
// center. Only the image-left half is described; the rest is mirrored.
struct SyntheticLayout {
  static constexpr double kJawRadiusX = 0.30;
  static constexpr double kJawRadiusY = 0.38;
  static constexpr double kJawCenterY = -0.02;
  static constexpr double kEyeX = -0.12;
  static constexpr double kEyeY = -0.10;
  static constexpr double kEyeHalfWidth = 0.05;
  static constexpr double kEyeHalfHeight = 0.022;
  static constexpr double kPupilOffsetY = -0.004;
};

}  // namespace detail

// Offset of each eye-center landmark from its canthus midpoint in the
// synthetic fixture.
inline Vec2 synthetic_pupil_offset(int width, int height, Angle tilt) {
  const double s = std::min(width, height);
  return rotate(Vec2{0.0, detail::SyntheticLayout::kPupilOffsetY * s}, tilt);
}

// Deterministic, schema-valid stylized face centered in a width x height
// image and rotated by `tilt` about the image center.
inline LandmarkSet synthetic_face(int width, int height, Angle tilt = Angle()) {
  if (width < 64 || height < 64) {
    throw ValidationError("synthetic_face requires an image of at least 64x64");
  }
  using L = detail::SyntheticLayout;
  const double s = std::min(width, height);
  const Point2 center{(width - 1) / 2.0, (height - 1) / 2.0};
  LandmarkSet::Points pts{};
  auto at = [&](double u, double v) { return Point2{center.x + u * s, center.y + v * s}; };
  const double pi = std::numbers::pi;

  for (int k = 0; k <= 32; ++k) {
    const double theta = pi - k * pi / 32.0;
    pts[k] = at(L::kJawRadiusX * std::cos(theta), L::kJawCenterY + L::kJawRadiusY * std::sin(theta));
  }
  // Brows, outer -> inner.
  for (int k = 0; k < 9; ++k) {
    const double t = k / 8.0;
    const double u = L::kEyeX - 0.07 + 0.13 * t;
    const double v = L::kEyeY - 0.045 - 0.02 * std::sin(pi * (0.15 + 0.7 * t));
    pts[33 + k] = at(u, v);
  }
  // Eye outline: outer canthus, upper lid, inner canthus, lower lid.
  for (int k = 0; k < 8; ++k) {
    const double phi = pi - k * pi / 4.0;
    pts[51 + k] = at(L::kEyeX + L::kEyeHalfWidth * std::cos(phi),
                     L::kEyeY - L::kEyeHalfHeight * std::sin(phi));
  }
  pts[59] = at(L::kEyeX, L::kEyeY + L::kPupilOffsetY);
  // Nose bridge on the midline, then the lower arc.
  for (int k = 0; k < 4; ++k) {
    pts[69 + k] = at(0.0, -0.08 + 0.03 * k);
  }
  for (int k = 0; k < 11; ++k) {
    const double phi = pi - k * pi / 10.0;
    pts[73 + k] = at(0.05 * std::cos(phi), 0.05 + 0.015 * std::sin(phi));
  }
  // Outer mouth: left corner, upper lip, right corner, lower lip (right -> left).
  pts[84] = at(-0.08, 0.16);
  for (int k = 0; k < 5; ++k) {
    const double u = -0.053 + 0.0265 * k;
    pts[85 + k] = at(u, 0.135 + 0.006 * std::abs(k - 2));
  }
  pts[90] = at(0.08, 0.16);
  for (int k = 0; k < 5; ++k) {
    const double u = 0.053 - 0.0265 * k;
    pts[91 + k] = at(u, 0.19 - 0.008 * std::abs(k - 2));
  }
  // Inner mouth.
  pts[96] = at(-0.06, 0.16);
  for (int k = 0; k < 3; ++k) {
    pts[97 + k] = at(-0.03 + 0.03 * k, 0.152);
  }
  pts[100] = at(0.06, 0.16);
  for (int k = 0; k < 5; ++k) {
    const double u = 0.04 - 0.02 * k;
    pts[101 + k] = at(u, 0.17 - 0.003 * std::abs(k - 2));
  }
  // Enforce exact bilateral symmetry: mirror the lower-indexed member of each
  // pair and pin midline points to the vertical axis.
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const std::size_t j = mirrored_index(i);
    if (j == i) {
      pts[i].x = center.x;
    } else if (j > i) {
      pts[j] = Point2{2.0 * center.x - pts[i].x, pts[i].y};
    }
  }

  for (Point2& p : pts) {
    p = rotate_about(p, center, tilt);
  }
  return LandmarkSet(pts, ImageExtent{width, height});
}

}  // namespace facewarp

#endif  // FACEWARP_LANDMARKS_HPP
