#ifndef FACEWARP_MLS_HPP
#define FACEWARP_MLS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"
#include "facewarp/imaging.hpp"
#include "facewarp/parallel.hpp"

namespace facewarp {

// Moving Least Squares point deformation. For every point v a locally
// weighted best transform l_v is fitted to the control pairs (p_i -> q_i)
// with weights w_i = |p_i - v|^(-2 alpha) and f(v) = l_v(v). Points are row
// vectors throughout, as in the classical formulation.

enum class MlsMethod { Affine, Similarity, Rigid };

constexpr std::string_view method_name(MlsMethod m) {
  switch (m) {
    case MlsMethod::Affine: return "affine";
    case MlsMethod::Similarity: return "similarity";
    case MlsMethod::Rigid: return "rigid";
  }
  return "?";
}

inline std::optional<MlsMethod> parse_method(std::string_view s) {
  if (s == "affine") return MlsMethod::Affine;
  if (s == "similarity") return MlsMethod::Similarity;
  if (s == "rigid") return MlsMethod::Rigid;
  return std::nullopt;
}

inline constexpr double kDefaultSnapEpsilon = 1e-6;
inline constexpr double kMaxAffineCondition = 1e12;
inline constexpr double kDefaultRefineTolerance = 0.05;

struct MlsParams {
  double alpha = 1.0;
  MlsMethod method = MlsMethod::Rigid;
  int grid_spacing = 4;
  double snap_epsilon = kDefaultSnapEpsilon;
  // A grid cell whose bilinear prediction at its center misses the exact map
  // by more than this many pixels is evaluated per pixel instead. Infinity
  // gives plain bilinear interpolation everywhere.
  double refine_tolerance = kDefaultRefineTolerance;

  void validate() const {
    if (!(std::isfinite(alpha) && alpha > 0.0)) {
      throw ValidationError("MLS alpha must be a positive finite number");
    }
    if (grid_spacing < 1) {
      throw ValidationError("grid spacing must be at least 1 pixel");
    }
    if (!(std::isfinite(snap_epsilon) && snap_epsilon > 0.0)) {
      throw ValidationError("snap epsilon must be a positive finite number");
    }
    if (!(refine_tolerance >= 0.0)) {
      throw ValidationError("grid refinement tolerance must be non-negative");
    }
  }
};

// Paired control points p_i (sources) and their deformed positions q_i
// (targets).
class ControlPairSet {
 public:
  ControlPairSet(std::vector<Point2> sources, std::vector<Point2> targets)
      : sources_(std::move(sources)), targets_(std::move(targets)) {
    if (sources_.size() != targets_.size()) {
      throw ValidationError("control pair set has " + std::to_string(sources_.size()) +
                            " sources but " + std::to_string(targets_.size()) + " targets");
    }
    if (sources_.empty()) {
      throw ValidationError("control pair set is empty");
    }
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      if (!is_finite(sources_[i]) || !is_finite(targets_[i])) {
        throw ValidationError("control pair " + std::to_string(i) + " is not finite");
      }
    }
    std::vector<std::pair<Point2, std::size_t>> sorted;
    sorted.reserve(sources_.size());
    for (std::size_t i = 0; i < sources_.size(); ++i) sorted.emplace_back(sources_[i], i);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return a.first.x != b.first.x ? a.first.x < b.first.x : a.first.y < b.first.y;
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].first == sorted[i - 1].first) {
        throw DegenerateConfigurationError(
            "control points " + std::to_string(sorted[i - 1].second) + " and " +
                std::to_string(sorted[i].second) + " share the same source position",
            std::numeric_limits<double>::infinity());
      }
    }
  }

  std::size_t size() const { return sources_.size(); }
  std::span<const Point2> sources() const { return sources_; }
  std::span<const Point2> targets() const { return targets_; }

  // Roles exchanged: targets become sources. Used to build backward maps.
  ControlPairSet swapped() const { return ControlPairSet(targets_, sources_); }

 private:
  std::vector<Point2> sources_;
  std::vector<Point2> targets_;
};

struct Snap {
  std::size_t index;
  bool operator==(const Snap&) const = default;
};

namespace detail {

inline double inverse_weight(double squared_distance, double alpha) {
  return alpha == 1.0 ? 1.0 / squared_distance : 1.0 / std::pow(squared_distance, alpha);
}

}  // namespace detail

// w_i = 1 / |p_i - v|^(2 alpha), or Snap(j) when v lies within snap_epsilon of
// p_j (the weight is singular there and v maps straight to q_j).
inline std::variant<std::vector<double>, Snap> weights(const Point2& v,
                                                       std::span<const Point2> sources,
                                                       double alpha,
                                                       double snap_epsilon = kDefaultSnapEpsilon) {
  std::vector<double> w(sources.size());
  const double eps2 = snap_epsilon * snap_epsilon;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const double d2 = squared_norm(sources[i] - v);
    if (d2 < eps2) return Snap{i};
    w[i] = detail::inverse_weight(d2, alpha);
  }
  return w;
}

// Weighted centroids and centroid deviations at v.
struct MlsLocal {
  std::vector<double> weights;
  Point2 p_star;
  Point2 q_star;
  std::vector<Vec2> p_hat;
  std::vector<Vec2> q_hat;
};

inline MlsLocal local_frame(const Point2& v, const ControlPairSet& cps, double alpha,
                            double snap_epsilon = kDefaultSnapEpsilon) {
  auto w = weights(v, cps.sources(), alpha, snap_epsilon);
  if (std::holds_alternative<Snap>(w)) {
    throw ValidationError("local frame is undefined at control point " +
                          std::to_string(std::get<Snap>(w).index));
  }
  MlsLocal local;
  local.weights = std::move(std::get<std::vector<double>>(w));
  double total = 0.0;
  Vec2 ps, qs;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const double wi = local.weights[i];
    total += wi;
    ps = ps + wi * (cps.sources()[i] - Point2{});
    qs = qs + wi * (cps.targets()[i] - Point2{});
  }
  local.p_star = Point2{} + ps / total;
  local.q_star = Point2{} + qs / total;
  local.p_hat.reserve(cps.size());
  local.q_hat.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    local.p_hat.push_back(cps.sources()[i] - local.p_star);
    local.q_hat.push_back(cps.targets()[i] - local.q_star);
  }
  return local;
}

// Ratio of the eigenvalues of the symmetric matrix [[a, b], [b, c]];
// infinity when it is not positive definite.
inline double symmetric_condition(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double x = 0.5 * (a - c);
  double radius = std::sqrt(x * x + b * b);
  // std::hypot is slow; only needed when the squares under- or overflow.
  if (!std::isnormal(radius) && (x != 0.0 || b != 0.0)) radius = std::hypot(x, b);
  const double hi = mean + radius;
  const double lo = mean - radius;
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

struct MlsResult {
  Point2 point;
  bool snapped = false;
  // Rigid only: the rotation direction vanished and a translation was used.
  bool rigid_fallback = false;
};

// Evaluates MLS maps for one control set, reusing a weight buffer between
// calls. Not thread-safe; use one evaluator per thread.
class MlsEvaluator {
 public:
  MlsEvaluator(const ControlPairSet& cps, double alpha, double snap_epsilon = kDefaultSnapEpsilon)
      : cps_(&cps), n_(cps.size()), alpha_(alpha), eps2_(snap_epsilon * snap_epsilon) {
    px_.resize(n_), py_.resize(n_), qx_.resize(n_), qy_.resize(n_), w_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      px_[i] = cps.sources()[i].x;
      py_[i] = cps.sources()[i].y;
      qx_[i] = cps.targets()[i].x;
      qy_[i] = cps.targets()[i].y;
    }
  }

  MlsResult evaluate(MlsMethod method, const Point2& v) {
    switch (method) {
      case MlsMethod::Affine: return affine(v);
      case MlsMethod::Similarity: return similarity(v);
      case MlsMethod::Rigid: return rigid(v);
    }
    return {v};
  }

  MlsResult affine(const Point2& v) {
    if (auto early = prepare(v)) return *early;
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    double c00 = 0.0, c01 = 0.0, c10 = 0.0, c11 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double phx = px_[i] - p_star_.x, phy = py_[i] - p_star_.y;
      const double qhx = qx_[i] - q_star_.x, qhy = qy_[i] - q_star_.y;
      const double wx = w_[i] * phx;
      const double wy = w_[i] * phy;
      m00 += wx * phx;
      m01 += wx * phy;
      m11 += wy * phy;
      c00 += wx * qhx;
      c01 += wx * qhy;
      c10 += wy * qhx;
      c11 += wy * qhy;
    }
    const double cond = symmetric_condition(m00, m01, m11);
    if (!(cond <= kMaxAffineCondition)) {
      throw DegenerateConfigurationError(
          "affine moment matrix is singular or ill-conditioned (condition " +
              std::to_string(cond) + "); control points may be collinear",
          cond);
    }
    const double det = m00 * m11 - m01 * m01;
    const Vec2 d = v - p_star_;
    // (v - p*) M^-1 C + q*
    const double rx = (d.dx * m11 - d.dy * m01) / det;
    const double ry = (-d.dx * m01 + d.dy * m00) / det;
    return {{rx * c00 + ry * c10 + q_star_.x, rx * c01 + ry * c11 + q_star_.y}};
  }

  MlsResult similarity(const Point2& v) {
    if (auto early = prepare(v)) return *early;
    double mu = 0.0;
    const Vec2 sum = similarity_sum(v, &mu);
    if (!(mu > 0.0)) {
      throw DegenerateConfigurationError("similarity normalizer vanished; all control points "
                                         "coincide with their centroid",
                                         std::numeric_limits<double>::infinity());
    }
    return {{sum.dx / mu + q_star_.x, sum.dy / mu + q_star_.y}};
  }

  MlsResult rigid(const Point2& v) {
    if (auto early = prepare(v)) return *early;
    const Vec2 direction = similarity_sum(v, nullptr);
    const double len = norm(direction);
    const Vec2 d = v - p_star_;
    if (!(len > 0.0) || !std::isfinite(len)) {
      return {q_star_ + d, false, true};
    }
    const double scale = norm(d) / len;
    return {{direction.dx * scale + q_star_.x, direction.dy * scale + q_star_.y}};
  }

  const ControlPairSet& controls() const { return *cps_; }

 private:
  // Computes weights and centroids. Returns the final answer for the snap and
  // single-pair cases.
  std::optional<MlsResult> prepare(const Point2& v) {
    if (n_ == 1) {
      const Point2 p{px_[0], py_[0]};
      return MlsResult{v + (Point2{qx_[0], qy_[0]} - p), squared_norm(p - v) < eps2_};
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double dx = px_[i] - v.x, dy = py_[i] - v.y;
      w_[i] = dx * dx + dy * dy;
      nearest = std::min(nearest, w_[i]);
    }
    if (nearest < eps2_) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (w_[i] < eps2_) return MlsResult{{qx_[i], qy_[i]}, true};
      }
    }
    if (alpha_ == 1.0) {
      for (std::size_t i = 0; i < n_; ++i) w_[i] = 1.0 / w_[i];
    } else {
      for (std::size_t i = 0; i < n_; ++i) w_[i] = 1.0 / std::pow(w_[i], alpha_);
    }
    double total = 0.0, sx = 0.0, sy = 0.0, tx = 0.0, ty = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      total += w_[i];
      sx += w_[i] * px_[i];
      sy += w_[i] * py_[i];
      tx += w_[i] * qx_[i];
      ty += w_[i] * qy_[i];
    }
    p_star_ = {sx / total, sy / total};
    q_star_ = {tx / total, ty / total};
    return std::nullopt;
  }

  // Sum_i q_hat_i A_i with
  //   A_i = w_i [p_hat_i; -p_hat_i^perp] [v - p*; -(v - p*)^perp]^T,
  // optionally accumulating mu_s = Sum_i w_i |p_hat_i|^2.
  Vec2 similarity_sum(const Point2& v, double* mu) {
    const Vec2 d = v - p_star_;
    const Vec2 nd = -perp(d);
    double sx = 0.0, sy = 0.0, mu_acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const Vec2 ph{px_[i] - p_star_.x, py_[i] - p_star_.y};
      const Vec2 qh{qx_[i] - q_star_.x, qy_[i] - q_star_.y};
      const Vec2 nph = -perp(ph);
      const double wi = w_[i];
      // Rows of A_i are w_i * (row . [d; nd]^T).
      const double a00 = wi * (ph.dx * d.dx + ph.dy * d.dy);
      const double a01 = wi * (ph.dx * nd.dx + ph.dy * nd.dy);
      const double a10 = wi * (nph.dx * d.dx + nph.dy * d.dy);
      const double a11 = wi * (nph.dx * nd.dx + nph.dy * nd.dy);
      sx += qh.dx * a00 + qh.dy * a10;
      sy += qh.dx * a01 + qh.dy * a11;
      mu_acc += wi * squared_norm(ph);
    }
    if (mu) *mu = mu_acc;
    return {sx, sy};
  }

  const ControlPairSet* cps_;
  std::size_t n_;
  double alpha_;
  double eps2_;
  // Structure-of-arrays copies of the controls.
  std::vector<double> px_, py_, qx_, qy_;
  std::vector<double> w_;
  Point2 p_star_;
  Point2 q_star_;
};

inline Point2 map_affine(const Point2& v, const ControlPairSet& cps, double alpha,
                         double snap_epsilon = kDefaultSnapEpsilon) {
  return MlsEvaluator(cps, alpha, snap_epsilon).affine(v).point;
}

inline Point2 map_similarity(const Point2& v, const ControlPairSet& cps, double alpha,
                             double snap_epsilon = kDefaultSnapEpsilon) {
  return MlsEvaluator(cps, alpha, snap_epsilon).similarity(v).point;
}

inline MlsResult map_rigid_detailed(const Point2& v, const ControlPairSet& cps, double alpha,
                                    double snap_epsilon = kDefaultSnapEpsilon) {
  return MlsEvaluator(cps, alpha, snap_epsilon).rigid(v);
}

inline Point2 map_rigid(const Point2& v, const ControlPairSet& cps, double alpha,
                        double snap_epsilon = kDefaultSnapEpsilon) {
  return map_rigid_detailed(v, cps, alpha, snap_epsilon).point;
}

inline Point2 map_point(MlsMethod method, const Point2& v, const ControlPairSet& cps,
                        double alpha, double snap_epsilon = kDefaultSnapEpsilon) {
  return MlsEvaluator(cps, alpha, snap_epsilon).evaluate(method, v).point;
}

// ---------------------------------------------------------------------------
// Image warping

namespace detail {

// Lattice coordinates 0, s, 2s, ... plus the last pixel.
inline std::vector<int> grid_lines(int extent, int spacing) {
  std::vector<int> lines;
  for (int x = 0; x < extent; x += spacing) lines.push_back(x);
  if (lines.back() != extent - 1) lines.push_back(extent - 1);
  return lines;
}

}  // namespace detail

// Backward map for warping an image with the control pairs `cps` (p -> q).
// Output pixels live in q-space, so the MLS map is evaluated with the roles
// swapped (q -> p). The map is exact at every grid vertex and bilinearly
// interpolated inside each cell; spacing 1 evaluates every pixel. Cells whose
// center misses the exact map by more than params.refine_tolerance are
// evaluated per pixel (this happens where neighbouring controls converge).
inline DenseMap build_backward_warp(const ControlPairSet& cps, const MlsParams& params, int width,
                                    int height, int threads = default_thread_count()) {
  params.validate();
  if (width < 1 || height < 1) {
    throw ValidationError("warp extent must be positive");
  }
  const ControlPairSet inverse = cps.swapped();
  DenseMap map(width, height);

  if (params.grid_spacing == 1 || width < 2 || height < 2) {
    parallel_rows(height, threads, [&](int first, int last) {
      MlsEvaluator eval(inverse, params.alpha, params.snap_epsilon);
      for (int y = first; y < last; ++y) {
        for (int x = 0; x < width; ++x) {
          map.at(x, y) = eval.evaluate(params.method, Point2{double(x), double(y)}).point;
        }
      }
    });
    return map;
  }

  const std::vector<int> xs = detail::grid_lines(width, params.grid_spacing);
  const std::vector<int> ys = detail::grid_lines(height, params.grid_spacing);
  const std::size_t nx = xs.size();
  const std::size_t cells_x = nx - 1;
  std::vector<Point2> vertices(nx * ys.size());
  std::vector<char> refine(cells_x * (ys.size() - 1), 0);
  const bool refining = std::isfinite(params.refine_tolerance);

  parallel_rows(static_cast<int>(ys.size()), threads, [&](int first, int last) {
    MlsEvaluator eval(inverse, params.alpha, params.snap_epsilon);
    for (int j = first; j < last; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        vertices[j * nx + i] =
            eval.evaluate(params.method, Point2{double(xs[i]), double(ys[j])}).point;
      }
    }
  });

  if (refining) {
    parallel_rows(static_cast<int>(ys.size() - 1), threads, [&](int first, int last) {
      MlsEvaluator eval(inverse, params.alpha, params.snap_epsilon);
      for (int j = first; j < last; ++j) {
        for (std::size_t i = 0; i < cells_x; ++i) {
          const Point2 center{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
          const Point2& v00 = vertices[j * nx + i];
          const Point2& v10 = vertices[j * nx + i + 1];
          const Point2& v01 = vertices[(j + 1) * nx + i];
          const Point2& v11 = vertices[(j + 1) * nx + i + 1];
          const Point2 predicted{0.25 * (v00.x + v10.x + v01.x + v11.x),
                                 0.25 * (v00.y + v10.y + v01.y + v11.y)};
          const Point2 exact = eval.evaluate(params.method, center).point;
          refine[j * cells_x + i] = distance(predicted, exact) > params.refine_tolerance;
        }
      }
    });
  }

  if (refining) {
    // Sharp bends rarely stay inside one cell; refine the neighbours too.
    const std::vector<char> flagged = refine;
    const std::size_t cells_y = ys.size() - 1;
    for (std::size_t j = 0; j < cells_y; ++j) {
      for (std::size_t i = 0; i < cells_x; ++i) {
        if (!flagged[j * cells_x + i]) continue;
        for (std::size_t jj = j == 0 ? 0 : j - 1; jj <= std::min(j + 1, cells_y - 1); ++jj) {
          for (std::size_t ii = i == 0 ? 0 : i - 1; ii <= std::min(i + 1, cells_x - 1); ++ii) {
            refine[jj * cells_x + ii] = 1;
          }
        }
      }
    }
  }

  const int spacing = params.grid_spacing;
  parallel_rows(height, threads, [&](int first, int last) {
    MlsEvaluator eval(inverse, params.alpha, params.snap_epsilon);
    for (int y = first; y < last; ++y) {
      const std::size_t j = std::min<std::size_t>(y / spacing, ys.size() - 2);
      const double fy = double(y - ys[j]) / double(ys[j + 1] - ys[j]);
      for (int x = 0; x < width; ++x) {
        const std::size_t i = std::min<std::size_t>(x / spacing, cells_x - 1);
        if (refine[j * cells_x + i]) {
          map.at(x, y) = eval.evaluate(params.method, Point2{double(x), double(y)}).point;
          continue;
        }
        const double fx = double(x - xs[i]) / double(xs[i + 1] - xs[i]);
        const Point2& v00 = vertices[j * nx + i];
        const Point2& v10 = vertices[j * nx + i + 1];
        const Point2& v01 = vertices[(j + 1) * nx + i];
        const Point2& v11 = vertices[(j + 1) * nx + i + 1];
        const double w00 = (1.0 - fx) * (1.0 - fy);
        const double w10 = fx * (1.0 - fy);
        const double w01 = (1.0 - fx) * fy;
        const double w11 = fx * fy;
        map.at(x, y) = {w00 * v00.x + w10 * v10.x + w01 * v01.x + w11 * v11.x,
                        w00 * v00.y + w10 * v10.y + w01 * v01.y + w11 * v11.y};
      }
    }
  });
  return map;
}

inline RasterImage deform_image(const RasterImage& img, const ControlPairSet& cps,
                                const MlsParams& params, int threads = default_thread_count()) {
  const DenseMap map = build_backward_warp(cps, params, img.width(), img.height(), threads);
  return warp_backward(img, map, threads);
}

}  // namespace facewarp

#endif  // FACEWARP_MLS_HPP
