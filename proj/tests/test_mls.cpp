#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include <gtest/gtest.h>

#include "facewarp/mls.hpp"
#include "oracles.hpp"

namespace facewarp {
namespace {

constexpr MlsMethod kMethods[] = {MlsMethod::Affine, MlsMethod::Similarity, MlsMethod::Rigid};

double dist(const Point2& a, const Point2& b) { return distance(a, b); }

TEST(Weights, InverseSquaredDistance) {
  const std::vector<Point2> src = {{1, 0}, {0, 2}};
  const auto w = std::get<std::vector<double>>(weights({0, 0}, src, 1.0));
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
}

TEST(Weights, SnapNearControlPoint) {
  const std::vector<Point2> src = {{0, 0}, {5, 5}, {9, 1}, {3, 3}, {7, 7}};
  const auto r = weights({3.0 + 1e-8, 3.0}, src, 1.0);
  ASSERT_TRUE(std::holds_alternative<Snap>(r));
  EXPECT_EQ(std::get<Snap>(r).index, 3u);
  EXPECT_TRUE(std::holds_alternative<std::vector<double>>(weights({3.0 + 1e-5, 3.0}, src, 1.0)));
}

// Normalized weights at v = 0 for five points at squared distances
// {1, 4, 9, 16, 50}; frozen from a direct evaluation of |p - v|^(-2 alpha).
TEST(Weights, ExponentConcentratesOnNearestPoint) {
  const std::vector<Point2> src = {{1, 0}, {0, 2}, {-3, 0}, {0, -4}, {5, 5}};
  const std::vector<std::pair<double, std::vector<double>>> expected = {
      {0.1, {0.24346338866225686, 0.2119471901419109, 0.19543818084617812, 0.18451074576707127,
             0.1646404945825828}},
      {1.0, {0.692707331152588, 0.173176832788147, 0.07696748123917645, 0.04329420819703675,
             0.01385414662305176}},
      {5.0, {0.9990065334950738, 0.000975592317866283, 1.6918263365934627e-05,
             9.52726872916292e-07, 3.1968209071842365e-09}},
  };
  double previous_peak = 0.0;
  for (const auto& [alpha, normalized] : expected) {
    auto w = std::get<std::vector<double>>(weights({0, 0}, src, alpha));
    double total = 0.0;
    for (double x : w) total += x;
    for (std::size_t i = 0; i < w.size(); ++i) {
      EXPECT_NEAR(w[i] / total, normalized[i], 1e-12 * std::max(1.0, normalized[i]))
          << "alpha " << alpha << " i " << i;
    }
    EXPECT_GT(w[0] / total, previous_peak);
    previous_peak = w[0] / total;
  }
}

TEST(LocalFrame, EqualWeightsGiveMean) {
  const ControlPairSet cps({{0, 0}, {2, 0}}, {{0, 0}, {2, 0}});
  const MlsLocal local = local_frame({1, 5}, cps, 1.0);
  EXPECT_DOUBLE_EQ(local.p_star.x, 1.0);
  EXPECT_DOUBLE_EQ(local.p_star.y, 0.0);
}

TEST(LocalFrame, SinglePoint) {
  const ControlPairSet cps({{4, 7}}, {{5, 9}});
  const MlsLocal local = local_frame({0, 0}, cps, 1.0);
  EXPECT_EQ(local.p_star, (Point2{4, 7}));
  EXPECT_EQ(local.q_star, (Point2{5, 9}));
  EXPECT_EQ(local.p_hat[0], (Vec2{0, 0}));
}

TEST(LocalFrame, MatchesIndependentRecomputation) {
  std::mt19937_64 rng(21);
  const auto rp = oracle::random_pairs(rng, 5);
  const ControlPairSet cps(rp.sources, rp.targets);
  const Point2 v{123.25, 301.5};
  const MlsLocal local = local_frame(v, cps, 1.0);
  const Eigen::VectorXd w = oracle::weights({v.x, v.y}, rp.sources, 1.0);
  Eigen::Vector2d ps = Eigen::Vector2d::Zero(), qs = Eigen::Vector2d::Zero();
  for (int i = 0; i < 5; ++i) {
    ps += w(i) * Eigen::Vector2d(rp.sources[i].x, rp.sources[i].y);
    qs += w(i) * Eigen::Vector2d(rp.targets[i].x, rp.targets[i].y);
  }
  ps /= w.sum();
  qs /= w.sum();
  EXPECT_NEAR(local.p_star.x, ps.x(), 1e-9);
  EXPECT_NEAR(local.p_star.y, ps.y(), 1e-9);
  EXPECT_NEAR(local.q_star.x, qs.x(), 1e-9);
  EXPECT_NEAR(local.q_star.y, qs.y(), 1e-9);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(local.weights[i], w(i), 1e-15 * w(i));
    EXPECT_NEAR(local.p_hat[i].dx, rp.sources[i].x - ps.x(), 1e-9);
    EXPECT_NEAR(local.q_hat[i].dy, rp.targets[i].y - qs.y(), 1e-9);
  }
  EXPECT_THROW(local_frame(rp.sources[2], cps, 1.0), ValidationError);
}

TEST(ControlPairSet, Validation) {
  EXPECT_THROW(ControlPairSet({}, {}), ValidationError);
  EXPECT_THROW(ControlPairSet({{0, 0}}, {{0, 0}, {1, 1}}), ValidationError);
  EXPECT_THROW(ControlPairSet({{0, 0}, {0, 0}}, {{0, 0}, {1, 1}}), DegenerateConfigurationError);
  EXPECT_THROW(ControlPairSet({{0, std::nan("")}}, {{0, 0}}), ValidationError);
}

TEST(Affine, Identity) {
  std::mt19937_64 rng(1);
  const auto pts = oracle::random_points(rng, 6);
  const ControlPairSet cps(pts, pts);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    EXPECT_LT(dist(map_affine(v, cps, 1.0), v), 1e-9);
  }
}

TEST(Affine, ReproducesTranslation) {
  std::mt19937_64 rng(2);
  const auto pts = oracle::random_points(rng, 6);
  std::vector<Point2> moved;
  for (const Point2& p : pts) moved.push_back(p + Vec2{5, -3});
  const ControlPairSet cps(pts, moved);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    const Point2 f = map_affine(v, cps, 1.0);
    EXPECT_NEAR(f.x, v.x + 5, 1e-9);
    EXPECT_NEAR(f.y, v.y - 3, 1e-9);
  }
}

TEST(Affine, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(3);
  const auto rp = oracle::random_pairs(rng, 6);
  const ControlPairSet cps(rp.sources, rp.targets);
  double worst = 0.0;
  for (const Point2& v : oracle::random_points(rng, 100)) {
    worst = std::max(worst, dist(map_affine(v, cps, 1.0),
                                 oracle::affine(v, rp.sources, rp.targets, 1.0)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Affine, CollinearControlsAreDegenerate) {
  const ControlPairSet cps({{0, 0}, {1, 1}, {2, 2}, {5, 5}}, {{0, 0}, {1, 2}, {2, 2}, {5, 6}});
  try {
    map_affine({3, 0}, cps, 1.0);
    FAIL();
  } catch (const DegenerateConfigurationError& e) {
    EXPECT_GT(e.condition(), kMaxAffineCondition);
  }
  const ControlPairSet two({{0, 0}, {4, 1}}, {{0, 0}, {4, 1}});
  EXPECT_THROW(map_affine({1, 3}, two, 1.0), DegenerateConfigurationError);
}

TEST(Similarity, Identity) {
  std::mt19937_64 rng(4);
  const auto pts = oracle::random_points(rng, 5);
  const ControlPairSet cps(pts, pts);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    EXPECT_LT(dist(map_similarity(v, cps, 1.0), v), 1e-9);
  }
}

TEST(Similarity, ReproducesGlobalSimilarity) {
  std::mt19937_64 rng(5);
  const auto pts = oracle::random_points(rng, 5);
  const Angle rot = Angle::from_degrees(30);
  auto transform = [&](const Point2& p) {
    return Point2{} + rotate(p - Point2{}, rot) * 2.0 + Vec2{4, 1};
  };
  std::vector<Point2> targets;
  for (const Point2& p : pts) targets.push_back(transform(p));
  const ControlPairSet cps(pts, targets);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    EXPECT_LT(dist(map_similarity(v, cps, 1.0), transform(v)), 1e-6);
  }
}

TEST(Similarity, MatchesConstrainedLeastSquaresOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rp = oracle::random_pairs(rng, 3 + trial % 6);
    const ControlPairSet cps(rp.sources, rp.targets);
    for (const Point2& v : oracle::random_points(rng, 30)) {
      EXPECT_LT(dist(map_similarity(v, cps, 1.0),
                     oracle::similarity(v, rp.sources, rp.targets, 1.0)),
                1e-6);
    }
  }
}

TEST(SinglePair, AllMethodsTranslate) {
  const ControlPairSet cps({{10, 20}}, {{13, 16}});
  for (MlsMethod m : kMethods) {
    const Point2 f = map_point(m, {100, -4}, cps, 1.0);
    EXPECT_EQ(f, (Point2{103, -8})) << method_name(m);
  }
}

TEST(Rigid, Identity) {
  std::mt19937_64 rng(7);
  const auto pts = oracle::random_points(rng, 5);
  const ControlPairSet cps(pts, pts);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    EXPECT_LT(dist(map_rigid(v, cps, 1.0), v), 1e-9);
  }
}

TEST(Rigid, PreservesDistanceToCentroid) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rp = oracle::random_pairs(rng, 2 + trial % 8, 60.0);
    const ControlPairSet cps(rp.sources, rp.targets);
    for (const Point2& v : oracle::random_points(rng, 20)) {
      const MlsLocal local = local_frame(v, cps, 1.0);
      const Point2 f = map_rigid(v, cps, 1.0);
      EXPECT_NEAR(distance(f, local.q_star), distance(v, local.p_star), 1e-9);
    }
  }
}

TEST(Rigid, ReproducesRotationAboutCentroid) {
  std::mt19937_64 rng(9);
  const auto pts = oracle::random_points(rng, 5);
  Point2 c{};
  for (const Point2& p : pts) c = c + (p - Point2{}) / 5.0;
  const Angle rot = Angle::from_degrees(40);
  std::vector<Point2> targets;
  for (const Point2& p : pts) targets.push_back(rotate_about(p, c, rot));
  const ControlPairSet cps(pts, targets);
  for (const Point2& v : oracle::random_points(rng, 50)) {
    const Point2 f = map_rigid(v, cps, 1.0);
    EXPECT_LT(dist(f, rotate_about(v, c, rot)), 1e-6);
    EXPECT_LT(dist(f, oracle::rigid(v, pts, targets, 1.0)), 1e-4);
  }
}

TEST(Rigid, MatchesAngleSearchOracle) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    const auto rp = oracle::random_pairs(rng, 4 + trial, 40.0);
    const ControlPairSet cps(rp.sources, rp.targets);
    for (const Point2& v : oracle::random_points(rng, 5)) {
      EXPECT_LT(dist(map_rigid(v, cps, 1.0), oracle::rigid(v, rp.sources, rp.targets, 1.0)), 1e-4);
    }
  }
}

TEST(Rigid, VanishingDirectionFallsBackToTranslation) {
  const ControlPairSet cps({{-1, 0}, {1, 0}}, {{-1, 1}, {1, 1}});
  const MlsResult r = map_rigid_detailed({0, 0}, cps, 1.0);
  EXPECT_TRUE(r.rigid_fallback);
  EXPECT_EQ(r.point, (Point2{0, 1}));
  EXPECT_FALSE(map_rigid_detailed({0, 3}, cps, 1.0).rigid_fallback);
}

TEST(AllMethods, InterpolateControlPoints) {
  std::mt19937_64 rng(11);
  const auto rp = oracle::random_pairs(rng, 7);
  const ControlPairSet cps(rp.sources, rp.targets);
  for (MlsMethod m : kMethods) {
    MlsEvaluator eval(cps, 1.0);
    for (std::size_t i = 0; i < rp.sources.size(); ++i) {
      const MlsResult r = eval.evaluate(m, rp.sources[i]);
      EXPECT_TRUE(r.snapped);
      EXPECT_EQ(r.point, rp.targets[i]);
      // Just outside the snap radius the map is continuous.
      const Point2 near = eval.evaluate(m, rp.sources[i] + Vec2{1e-4, 0}).point;
      EXPECT_LT(dist(near, rp.targets[i]), 1e-2) << method_name(m);
    }
  }
}

TEST(AllMethods, RotationEquivariance) {
  std::mt19937_64 rng(12);
  const Angle rot = Angle(0.7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rp = oracle::random_pairs(rng, 6);
    std::vector<Point2> rs, rt;
    for (const Point2& p : rp.sources) rs.push_back(rotate_about(p, {}, rot));
    for (const Point2& q : rp.targets) rt.push_back(rotate_about(q, {}, rot));
    const ControlPairSet cps(rp.sources, rp.targets);
    const ControlPairSet rotated(rs, rt);
    for (const Point2& v : oracle::random_points(rng, 20)) {
      for (MlsMethod m : kMethods) {
        const Point2 a = rotate_about(map_point(m, v, cps, 1.0), {}, rot);
        const Point2 b = map_point(m, rotate_about(v, {}, rot), rotated, 1.0);
        EXPECT_LT(dist(a, b), 1e-6) << method_name(m);
      }
    }
  }
}

TEST(BackwardWarp, IdentityHasZeroDisplacement) {
  std::mt19937_64 rng(13);
  const auto pts = oracle::random_points(rng, 8, 0, 63);
  const ControlPairSet cps(pts, pts);
  for (MlsMethod m : kMethods) {
    for (int grid : {1, 4}) {
      const DenseMap map = build_backward_warp(cps, {1.0, m, grid}, 64, 48);
      for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
          EXPECT_LT(dist(map.source(x, y), Point2{double(x), double(y)}), 1e-9);
        }
      }
    }
  }
}

TEST(BackwardWarp, SpacingOneEqualsDirectEvaluation) {
  std::mt19937_64 rng(14);
  const auto rp = oracle::random_pairs(rng, 9, 8.0);
  const ControlPairSet cps(rp.sources, rp.targets);
  const ControlPairSet inverse = cps.swapped();
  for (MlsMethod m : kMethods) {
    const DenseMap map = build_backward_warp(cps, {1.0, m, 1}, 120, 90);
    for (int y = 0; y < 90; ++y) {
      for (int x = 0; x < 120; ++x) {
        ASSERT_EQ(map.source(x, y), map_point(m, {double(x), double(y)}, inverse, 1.0));
      }
    }
  }
}

TEST(BackwardWarp, UnrefinedGridIsPlainBilinear) {
  const ControlPairSet cps({{10, 10}, {90, 12}, {50, 80}, {30, 40}},
                           {{12, 10}, {88, 12}, {50, 77}, {33, 44}});
  MlsParams params{1.0, MlsMethod::Rigid, 4};
  params.refine_tolerance = std::numeric_limits<double>::infinity();
  const DenseMap map = build_backward_warp(cps, params, 101, 101);
  const ControlPairSet inverse = cps.swapped();
  // Vertices exact, cell interiors are the bilinear blend of the corners.
  const Point2 v00 = map_rigid({8, 12}, inverse, 1.0);
  const Point2 v10 = map_rigid({12, 12}, inverse, 1.0);
  const Point2 v01 = map_rigid({8, 16}, inverse, 1.0);
  const Point2 v11 = map_rigid({12, 16}, inverse, 1.0);
  EXPECT_EQ(map.source(8, 12), v00);
  const Point2 mid = map.source(9, 15);
  const double fx = 0.25, fy = 0.75;
  EXPECT_NEAR(mid.x, (1 - fx) * (1 - fy) * v00.x + fx * (1 - fy) * v10.x + (1 - fx) * fy * v01.x + fx * fy * v11.x, 1e-12);
  EXPECT_NEAR(mid.y, (1 - fx) * (1 - fy) * v00.y + fx * (1 - fy) * v10.y + (1 - fx) * fy * v01.y + fx * fy * v11.y, 1e-12);
}

TEST(BackwardWarp, GridMatchesDenseOnSmoothField) {
  std::mt19937_64 rng(15);
  const auto src = oracle::random_points(rng, 10, 40, 470);
  std::normal_distribution<double> nd(0.0, 4.0);
  std::vector<Point2> dst;
  for (const Point2& p : src) dst.push_back(p + Vec2{nd(rng), nd(rng)});
  const ControlPairSet cps(src, dst);
  for (MlsMethod m : kMethods) {
    const DenseMap dense = build_backward_warp(cps, {1.0, m, 1}, 512, 512);
    const DenseMap coarse = build_backward_warp(cps, {1.0, m, 8}, 512, 512);
    double worst = 0.0;
    for (int y = 0; y < 512; ++y) {
      for (int x = 0; x < 512; ++x) {
        worst = std::max(worst, dist(dense.source(x, y), coarse.source(x, y)));
      }
    }
    EXPECT_LT(worst, 0.25) << method_name(m);
  }
}

TEST(BackwardWarp, IsolatedTargetLooksUpItsSource) {
  const ControlPairSet cps({{10, 10}, {90, 10}, {50, 80}, {30, 40}},
                           {{10, 10}, {90, 10}, {50, 80}, {33, 44}});
  for (MlsMethod m : kMethods) {
    EXPECT_EQ(build_backward_warp(cps, {1.0, m, 1}, 100, 100).source(33, 44), (Point2{30, 40}))
        << method_name(m);
    // (33, 44) is not a vertex of a spacing-2 grid; refinement keeps it close.
    EXPECT_LT(dist(build_backward_warp(cps, {1.0, m, 2}, 100, 100).source(33, 44), {30, 40}), 0.05)
        << method_name(m);
  }
}

TEST(BackwardWarp, ThreadCountDoesNotChangeResult) {
  std::mt19937_64 rng(16);
  const auto rp = oracle::random_pairs(rng, 6, 5.0);
  const ControlPairSet cps(rp.sources, rp.targets);
  const MlsParams params{1.0, MlsMethod::Similarity, 3};
  const DenseMap a = build_backward_warp(cps, params, 77, 65, 1);
  const DenseMap b = build_backward_warp(cps, params, 77, 65, 3);
  EXPECT_TRUE(std::equal(a.sources().begin(), a.sources().end(), b.sources().begin()));
}

TEST(BackwardWarp, ParamsValidated) {
  const ControlPairSet cps({{0, 0}}, {{1, 1}});
  EXPECT_THROW(build_backward_warp(cps, {0.0, MlsMethod::Rigid, 4}, 10, 10), ValidationError);
  EXPECT_THROW(build_backward_warp(cps, {1.0, MlsMethod::Rigid, 0}, 10, 10), ValidationError);
  EXPECT_NO_THROW(build_backward_warp(cps, {1.0, MlsMethod::Rigid, 4}, 1, 7));
}

TEST(DeformImage, IdentityIsBitExact) {
  std::mt19937 rng(17);
  RasterImage img(64, 40, 3);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& s : img.pixels()) s = static_cast<std::uint8_t>(u(rng));
  std::mt19937_64 prng(18);
  const auto pts = oracle::random_points(prng, 5, 0, 39);
  const ControlPairSet cps(pts, pts);
  for (MlsMethod m : kMethods) {
    for (int grid : {1, 4}) EXPECT_EQ(deform_image(img, cps, {1.0, m, grid}), img);
  }
}

TEST(DeformImage, AnchoredCornersUnchanged) {
  RasterImage img(50, 50, 3);
  for (int y = 0; y < 50; ++y) {
    for (int x = 0; x < 50; ++x) img.at(x, y, 0) = static_cast<std::uint8_t>(x * 5 + y);
  }
  const ControlPairSet cps({{0, 0}, {49, 0}, {0, 49}, {49, 49}, {25, 25}},
                           {{0, 0}, {49, 0}, {0, 49}, {49, 49}, {28, 22}});
  for (MlsMethod m : kMethods) {
    const RasterImage out = deform_image(img, cps, {1.0, m, 4});
    EXPECT_NE(out, img);
    for (auto [x, y] : {std::pair{0, 0}, {49, 0}, {0, 49}, {49, 49}}) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y, c), img.at(x, y, c));
    }
  }
}

}  // namespace
}  // namespace facewarp
