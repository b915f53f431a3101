#include <gtest/gtest.h>

#include <kinlab/distance.hpp>
#include <kinlab/rng.hpp>

using namespace kinlab;

namespace {

PhasePoint random_point(Rng& rng, int d, double s = 1.0) {
  PhasePoint z = PhasePoint::origin(d);
  z.t = uniform(rng, -s, s);
  for (int i = 0; i < d; ++i) {
    z.x[i] = uniform(rng, -s, s);
    z.v[i] = uniform(rng, -s, s);
  }
  return z;
}

constexpr double tol = 1e-7;

}  // namespace

TEST(Distance, OptimalityInstances) {
  EXPECT_NEAR(kinetic_distance(PhasePoint(0, {0}, {1}), PhasePoint::origin(1), tol), 0.5, tol);
  EXPECT_NEAR(kinetic_distance(PhasePoint(-1, {0}, {0}), PhasePoint::origin(1), tol), 1.0, tol);
  EXPECT_EQ(kinetic_distance(PhasePoint(0.3, {1}, {2}), PhasePoint(0.3, {1}, {2}), tol), 0.0);
}

TEST(Distance, ObjectiveAtKnownMinimizer) {
  EXPECT_DOUBLE_EQ(distance_objective(PhasePoint(0, {0}, {1}), PhasePoint::origin(1), Vec{0.5}), 0.5);
}

TEST(Distance, MatchesGridSearch) {
  Rng rng = make_rng(41);
  for (int d = 1; d <= 2; ++d) {
    for (int k = 0; k < 60; ++k) {
      const PhasePoint a = random_point(rng, d), b = random_point(rng, d);
      const double dist = kinetic_distance(a, b, tol);
      const double grid = distance_grid_search(a, b, d == 1 ? 4000 : 300);
      // The grid minimum can only overshoot; its overshoot is bounded by the
      // objective's modulus over one grid cell.
      EXPECT_LE(dist, grid + tol);
      EXPECT_GT(dist, grid - 0.02);
    }
  }
}

TEST(Distance, TwoSidedBoundAndSymmetry) {
  Rng rng = make_rng(43);
  for (int k = 0; k < 3000; ++k) {
    const int d = 1 + k % 3;
    const PhasePoint a = random_point(rng, d, 2.0), b = random_point(rng, d, 2.0);
    const double dist = kinetic_distance(a, b, tol);
    const double up = sup_norm(relative(b, a));
    EXPECT_GE(dist, up / 2 - tol);
    EXPECT_LE(dist, up + tol);
    EXPECT_NEAR(dist, kinetic_distance(b, a, tol), 2 * tol);
  }
}

TEST(Distance, LeftInvarianceAndScaling) {
  Rng rng = make_rng(47);
  for (int k = 0; k < 1000; ++k) {
    const int d = 1 + k % 3;
    const PhasePoint a = random_point(rng, d), b = random_point(rng, d), z = random_point(rng, d);
    const double dist = kinetic_distance(a, b, tol);
    EXPECT_NEAR(kinetic_distance(compose(z, a), compose(z, b), tol), dist, 3 * tol);
    const double R = uniform(rng, 0.3, 3.0);
    EXPECT_NEAR(kinetic_distance(scale(a, R), scale(b, R), tol), R * dist, 3 * tol * (1 + R));
  }
}

TEST(Distance, TriangleInequality) {
  Rng rng = make_rng(53);
  for (int k = 0; k < 3000; ++k) {
    const int d = 1 + k % 3;
    const PhasePoint a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
    EXPECT_LE(kinetic_distance(a, c, tol),
              kinetic_distance(a, b, tol) + kinetic_distance(b, c, tol) + 3 * tol);
  }
}

TEST(Distance, HugeToleranceReturnsUpperBound) {
  const double d = kinetic_distance(PhasePoint(0, {0}, {1}), PhasePoint::origin(1), 1e3);
  EXPECT_EQ(d, 1.0);
}

TEST(Distance, BadInputs) {
  EXPECT_THROW(kinetic_distance(PhasePoint::origin(1), PhasePoint::origin(2), tol), DimensionError);
  EXPECT_THROW(kinetic_distance(PhasePoint::origin(1), PhasePoint::origin(1), 0.0), DomainError);
}

TEST(Distance, BudgetExhaustionCarriesGap) {
  DistanceOptions opt;
  opt.simplex_iterations = 0;
  opt.bisection_iterations = 2;
  try {
    kinetic_distance(PhasePoint(0.7, {3.0}, {-0.4}), PhasePoint(0.1, {-0.5}, {0.9}), 1e-12, opt);
    FAIL() << "expected DistanceError";
  } catch (const DistanceError& e) {
    EXPECT_GT(e.gap, 1e-12);
    EXPECT_GT(e.best, 0.0);
  }
}
