#include <gtest/gtest.h>

#include <kinlab/fractional.hpp>

#include <numbers>

using namespace kinlab;

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

// 1-periodic sum of Gaussians of width s centred at c.
double periodized(double x, double c, double s) {
  double v = 0;
  for (int k = -4; k <= 4; ++k) v += std::exp(-(x - c - k) * (x - c - k) / (s * s));
  return v;
}

}  // namespace

TEST(Fractional, ConstantsAreAnnihilated) {
  const GridFunction f = sample_grid({Axis::t, Axis::x}, {0, 0}, {1, 1}, {4, 32},
                                     [](const double* p) { return 3.0 + p[0]; });
  const GridFunction out = frac_laplacian_x(f, 0.5);
  for (double v : out.values) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(Fractional, FourierModesAreEigenfunctions) {
  for (double alpha : {0.25, 0.5, 0.9})
    for (int k : {1, 3, 7}) {
      const GridFunction f = sample_grid({Axis::x}, {0}, {1}, {64},
                                         [&](const double* p) { return std::cos(two_pi * k * p[0]); });
      const GridFunction out = frac_laplacian_x(f, alpha);
      const double lam = std::pow(two_pi * k, alpha);
      for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_NEAR(out.values[i], lam * f.values[i], 1e-11);
    }
}

TEST(Fractional, TwoDimensionalModeActsOnXAxesOnly) {
  // Roles (x, v, x): the v axis is a parameter.
  const GridFunction f = sample_grid({Axis::x, Axis::v, Axis::x}, {0, 0, 0}, {1, 1, 2}, {16, 5, 32},
                                     [](const double* p) {
                                       return (1 + p[1]) * std::sin(two_pi * (2 * p[0] + p[2] / 2));
                                     });
  const double alpha = 0.6;
  const double lam = std::pow(two_pi * two_pi * (4 + 0.25), alpha / 2);
  const GridFunction out = frac_laplacian_x(f, alpha);
  for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_NEAR(out.values[i], lam * f.values[i], 1e-11);
}

TEST(Fractional, Linearity) {
  const GridFunction f = sample_grid({Axis::x}, {0}, {1}, {48}, [](const double* p) { return periodized(p[0], 0.3, 0.1); });
  const GridFunction g = sample_grid({Axis::x}, {0}, {1}, {48}, [](const double* p) { return std::sin(two_pi * p[0]); });
  GridFunction h = f.like();
  for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = 2 * f.values[i] - g.values[i];
  const auto a = frac_laplacian_x(f, 0.4), b = frac_laplacian_x(g, 0.4), c = frac_laplacian_x(h, 0.4);
  for (std::size_t i = 0; i < h.values.size(); ++i) EXPECT_NEAR(c.values[i], 2 * a.values[i] - b.values[i], 1e-12);
}

TEST(Fractional, ScalingIdentityForRTwo) {
  // Nodes at x_i = i/N so that 2 x_i is again a node (mod 1).
  const int N = 256;
  const double h = 1.0 / N;
  const std::vector<double> lo{-h / 2}, hi{1 - h / 2};
  for (double alpha : {0.3, 0.7}) {
    const GridFunction f = sample_grid({Axis::x}, lo, hi, {N}, [](const double* p) { return periodized(p[0], 0.4, 0.08); });
    const GridFunction fR = sample_grid({Axis::x}, lo, hi, {N}, [](const double* p) { return periodized(2 * p[0], 0.4, 0.08); });
    const GridFunction Lf = frac_laplacian_x(f, alpha), LfR = frac_laplacian_x(fR, alpha);
    double err = 0, ref = 0;
    for (int i = 0; i < N; ++i) {
      const double rhs = std::pow(2.0, alpha) * Lf.values[(2 * i) % N];
      err = std::max(err, std::abs(LfR.values[i] - rhs));
      ref = std::max(ref, std::abs(rhs));
    }
    EXPECT_LT(err / ref, 1e-6);
  }
}

TEST(Fractional, BadInputs) {
  const GridFunction f({Axis::x}, {0}, {1}, {8});
  EXPECT_THROW(frac_laplacian_x(f, 0.0), DomainError);
  EXPECT_THROW(frac_laplacian_x(f, 1.0), DomainError);
  const GridFunction g({Axis::v}, {0}, {1}, {8});
  EXPECT_THROW(frac_laplacian_x(g, 0.5), DimensionError);
}
