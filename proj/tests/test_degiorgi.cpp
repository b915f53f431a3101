#include <gtest/gtest.h>

#include <kinlab/degiorgi.hpp>
#include <kinlab/rng.hpp>

#include <cmath>
#include <numbers>

using namespace kinlab;

namespace {

constexpr double pi = std::numbers::pi;

GridFunction square(int n, double half, const std::function<double(const double*)>& f) {
  return sample_grid({Axis::x, Axis::x}, {-half, -half}, {half, half}, {n, n}, f);
}

GridFunction line(int n, double half, const std::function<double(const double*)>& f) {
  return sample_grid({Axis::x}, {-half}, {half}, {n}, f);
}

// (t, x, v) grid on [t_lo, t_hi] × [-hx, hx] × [-hv, hv].
GridFunction phase(int nt, int nx, int nv, double t_lo, double t_hi, double hx, double hv,
                   const std::function<double(const double*)>& f) {
  return sample_grid({Axis::t, Axis::x, Axis::v}, {t_lo, -hx, -hv}, {t_hi, hx, hv}, {nt, nx, nv}, f);
}

}  // namespace

TEST(Truncation, LevelsAboveAndBelowTheRange) {
  const auto u = line(16, 1, [](const double* c) { return std::sin(3 * c[0]); });
  const auto z = truncate(u, 2.0, Sign::plus);
  for (double w : z.values) EXPECT_EQ(w, 0);
  const auto s = truncate(u, -5.0, Sign::plus);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_DOUBLE_EQ(s.values[i], u.values[i] + 5);
  const auto m = truncate(u, TruncationLevel{0.0, Sign::minus});
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(m.values[i], std::max(-u.values[i], 0.0));
}

TEST(Truncation, GradientVanishesWhereBothEndpointsAreBelowLevel) {
  Rng rng = make_rng(11);
  auto u = square(24, 1, [&](const double*) { return uniform(rng, -1, 1); });
  const double kappa = 0.2;
  const auto w = truncate(u, kappa, Sign::plus);
  int idx[2];
  long checked = 0;
  for (std::size_t f = 0; f < u.size(); ++f) {
    u.unravel(f, idx);
    for (int a = 0; a < 2; ++a) {
      std::size_t f0, f1;
      const double g = forward_difference(w, idx, a, &f0, &f1);
      if (u.values[f0] <= kappa && u.values[f1] <= kappa) {
        EXPECT_EQ(g, 0);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Caccioppoli, ConstantHasZeroLeftSide) {
  const auto u = square(64, 1, [](const double*) { return 0.7; });
  std::vector<EllipticEnergySample> s{{{0, 0}, 0.3, 0.6, 0.1, Sign::plus}, {{0.1, 0}, 0.2, 0.5, 0.9, Sign::minus}};
  const auto rep = caccioppoli_elliptic(u, 1, 1, nullptr, s);
  ASSERT_EQ(rep.records.size(), 2u);
  for (const auto& r : rep.records) EXPECT_EQ(r.lhs, 0);
  EXPECT_EQ(rep.worst_ratio, 0);
  EXPECT_TRUE(rep.pass());
}

TEST(Caccioppoli, AffineMatchesClosedForm) {
  // u = x1, κ = 0: ∫_{B_r}|∇u₊|² = πr²/2 and ∫_{B_R} x1₊² = πR⁴/8.
  const int n = 512;
  const auto u = square(n, 1, [](const double* c) { return c[0]; });
  const double r = 0.5, R = 1.0;
  const auto rep = caccioppoli_elliptic(u, 1, 1, nullptr, {{{0, 0}, r, R, 0, Sign::plus}});
  ASSERT_EQ(rep.records.size(), 1u);
  const auto& rec = rep.records[0];
  EXPECT_NEAR(rec.lhs, pi * r * r / 2, 0.01);
  EXPECT_NEAR(rec.energy, pi * std::pow(R, 4) / 8 / ((R - r) * (R - r)), 0.01);
  EXPECT_NEAR(rec.ratio, 4 * r * r * (R - r) * (R - r) / std::pow(R, 4), 0.01);
  EXPECT_EQ(rep.bound, 16);
  EXPECT_TRUE(rep.pass());
  EXPECT_LT(rec.slack, 0.05);
}

TEST(Caccioppoli, SamplesLeavingTheBoxAreSkipped) {
  const auto u = square(32, 1, [](const double* c) { return c[0]; });
  const auto rep = caccioppoli_elliptic(u, 1, 1, nullptr, {{{0.8, 0}, 0.1, 0.5, 0, Sign::plus}});
  EXPECT_TRUE(rep.records.empty());
  EXPECT_EQ(rep.skipped.size(), 1u);
}

TEST(Caccioppoli, RandomSamplesStayInside) {
  const auto s = random_elliptic_samples({0, 0}, {1, 1}, 100, 0.05, 0.2, 0, 1, 5);
  ASSERT_EQ(s.size(), 100u);
  for (const auto& e : s) {
    EXPECT_LT(e.r, e.R);
    for (int a = 0; a < 2; ++a) {
      EXPECT_GE(e.centre[a] - e.R, 0);
      EXPECT_LE(e.centre[a] + e.R, 1);
    }
  }
}

TEST(Caccioppoli, HeatSolutionSatisfiesParabolicEnergy) {
  // u = e^{-π² t} sin(π x) solves the heat equation with A = 1.
  const int nt = 101, nx = 256;
  auto u = sample_grid({Axis::t, Axis::x}, {-0.005, -1}, {0.505, 1}, {nt, nx},
                       [](const double* c) { return std::exp(-pi * pi * c[0]) * std::sin(pi * c[1]); });
  std::vector<ParabolicEnergySample> s;
  for (double k : {-0.5, 0.0, 0.3})
    for (Sign sg : {Sign::plus, Sign::minus}) s.push_back({{0.2}, 0.3, 0.7, 5, 80, k, sg});
  const auto rep = caccioppoli_parabolic(u, 1, 1, nullptr, s);
  ASSERT_EQ(rep.records.size(), s.size());
  EXPECT_TRUE(rep.pass()) << rep.worst_ratio;
  int active = 0;
  for (const auto& r : rep.records) active += r.lhs > 0;
  EXPECT_GE(active, 4);
}

TEST(Caccioppoli, KineticTransportedBumpSatisfiesEnergy) {
  // f = g(x - tv, v) solves free transport, hence the equation with a = 1 and
  // S = -∂_v² f.
  auto g = [](double x, double v) { return std::exp(-4 * x * x - v * v); };
  auto f = phase(41, 96, 96, -0.0125, 1.0125, 2, 3, [&](const double* c) { return g(c[1] - c[0] * c[2], c[2]); });
  auto S = [&](const double* c) {
    const double h = 1e-4, x = c[1], t = c[0], v = c[2];
    auto F = [&](double w) { return g(x - t * w, w); };
    return -(F(v + h) - 2 * F(v) + F(v - h)) / (h * h);
  };
  std::vector<KineticEnergySample> s{{{0}, {0}, 0.5, 1.0, 0.8, 1.6, 2, 30, 0.1, Sign::plus},
                                     {{0.2}, {0.3}, 0.4, 0.9, 0.6, 1.4, 5, 35, 0.5, Sign::minus}};
  const auto rep = caccioppoli_kinetic(f, 1, 1, S, s);
  ASSERT_EQ(rep.records.size(), 2u);
  EXPECT_TRUE(rep.pass()) << rep.worst_ratio;
}

TEST(IterationLemma, ConvergesBelowThreshold) {
  const auto r = iterate_lemma(0.2, 2, 2, 40);
  EXPECT_DOUBLE_EQ(r.threshold, 0.25);
  ASSERT_GE(r.sequence.size(), 3u);
  EXPECT_NEAR(r.sequence[1], 0.08, 1e-15);
  EXPECT_NEAR(r.sequence[2], 0.0256, 1e-15);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.overflow);
}

TEST(IterationLemma, ExponentSequence) {
  for (double beta : {1.5, 2.0, 3.7}) {
    const auto r = iterate_lemma(0.1, 2, beta, 10);
    EXPECT_EQ(r.p[0], 0);
    EXPECT_EQ(r.p[1], 1);
    for (int k = 0; k <= 10; ++k) {
      double direct = 0;
      for (int i = 0; i <= k; ++i) direct += (k - i) * std::pow(beta, i);
      EXPECT_NEAR(r.p[k], direct, 1e-9 * std::max(1.0, direct));
      EXPECT_LE(r.p[k], r.p_bound[k]);
    }
  }
  const auto r = iterate_lemma(0.1, 2, 2, 3);
  EXPECT_EQ(r.p[2], 4);
  EXPECT_EQ(r.p_bound[2], 8);
}

TEST(IterationLemma, DivergesAboveThreshold) {
  const auto r = iterate_lemma(0.5, 2, 2, 200);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(r.overflow);
  EXPECT_THROW(iterate_lemma(0.1, 1, 2, 5), DomainError);
  EXPECT_THROW(iterate_lemma(0.1, 2, 1, 5), DomainError);
}

TEST(Oscillation, AffineHasUnitExponent) {
  const auto u = square(512, 1, [](const double* c) { return c[0]; });
  ProfileOptions o;
  o.r0 = 0.5;
  o.k_max = 6;
  o.fit_k_max = 4;
  o.drop_largest = 0;
  const auto P = oscillation_profile(u, {0, 0}, Shape::ball, o);
  ASSERT_TRUE(P.available);
  // Cell-centre rasterization gives osc = 2r - O(h), a small upward bias in α.
  EXPECT_NEAR(P.alpha, 1, 0.03);
  EXPECT_TRUE(P.monotone);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(P.osc[k], 2 * P.radii[k], 2 * u.spacing(0));
}

TEST(Oscillation, ConstantGivesInfiniteSentinel) {
  const auto u = square(64, 1, [](const double*) { return 3.0; });
  const auto P = oscillation_profile(u, {0, 0}, Shape::ball);
  EXPECT_TRUE(std::isinf(P.alpha));
  for (double o : P.osc) EXPECT_EQ(o, 0);
  const auto H = holder_consistency(u, P, 200, 1);
  EXPECT_TRUE(H.pass());
}

TEST(Oscillation, SmallCylindersAreDroppedAndLogged) {
  const auto u = square(32, 1, [](const double* c) { return c[0] * c[0] + c[1]; });
  ProfileOptions o;
  o.r0 = 0.5;
  o.k_max = 6;
  const auto P = oscillation_profile(u, {0, 0}, Shape::ball, o);
  EXPECT_FALSE(P.used.back());
  EXPECT_FALSE(P.log.empty());
  o.r0 = 2;
  EXPECT_THROW(oscillation_profile(u, {0, 0}, Shape::ball, o), DomainError);
}

TEST(Oscillation, KineticAffineInVelocity) {
  // f = v: osc over Q_r is 2r.
  auto f = phase(64, 128, 64, -0.3, 0.02, 0.15, 0.6, [](const double* c) { return c[2]; });
  ProfileOptions o;
  o.r0 = 0.5;
  o.k_max = 2;
  o.drop_largest = 0;
  o.min_points = 3;
  const auto P = oscillation_profile(f, {0, 0, 0}, Shape::kinetic, o);
  ASSERT_TRUE(P.available);
  EXPECT_NEAR(P.alpha, 1, 0.1);
  const auto H = holder_consistency(f, P, 500, 3);
  EXPECT_TRUE(H.pass()) << H.worst_ratio;
}

TEST(Holder, AffinePairsPass) {
  const auto u = square(256, 1, [](const double* c) { return c[0]; });
  ProfileOptions o;
  o.r0 = 0.5;
  o.k_max = 5;
  o.drop_largest = 0;
  const auto P = oscillation_profile(u, {0, 0}, Shape::ball, o);
  const auto H = holder_consistency(u, P, 2000, 9, 1.5);
  EXPECT_TRUE(H.pass()) << H.worst_ratio;
  EXPECT_EQ(H.pairs, 2000);
}

TEST(Holder, ViolationIsReported) {
  // A jump across x1 = 0 is not Hölder; a fit forced to α = 1 must fail.
  const auto u = square(256, 1, [](const double* c) { return c[0] > 0 ? 1.0 : 0.0; });
  OscillationProfile P;
  P.centre = {0, 0};
  P.shape = Shape::ball;
  P.radii = {0.5};
  P.osc = {1};
  P.used = {true};
  P.alpha = 1;
  P.constant = 0.1;
  P.available = true;
  const auto H = holder_consistency(u, P, 500, 4, 1);
  EXPECT_FALSE(H.pass());
  EXPECT_EQ(H.failures.front().z1.size(), 2u);
}

TEST(Harnack, ConstantSolutionHasQuotientOne) {
  auto f = phase(48, 48, 48, -1.02, 0.02, 2.1, 2.1, [](const double*) { return 2.5; });
  const auto rep = harnack_quotient(f, Shape::kinetic, {}, 0.0);
  EXPECT_DOUBLE_EQ(rep.quotient, 1);
  EXPECT_GT(rep.past_points, 0);
  EXPECT_GT(rep.future_points, 0);
}

TEST(Harnack, ScalingMapsCylinders) {
  // f(t, x, v) = e^{t}: sup over the past at t = top - ρ²(1 - ω²), inf over the future at top - ρ²ω².
  for (double rho : {1.0, 0.5}) {
    auto f = phase(200, 32, 32, -1.01, 0.01, 2.1, 2.1, [](const double* c) { return std::exp(-c[0]); });
    HarnackGeometry G;
    G.scale = rho;
    const auto rep = harnack_quotient(f, Shape::kinetic, G, 0.0);
    const double w = G.omega;
    const double past_bottom = -rho * rho * (1 - w * w) - rho * rho * w * w / 4;
    const double expect = std::exp(-past_bottom) / 1.0;
    EXPECT_NEAR(rep.quotient, expect, 0.02 * expect) << rho;
  }
}

TEST(Harnack, NonpositiveSolutionIsRejected) {
  auto f = phase(32, 32, 32, -1.02, 0.02, 2.1, 2.1, [](const double* c) { return c[2]; });
  EXPECT_THROW(harnack_quotient(f, Shape::kinetic, {}, 0.0), DomainError);
}

TEST(Harnack, WeakNormOfConstant) {
  auto f = phase(64, 64, 64, -1.02, 0.02, 2.1, 2.1, [](const double*) { return 1.0; });
  const auto rep = harnack_quotient(f, Shape::kinetic, {}, 0.0, 0.5);
  // |Q_ω| = ω² · |B_{ω³}| · |B_ω| in d = 1.
  const double w = 0.25, vol = w * w * 2 * w * w * w * 2 * w;
  EXPECT_NEAR(rep.weak_norm, std::pow(vol, 2.0), 0.5 * std::pow(vol, 2.0));
}

TEST(Expansion, UnitSolutionGivesUnitCandidate) {
  auto f = phase(64, 48, 48, -1.3, 0.02, 1.2, 1.2, [](const double*) { return 1.0; });
  const auto rep = expansion_experiment({f}, {0.0}, 0.5, 0.1);
  EXPECT_EQ(rep.included, 1);
  EXPECT_DOUBLE_EQ(rep.ell_hat, 1);
  EXPECT_DOUBLE_EQ(rep.instances[0].positive_fraction, 1);
}

TEST(Expansion, HypothesisFailureExcludes) {
  auto f = phase(64, 48, 48, -1.3, 0.02, 1.2, 1.2, [](const double*) { return 0.5; });
  auto g = phase(64, 48, 48, -1.3, 0.02, 1.2, 1.2, [](const double*) { return 2.0; });
  const auto rep = expansion_experiment({f, g}, {0.0, 1.0}, 0.5, 0.1);
  EXPECT_EQ(rep.included, 0);
  EXPECT_TRUE(std::isnan(rep.ell_hat));
  EXPECT_FALSE(rep.instances[0].reason.empty());
  EXPECT_FALSE(rep.instances[1].reason.empty());
}

TEST(IntermediateValue, MeasuresOfAStepInVelocity) {
  // f = 1 for v < 0, 0 for v >= 0 on the whole grid.
  IVGeometry G;
  auto f = phase(80, 64, 64, -1.55, 0.05, 8.5, 2.5, [](const double* c) { return c[2] < 0 ? 1.0 : 0.0; });
  const auto r = intermediate_value_stats(f, G);
  EXPECT_FALSE(r.clipped);
  EXPECT_NEAR(r.high_minus / r.measure_minus, 0.5, 0.05);
  EXPECT_NEAR(r.low_plus / r.measure_plus, 0.5, 0.05);
  EXPECT_EQ(r.mid_ext, 0);
  // One jump of size 1 across the v grid: ‖∇_v f‖² = |t-window| · |x-window| / h_v.
  const double hv = f.spacing(2);
  EXPECT_NEAR(r.grad_v_l2 * r.grad_v_l2, r.measure_ext / (2 * 2 * G.R) / hv, 0.05 * r.measure_ext / 4 / hv);
}

TEST(IntermediateValue, EllipticStepClosedForm) {
  // Linear ramp from 0 to 1 across width w in d = 1 on (-1, 1).
  const double w = 0.5;
  const int n = 4000;
  const auto u = line(n, 1, [&](const double* c) { return std::clamp(c[0] / w + 0.5, 0.0, 1.0); });
  const auto pw = poincare_wirtinger_estimate({line(n, 1, [](const double* c) { return c[0]; })}, 1);
  const auto r = elliptic_intermediate_value(u, 1.0);
  EXPECT_NEAR(r.low, 1, 1e-3);
  EXPECT_NEAR(r.high, 1 - w / 2, 1e-3);
  EXPECT_NEAR(r.mid, w / 2, 1e-3);
  EXPECT_NEAR(r.grad_l2, 1 / std::sqrt(w), 1e-2);
  EXPECT_NEAR(r.measured_constant, std::sqrt(2.0) * (1 - w / 2), 1e-2);
  EXPECT_DOUBLE_EQ(r.c_ivl, 4);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(pw.constant, 0.5, 1e-3);
}

TEST(IntermediateValue, EllipticAboveOneHasZeroLeftSide) {
  const auto u = square(64, 1.1, [](const double* c) { return 1.5 + c[0] * c[0]; });
  const auto r = elliptic_intermediate_value(u, 1.0);
  EXPECT_EQ(r.low, 0);
  EXPECT_EQ(r.measured_constant, 0);
  EXPECT_TRUE(r.holds);
}

TEST(Poincare, AffineRatiosInOneDimension) {
  const auto u = line(8000, 1, [](const double* c) { return c[0]; });
  for (double q : {1.0, 1.5, 2.0}) {
    const auto est = poincare_wirtinger_estimate({u}, q);
    EXPECT_NEAR(est.constant, 1 / (q + 1), 1e-3) << q;
  }
}

TEST(Poincare, ConstantsAreSkipped) {
  const auto c = line(64, 1, [](const double*) { return 2.0; });
  const auto u = line(64, 1, [](const double* x) { return std::sin(2 * x[0]); });
  const auto est = poincare_wirtinger_estimate({c, u}, 2);
  EXPECT_EQ(est.skipped, 1);
  EXPECT_EQ(est.ratios.size(), 1u);
  EXPECT_THROW(poincare_wirtinger_estimate({u}, 3), DomainError);
}

TEST(Membership, ConstantBelowLevelIsTriviallyCertified) {
  auto f = phase(40, 40, 40, -0.9, 0.02, 0.9, 0.9, [](const double*) { return 0.3; });
  const auto k = kinetic_dg_membership(f, nullptr, {{{0, 0, 0}, 0.3, 0.6, 0.5}});
  ASSERT_EQ(k.gain.size(), 1u);
  EXPECT_EQ(k.gain[0], 0);
  EXPECT_DOUBLE_EQ(k.p_c, 2.5);
  auto u = sample_grid({Axis::t, Axis::x}, {-1, -1}, {0.01, 1}, {50, 50}, [](const double*) { return 0.3; });
  const auto p = parabolic_dg_membership(u, nullptr, {{{0, 0}, 0.3, 0.6, 0.5}});
  EXPECT_EQ(p.certified_gain, 0);
  EXPECT_EQ(p.certified_energy, 0);
  EXPECT_DOUBLE_EQ(p.p_c, 6);
  const auto g = kinetic_gradient_estimate(f, nullptr, {{0, 0.1, 0.3, {0}, {0}, 0.3, 0.6, 0.3, 0.6, 0.1}});
  EXPECT_EQ(g.certified_gain, 0);
}

TEST(Membership, SmoothSolutionsHaveFiniteConstants) {
  auto u = sample_grid({Axis::t, Axis::x}, {-1, -1}, {0.01, 1}, {100, 128},
                       [](const double* c) { return std::exp(-pi * pi * c[0] / 4) * std::cos(pi * c[1] / 2); });
  std::vector<MembershipSample> s;
  for (double k : {0.0, 0.5, 1.0}) s.push_back({{0, 0}, 0.3, 0.7, k});
  const auto p = parabolic_dg_membership(u, nullptr, s);
  EXPECT_EQ(p.gain.size(), 3u);
  EXPECT_TRUE(std::isfinite(p.certified_gain));
  EXPECT_GT(p.certified_gain, 0);
  const auto bad = parabolic_dg_membership(u, nullptr, {{{0, 0}, 0.3, 1.5, 0}});
  EXPECT_EQ(bad.skipped.size(), 1u);
}

TEST(Regions, BoundaryFractionShrinksWithResolution) {
  const auto a = square(32, 1, [](const double*) { return 0.0; });
  const auto b = square(256, 1, [](const double*) { return 0.0; });
  const Region R = ball_region({0, 0}, 0.5);
  EXPECT_GT(boundary_fraction(a, R), 4 * boundary_fraction(b, R));
  EXPECT_THROW(check_layout(a, Shape::kinetic), DimensionError);
}
