#include <gtest/gtest.h>

#include <kinlab/covering.hpp>

using namespace kinlab;

namespace {

KineticCylinder random_kinetic(Rng& rng, double rmin, double rmax) {
  const double r = uniform(rng, rmin, rmax);
  return {PhasePoint(uniform(rng, -0.8 + r * r, 0.0), {uniform(rng, -0.5, 0.5)}, {uniform(rng, -0.6, 0.6)}), r};
}

ParabolicCylinder random_parabolic(Rng& rng, double rmin, double rmax) {
  const double r = uniform(rng, rmin, rmax);
  return {uniform(rng, -0.8 + r * r, 0.0), Vec{uniform(rng, -0.6, 0.6)}, 1, r};
}

Lattice kinetic_box(std::array<int, 3> n) {
  return Lattice(Geometry::kinetic, {-1.2, -1.5, -1.5}, {0.4, 1.5, 1.5}, n);
}

}  // namespace

TEST(Raster, MembershipMatchesExactPredicate) {
  Rng rng = make_rng(1);
  const Lattice L = kinetic_box({40, 60, 30});
  for (int k = 0; k < 20; ++k) {
    const KineticCylinder q = random_kinetic(rng, 0.3, 0.7);
    RasterMask a(L), b(L);
    a.add_set(q);
    b.add_set(stack(q, 2));
    for (int i = 0; i < L.n[0]; ++i)
      for (int j = 0; j < L.n[1]; ++j)
        for (int w = 0; w < L.n[2]; ++w) {
          const PhasePoint z(L.centre(0, i), {L.centre(1, j)}, {L.centre(2, w)});
          EXPECT_EQ(a.bits[L.index(i, j, w)] != 0, contains(q, z));
          EXPECT_EQ(b.bits[L.index(i, j, w)] != 0, contains(stack(q, 2), z));
        }
  }
  const Lattice P(Geometry::parabolic, {-1.2, -1.5, 0}, {0.4, 1.5, 1}, {64, 64, 1});
  for (int k = 0; k < 20; ++k) {
    const ParabolicCylinder q = random_parabolic(rng, 0.2, 0.6);
    RasterMask a(P);
    a.add_set(q);
    for (int i = 0; i < P.n[0]; ++i)
      for (int j = 0; j < P.n[1]; ++j)
        EXPECT_EQ(a.bits[P.index(i, j, 0)] != 0, contains(q, P.centre(0, i), Vec{P.centre(1, j)}));
  }
}

TEST(Raster, MeasureConvergesWithinBoundarySlack) {
  const KineticCylinder q{PhasePoint(-0.1, {0.05}, {0.3}), 0.8};
  const double exact = 4 * std::pow(0.8, 6);
  for (int n : {24, 48}) {
    RasterMask a(Lattice(Geometry::kinetic, {-1, -1, -1}, {0, 1, 1.2}, {n, 2 * n, n}));
    a.add_set(q);
    EXPECT_LE(std::abs(a.measure() - exact), a.boundary_volume());
  }
}

TEST(Vitali, TrivialFamilies) {
  EXPECT_TRUE(vitali_select(std::vector<KineticCylinder>{}).empty());
  const std::vector<KineticCylinder> one{unit_kinetic(1)};
  EXPECT_EQ(vitali_select(one), (std::vector<std::size_t>{0}));
  const std::vector<ParabolicCylinder> two{{0.0, Vec{0.0}, 1, 0.5}, {0.0, Vec{2.0}, 1, 0.5}};
  EXPECT_EQ(vitali_select(two), (std::vector<std::size_t>{0, 1}));
}

TEST(Vitali, RandomFamiliesDisjointAndCoveredByDilations) {
  Rng rng = make_rng(2);
  const Lattice L(Geometry::kinetic, {-1, -0.8, -0.9}, {0.05, 0.8, 0.9}, {48, 96, 48});
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<KineticCylinder> fam;
    for (int k = 0; k < 100; ++k) fam.push_back(random_kinetic(rng, 0.05, 0.3));
    const auto sel = vitali_select(fam);
    ASSERT_FALSE(sel.empty());
    for (std::size_t a = 0; a < sel.size(); ++a)
      for (std::size_t b = a + 1; b < sel.size(); ++b) EXPECT_FALSE(intersects(fam[sel[a]], fam[sel[b]]));
    RasterMask all(L), cover(L);
    for (const auto& q : fam) all.add_set(q);
    for (std::size_t s : sel) cover.add_set(dilate_5Q(fam[s]));
    std::size_t missing = 0;
    for (std::size_t f = 0; f < all.bits.size(); ++f) missing += all.bits[f] && !cover.bits[f];
    EXPECT_EQ(missing, 0u);
  }
}

TEST(Maximal, ZeroAndIndicator) {
  auto g = sample_grid({Axis::t, Axis::x, Axis::v}, {-1, -0.5, -1}, {0, 0.5, 1}, {32, 64, 32},
                       [](const double*) { return 0.0; });
  auto z = maximal_function(g, Geometry::kinetic, {0.5, 4, 2});
  EXPECT_EQ(z.Mg.max_value(), 0.0);
  EXPECT_EQ(z.radii_used.size(), 2u);
  EXPECT_EQ(z.radii_skipped.size(), 2u);
  // A cylinder of the family: radius 1/2, top on the (r²/2, r³/2, r/2) lattice.
  const KineticCylinder q{PhasePoint(-0.5, {-0.25}, {0.0}), 0.5};
  g.fill_with([&](const double* c) { return contains(q, PhasePoint(c[0], {c[1]}, {c[2]})) ? 1.0 : 0.0; });
  ASSERT_GT(g.integral(), 0);
  const auto m = maximal_function(g, Geometry::kinetic, {0.5, 4, 2});
  for (std::size_t f = 0; f < g.values.size(); ++f)
    if (g.values[f] > 0) EXPECT_GE(m.Mg.values[f], 1.0 - 1e-15);
}

TEST(Maximal, WeakTypeInequalityOnRandomData) {
  Rng rng = make_rng(3);
  for (int inst = 0; inst < 6; ++inst) {
    const bool kin = inst % 2 == 0;
    GridFunction g = kin ? GridFunction({Axis::t, Axis::x, Axis::v}, {-1, -0.5, -1}, {0, 0.5, 1}, {24, 48, 24})
                         : GridFunction({Axis::t, Axis::x}, {-1, -1}, {0, 1}, {64, 64});
    std::vector<std::array<double, 5>> bumps;
    for (int b = 0; b < 5; ++b)
      bumps.push_back({uniform(rng, -0.9, -0.1), uniform(rng, -0.4, 0.4), uniform(rng, -0.5, 0.5),
                       uniform(rng, 0.5, 3.0), uniform(rng, 0.05, 0.2)});
    g.fill_with([&](const double* c) {
      double s = 0;
      for (const auto& b : bumps) {
        const double dv = kin ? c[2] - b[2] : 0.0;
        s += b[3] * std::exp(-((c[0] - b[0]) * (c[0] - b[0]) + (c[1] - b[1]) * (c[1] - b[1]) + dv * dv) /
                             (b[4] * b[4]));
      }
      return s;
    });
    const auto m = maximal_function(g, kin ? Geometry::kinetic : Geometry::parabolic, {0.5, 5, 2});
    for (double kappa : {0.1, 0.5, 1.0}) {
      const auto r = maximal_inequality(g, m.Mg, kappa, kin ? Geometry::kinetic : Geometry::parabolic);
      EXPECT_TRUE(r.pass) << r.ratio;
      EXPECT_EQ(r.bound, kin ? 250.0 : 50.0);
    }
  }
}

TEST(Intervals, SingleAndChain) {
  for (int m : {1, 2, 4}) {
    const auto r = interval_stack_ratio({{0.5, 0.25}}, m);
    EXPECT_EQ(r.ratio, m);
    EXPECT_TRUE(r.pass);
  }
  // a_k = k h, h_k = h: base (−h, N h - h] has length N h, stacks (0, (N-1)h + m h).
  std::vector<Interval> chain;
  for (int k = 0; k < 10; ++k) chain.push_back({k * 0.125, 0.125});
  const auto r = interval_stack_ratio(chain, 1);
  EXPECT_EQ(r.base, 10 * 0.125);
  EXPECT_EQ(r.stacked, 10 * 0.125);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(interval_stack_ratio({}, 1).pass);
}

TEST(Intervals, RandomDyadicFamiliesNeverFail) {
  Rng rng = make_rng(4);
  int failures = 0;
  double worst = 1e9;
  for (int inst = 0; inst < 1000; ++inst) {
    const int m = (inst % 3 == 0) ? 1 : (inst % 3 == 1 ? 2 : 4);
    std::vector<Interval> fam;
    const int n = 1 + static_cast<int>(uniform(rng, 0, 30));
    for (int k = 0; k < n; ++k)
      fam.push_back({std::ldexp(std::floor(uniform(rng, 0, 1024)), -8),
                     std::ldexp(1 + std::floor(uniform(rng, 0, 64)), -8)});
    const auto r = interval_stack_ratio(fam, m);
    failures += !r.pass;
    worst = std::min(worst, r.ratio - r.bound);
  }
  EXPECT_EQ(failures, 0);
  EXPECT_GE(worst, 0.0);
}

TEST(StackUnion, OneCylinderAndSlantedPair) {
  const Lattice P(Geometry::parabolic, {-1.5, -1.5, 0}, {2.5, 1.5, 1}, {400, 300, 1});
  for (int m : {1, 2}) {
    const auto r = stacked_union_ratio(std::vector<ParabolicCylinder>{{0.0, Vec{0.0}, 1, 1.0}}, m, P);
    EXPECT_NEAR(r.ratio, m, r.slack * m + 1e-12);
    EXPECT_TRUE(r.pass);
  }
  const Lattice K(Geometry::kinetic, {-1.2, -2, -2.2}, {1.5, 2, 2.2}, {96, 160, 88});
  const std::vector<KineticCylinder> pair{{PhasePoint(0, {0}, {1}), 0.8}, {PhasePoint(0, {0}, {-1}), 0.8}};
  const auto r = stacked_union_ratio(pair, 1, K);
  EXPECT_TRUE(r.pass) << r.ratio << ' ' << r.slack;
  EXPECT_GT(r.ratio, 0.5);
}

TEST(StackUnion, RandomKineticFamilies) {
  Rng rng = make_rng(5);
  const Lattice K(Geometry::kinetic, {-1, -1, -1}, {1, 1, 1}, {64, 128, 48});
  for (int inst = 0; inst < 12; ++inst) {
    std::vector<KineticCylinder> fam;
    const int n = 1 + inst % 5;
    for (int k = 0; k < n; ++k) fam.push_back(random_kinetic(rng, 0.4, 0.6));
    const auto r = stacked_union_ratio(fam, 1 + inst % 3, K);
    EXPECT_TRUE(r.pass) << r.ratio << " slack " << r.slack;
  }
}

TEST(InkSpots, Constants) {
  EXPECT_DOUBLE_EQ(ink_spots_c(1, 0.5), 1.0 / 100);
  EXPECT_DOUBLE_EQ(ink_spots_c(2, 0.5), 1.0 / 500);
  EXPECT_DOUBLE_EQ(ink_spots_leak_constant(Geometry::kinetic, 1), 12.0);
  EXPECT_DOUBLE_EQ(ink_spots_leak_constant(Geometry::parabolic, 1), 2.0);
  EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
}

TEST(InkSpots, EmptySets) {
  const Lattice L(Geometry::kinetic, {-1, -1, -1}, {0.5, 1, 1}, {48, 96, 32});
  RasterMask E(L), F(L);
  const auto r = ink_spots_check(E, F, Geometry::kinetic, 1, 0.5);
  EXPECT_TRUE(r.hypothesis_ok);
  EXPECT_EQ(r.E, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(InkSpots, OneSmallCylinderWithItsStack) {
  const Lattice L(Geometry::parabolic, {-1, -1, 0}, {0.25, 1, 1}, {640, 256, 1});
  const ParabolicCylinder q{-0.5, Vec{0.25}, 1, 0.25};
  RasterMask E(L), F(L);
  E.add_set(q);
  F.add_set(q);
  // Every half-filled family cylinder lies near q; stacking them makes F admissible.
  std::vector<double> ew(E.bits.begin(), E.bits.end());
  const SliceSums es(L, ew);
  for (int k = 1; k <= 6; ++k) {
    const double r = std::ldexp(1.0, -k);
    if (!radius_resolved(L, r, 4)) continue;
    enumerate_ink_family(L, r, [&](const SlantedSet& s) {
      if (es.sum(s) > 0.5 * cell_count(L, s)) F.add(stacked_of(s, 1));
    });
  }
  const auto r = ink_spots_check(E, F, Geometry::parabolic, 1, 0.5);
  EXPECT_TRUE(r.hypothesis_ok) << r.violation;
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.E, 2 * 0.25 * 0.0625, r.slack);
  // Removing F kills the hypothesis, reported as such.
  const auto bad = ink_spots_check(E, E, Geometry::parabolic, 1, 0.5);
  EXPECT_FALSE(bad.hypothesis_ok);
  EXPECT_FALSE(bad.pass);
}

TEST(InkSpots, SynthesizedInstances) {
  for (Geometry geo : {Geometry::parabolic, Geometry::kinetic}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const int m = 1 + static_cast<int>(seed % 2);
      const auto inst = make_ink_instance(geo, m, 100 + seed, default_ink_params(geo));
      const auto r = ink_spots_check(inst.E, inst.F, geo, m, inst.r0);
      EXPECT_TRUE(r.hypothesis_ok) << r.violation;
      EXPECT_TRUE(r.pass) << geometry_name(geo) << " E=" << r.E << " rhs=" << r.rhs;
      EXPECT_GT(r.E, 0.0);
      EXPECT_FALSE(r.radii_checked.empty());
    }
  }
}

TEST(Lebesgue, ConstantAndSmooth) {
  auto c = sample_grid({Axis::t, Axis::x}, {-1, -1}, {1, 1}, {256, 256}, [](const double*) { return 3.0; });
  const auto rc = lebesgue_differentiation_probe(c, Geometry::parabolic, 0.5, 4, 50, 1);
  for (const auto& row : rc.rows) EXPECT_EQ(row.median, 0.0);
  auto g = sample_grid({Axis::t, Axis::x, Axis::v}, {-1, -1, -1}, {1, 1, 1}, {128, 128, 64}, [](const double* p) {
    return std::exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  });
  const auto rg = lebesgue_differentiation_probe(g, Geometry::kinetic, 0.8, 3, 60, 2);
  EXPECT_TRUE(rg.monotone);
  ASSERT_GE(rg.rows.size(), 2u);
  // Smooth data: the average is dominated by the v spread, O(r).
  const double ratio = rg.rows[1].median / rg.rows[0].median;
  EXPECT_LT(ratio, 0.75);
  EXPECT_GT(ratio, 0.25);
}

TEST(Lebesgue, HalfSpaceIndicatorInteriorPoints) {
  auto g = sample_grid({Axis::t, Axis::x}, {-1, -1}, {1, 1}, {512, 512},
                       [](const double* p) { return p[1] > 0.0 ? 1.0 : 0.0; });
  const auto r = lebesgue_differentiation_probe(g, Geometry::parabolic, 0.5, 5, 200, 3);
  EXPECT_TRUE(r.monotone);
  EXPECT_LT(r.rows.back().median, r.rows.front().median + 1e-15);
  EXPECT_EQ(r.rows.back().median, 0.0);
}
