#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "../coefficients.hpp"
#include "../convolution.hpp"
#include "../covering.hpp"
#include "../degiorgi.hpp"
#include "../diffusion.hpp"
#include "../distance.hpp"
#include "../kernel.hpp"
#include "../kinetic_fp.hpp"
#include "../parallel.hpp"
#include "../rng.hpp"

// Experiment drivers shared by the lab tool and the acceptance runner. Every
// driver is deterministic given its parameters and seed; per-sample randomness
// comes from make_rng(seed, index), so results do not depend on `jobs`.

namespace kinlab::lab {

using Cell = std::variant<long, double, std::string>;

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Metric {
  std::string key;
  double value;
};

struct Check {
  std::string name;
  bool pass = false;
  std::vector<Metric> metrics;
  std::string note;

  double metric(const std::string& key) const {
    for (const auto& m : metrics)
      if (m.key == key) return m.value;
    throw DomainError("check " + name + " has no metric " + key);
  }
};

struct SuiteResult {
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::string> warnings;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  const Check& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw DomainError("no check named " + name);
  }
};

inline PhasePoint random_phase_point(Rng& rng, int d, double s) {
  PhasePoint z = PhasePoint::origin(d);
  z.t = uniform(rng, -s, s);
  for (int i = 0; i < d; ++i) {
    z.x[i] = uniform(rng, -s, s);
    z.v[i] = uniform(rng, -s, s);
  }
  return z;
}

// ------------------------------------------------------------------ geometry

struct GeometryParams {
  long samples = 10000;
  double tol = 1e-6;              // distance solver tolerance
  double optimality_band = 1e-6;  // fixed; does not loosen with tol
  std::vector<int> dims{1, 2, 3};
  std::uint64_t seed = 1;
};

inline SuiteResult geometry_suite(const GeometryParams& P, unsigned jobs = 1) {
  for (int d : P.dims) check_dim(d);
  if (P.dims.empty()) throw DomainError("dims must not be empty");
  if (!(P.tol > 0)) throw DomainError("tol must be positive");
  SuiteResult out;
  const std::size_t n = static_cast<std::size_t>(std::max<long>(P.samples, 0));
  if (n == 0) out.warnings.push_back("samples = 0: property suites are vacuous");
  auto dim_of = [&](std::size_t i) { return P.dims[i % P.dims.size()]; };

  struct Row {
    int d = 1;
    double assoc = 0, inv = 0, dist = 0, upper = 0, tri_lhs = 0, tri_rhs = 0;
    bool member_ok = true;
  };
  std::vector<Row> rows(n);
  auto gap = [](const PhasePoint& a, const PhasePoint& b) {
    double g = std::abs(a.t - b.t);
    for (int i = 0; i < a.d; ++i) g = std::max({g, std::abs(a.x[i] - b.x[i]), std::abs(a.v[i] - b.v[i])});
    return g;
  };
  parallel_for(n, jobs, [&](std::size_t i) {
    Rng rng = make_rng(P.seed, i);
    Row& r = rows[i];
    r.d = dim_of(i);
    const PhasePoint a = random_phase_point(rng, r.d, 1), b = random_phase_point(rng, r.d, 1),
                     c = random_phase_point(rng, r.d, 1);
    r.assoc = gap(compose(compose(a, b), c), compose(a, compose(b, c)));
    r.inv = std::max(gap(compose(a, inverse(a)), PhasePoint::origin(r.d)), gap(inverse(inverse(a)), a));
    r.dist = kinetic_distance(a, b, P.tol);
    r.upper = sup_norm(relative(b, a));
    r.tri_lhs = kinetic_distance(a, c, P.tol);
    r.tri_rhs = r.dist + kinetic_distance(b, c, P.tol);
    // Membership is compatible with left translation and scaling.
    const double R = uniform(rng, 0.3, 2.0);
    const KineticCylinder q{b, R};
    r.member_ok = contains(q, c) == contains(unit_kinetic(r.d), scale(relative(b, c), 1 / R));
  });
  double assoc = 0, inv = 0, low_gap = 0, up_gap = 0, tri_gap = -std::numeric_limits<double>::infinity();
  long low_bad = 0, up_bad = 0, tri_bad = 0, member_bad = 0;
  Table t{"distance_pairs", {"index", "d", "distance", "upper", "ratio"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    assoc = std::max(assoc, r.assoc);
    inv = std::max(inv, r.inv);
    low_bad += r.dist < r.upper / 2 - P.tol;
    up_bad += r.dist > r.upper + P.tol;
    low_gap = std::max(low_gap, r.upper / 2 - r.dist);
    up_gap = std::max(up_gap, r.dist - r.upper);
    tri_bad += r.tri_lhs > r.tri_rhs + 3 * P.tol;
    tri_gap = std::max(tri_gap, r.tri_lhs - r.tri_rhs);
    member_bad += !r.member_ok;
    t.rows.push_back({static_cast<long>(i), static_cast<long>(r.d), r.dist, r.upper, r.upper > 0 ? r.dist / r.upper : 1.0});
  }
  out.checks.push_back({"group_axioms", assoc < 1e-12 && inv < 1e-12, {{"max_associativity_gap", assoc}, {"max_inverse_gap", inv}}, ""});
  out.checks.push_back({"distance_bounds", low_bad == 0 && up_bad == 0,
                        {{"lower_violations", double(low_bad)}, {"upper_violations", double(up_bad)},
                         {"max_lower_excess", low_gap}, {"max_upper_excess", up_gap}}, "upper/2 - tol <= d <= upper + tol"});
  out.checks.push_back({"triangle", tri_bad == 0, {{"violations", double(tri_bad)}, {"max_excess", n ? tri_gap : 0.0}}, "within 3 tol"});
  const double d_half = kinetic_distance(PhasePoint(0, {0}, {1}), PhasePoint::origin(1), P.tol);
  const double d_one = kinetic_distance(PhasePoint(-1, {0}, {0}), PhasePoint::origin(1), P.tol);
  const double band = P.optimality_band;
  out.checks.push_back({"optimality", std::abs(d_half - 0.5) <= band && std::abs(d_one - 1) <= band,
                        {{"d_half", d_half}, {"d_one", d_one}, {"band", band}}, "instances with d = 1/2 and d = 1"});
  out.checks.push_back({"membership_scaling", member_bad == 0, {{"mismatches", double(member_bad)}}, ""});
  out.tables.push_back(std::move(t));
  return out;
}

// -------------------------------------------------------------------- kernel

struct KernelParams {
  int d = 1;
  double mass_L = 8;
  int mass_n = 0;           // 0: 400 (d = 1) or 64 (d = 2)
  double mass_tol = 0;      // 0: 1e-8 (d = 1) or 1e-4 (d = 2)
  std::vector<int> residual_meshes{48, 96, 192};
  double residual_order = 1.8;
  std::vector<int> adjoint_coarse{24, 16, 7}, adjoint_fine{48, 32, 7};
  int adjoint_targets = 5;
  double adjoint_threshold = 0.02;
  int young_pairs = 4;
  std::vector<int> weak_resolutions{32, 64, 128};
  double weak_stability = 0.1;
  std::uint64_t seed = 1;
};

inline GridFunction gamma_grid(std::vector<double> lo, std::vector<double> hi, int n) {
  return sample_grid({Axis::t, Axis::x, Axis::v}, std::move(lo), std::move(hi), {n, n, n},
                     [](const double* c) { return gamma(c[0], Vec{c[1]}, Vec{c[2]}, 1); });
}

inline void kernel_mass(const KernelParams& P, SuiteResult& out) {
  if (P.d != 1 && P.d != 2) throw DomainError("kernel suite supports d = 1 or d = 2");
  const int mass_n = P.mass_n > 0 ? P.mass_n : (P.d == 1 ? 400 : 64);
  const double mass_tol = P.mass_tol > 0 ? P.mass_tol : (P.d == 1 ? 1e-8 : 1e-4);
  const auto m = gamma_mass(1.0, P.d, P.mass_L, mass_n);
  out.checks.push_back({"mass", std::abs(m.total() - 1) <= mass_tol,
                        {{"box_mass", m.box_mass}, {"tail_mass", m.tail_mass}, {"error", m.total() - 1}, {"tol", mass_tol}}, ""});
}

inline void kernel_residual(const KernelParams& P, SuiteResult& out) {
  if (P.residual_meshes.size() < 2) throw DomainError("need at least two residual meshes");
  std::vector<double> hs, errs;
  Table t{"residual", {"n", "h", "l2", "max_abs"}, {}};
  for (int n : P.residual_meshes) {
    const auto r = kolmogorov_residual(gamma_grid({0.5, -1.5, -3}, {1.5, 1.5, 3}, n));
    hs.push_back(1.0 / n);
    errs.push_back(r.l2);
    t.rows.push_back({static_cast<long>(n), 1.0 / n, r.l2, r.max_abs});
  }
  const double order = fitted_order(hs, errs);
  out.checks.push_back({"residual_order", order >= P.residual_order, {{"order", order}, {"required", P.residual_order}}, ""});
  out.tables.push_back(std::move(t));
}

inline void kernel_adjoint(const KernelParams& P, unsigned jobs, SuiteResult& out) {
  auto quad = [](const std::vector<int>& q) {
    if (q.size() != 3) throw DomainError("adjoint quadrature needs [time_nodes, space_nodes, extent]");
    return AdjointQuadrature{q[0], q[1], static_cast<double>(q[2])};
  };
  const GaussianBump phi{PhasePoint(0, {0}, {0}), 4, 4, 4, 1, 30};
  const auto c = adjoint_identity_check(phi, P.adjoint_targets, quad(P.adjoint_coarse), jobs);
  const auto f = adjoint_identity_check(phi, P.adjoint_targets, quad(P.adjoint_fine), jobs);
  out.checks.push_back({"adjoint_identity", f.relative_error < c.relative_error && f.relative_error < P.adjoint_threshold,
                        {{"coarse_error", c.relative_error}, {"fine_error", f.relative_error}, {"threshold", P.adjoint_threshold}},
                        "error must decrease and end below the threshold"});
}

inline void kernel_young(const KernelParams& P, unsigned jobs, SuiteResult& out) {
  Rng rng = make_rng(P.seed, 1);
  const std::vector<std::pair<double, double>> exps{{1, 1}, {2, 1}, {1, 2}, {1.5, 1.5}, {2, 2}};
  long bad = 0;
  double worst = 0;
  Table t{"young", {"pair", "p", "q", "r", "lhs", "rhs"}, {}};
  auto bump = [&](const GaussianBump& b, double half, int n) {
    const PhasePoint& c = b.center;
    return sample_grid({Axis::t, Axis::x, Axis::v}, {c.t - half, c.x[0] - 2 * half, c.v[0] - half},
                       {c.t + half, c.x[0] + 2 * half, c.v[0] + half}, {n, n, n},
                       [&](const double* p) { return b(PhasePoint(p[0], {p[1]}, {p[2]})); });
  };
  for (int k = 0; k < P.young_pairs; ++k) {
    const GaussianBump fb{PhasePoint(0, {uniform(rng, -0.2, 0.2)}, {0}), uniform(rng, 1, 5), uniform(rng, 1, 5),
                          uniform(rng, 1, 5)};
    const GaussianBump gb{PhasePoint(0, {0}, {uniform(rng, -0.2, 0.2)}), uniform(rng, 2, 6), uniform(rng, 2, 6),
                          uniform(rng, 2, 6)};
    const auto [p, q] = exps[k % exps.size()];
    const auto r = young_check(bump(fb, 2.5, 14), bump(gb, 1.8, 12), p, q, {16, 20, 16}, 0.05, jobs);
    bad += !r.pass;
    worst = std::max(worst, r.rhs > 0 ? r.lhs / r.rhs : 0.0);
    t.rows.push_back({static_cast<long>(k), p, q, r.r, r.lhs, r.rhs});
  }
  if (P.young_pairs == 0) out.warnings.push_back("young_pairs = 0: Young check is vacuous");
  out.checks.push_back({"young", bad == 0, {{"failures", double(bad)}, {"max_ratio", worst}}, "lhs <= rhs (1 + 0.05)"});
  out.tables.push_back(std::move(t));
}

inline void kernel_weak(const KernelParams& P, SuiteResult& out) {
  const double p = gamma_lp_endpoint(1);
  Table t{"weak_lp", {"n", "p", "weak", "strong"}, {}};
  bool ordered = true, stable = true, grows = true;
  double prev_w = 0, prev_s = 0;
  for (int n : P.weak_resolutions) {
    const auto w = weak_lp_norm(gamma_grid({0, -2, -4}, {1, 2, 4}, n), p);
    ordered = ordered && w.value <= w.strong;
    if (prev_w > 0) {
      stable = stable && std::abs(w.value / prev_w - 1) <= P.weak_stability;
      grows = grows && w.strong > prev_s * 1.05;
    }
    prev_w = w.value;
    prev_s = w.strong;
    t.rows.push_back({static_cast<long>(n), p, w.value, w.strong});
  }
  out.checks.push_back({"weak_lp", ordered && stable && grows,
                        {{"p", p}, {"weak_finest", prev_w}, {"strong_finest", prev_s}, {"ordered", double(ordered)},
                         {"weak_stable", double(stable)}, {"strong_grows", double(grows)}},
                        "weak <= strong; weak stable; strong grows by 5% per refinement"});
  out.tables.push_back(std::move(t));
}

inline SuiteResult kernel_suite(const KernelParams& P, unsigned jobs = 1) {
  SuiteResult out;
  kernel_mass(P, out);
  if (P.d != 1) {
    out.warnings.push_back("residual, adjoint, Young and weak-Lp checks run in d = 1 only");
    return out;
  }
  kernel_residual(P, out);
  kernel_adjoint(P, jobs, out);
  kernel_young(P, jobs, out);
  kernel_weak(P, out);
  return out;
}

// ------------------------------------------------------------------ covering

struct CoveringParams {
  int vitali_families = 10;
  int maximal_instances = 50;
  int interval_families = 1000;
  std::vector<int> interval_m{1, 2, 4};
  int ink_instances = 100;
  std::uint64_t seed = 1;
};

inline void covering_vitali(const CoveringParams& P, unsigned jobs, SuiteResult& out) {
  auto random_kinetic = [](Rng& rng, double rmin, double rmax) {
    const double r = uniform(rng, rmin, rmax);
    return KineticCylinder{PhasePoint(uniform(rng, -0.8 + r * r, 0.0), {uniform(rng, -0.5, 0.5)}, {uniform(rng, -0.6, 0.6)}), r};
  };
  std::vector<long> missing(P.vitali_families, 0), overlaps(P.vitali_families, 0), selected(P.vitali_families, 0);
  parallel_for(static_cast<std::size_t>(std::max(P.vitali_families, 0)), jobs, [&](std::size_t i) {
    Rng rng = make_rng(P.seed, 1000 + i);
    const Lattice L(Geometry::kinetic, {-1, -0.8, -0.9}, {0.05, 0.8, 0.9}, {48, 96, 48});
    std::vector<KineticCylinder> fam;
    for (int k = 0; k < 100; ++k) fam.push_back(random_kinetic(rng, 0.05, 0.3));
    const auto sel = vitali_select(fam);
    selected[i] = static_cast<long>(sel.size());
    for (std::size_t a = 0; a < sel.size(); ++a)
      for (std::size_t b = a + 1; b < sel.size(); ++b) overlaps[i] += intersects(fam[sel[a]], fam[sel[b]]);
    RasterMask all(L), cover(L);
    for (const auto& q : fam) all.add_set(q);
    for (std::size_t s : sel) cover.add_set(dilate_5Q(fam[s]));
    for (std::size_t f = 0; f < all.bits.size(); ++f) missing[i] += all.bits[f] && !cover.bits[f];
  });
  long miss = 0, ov = 0;
  for (int i = 0; i < P.vitali_families; ++i) {
    miss += missing[i];
    ov += overlaps[i];
  }
  if (P.vitali_families == 0) out.warnings.push_back("vitali_families = 0: Vitali check is vacuous");
  out.checks.push_back({"vitali", miss == 0 && ov == 0, {{"families", double(P.vitali_families)}, {"overlapping_pairs", double(ov)}, {"uncovered_cells", double(miss)}}, ""});
}

inline void covering_maximal(const CoveringParams& P, unsigned jobs, SuiteResult& out) {
  const int n = std::max(P.maximal_instances, 0);
  std::vector<std::array<double, 3>> worst(n);
  std::vector<int> kin(n);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    Rng rng = make_rng(P.seed, 2000 + i);
    const bool k = i % 2 == 0;
    kin[i] = k;
    GridFunction g = k ? GridFunction({Axis::t, Axis::x, Axis::v}, {-1, -0.5, -1}, {0, 0.5, 1}, {24, 48, 24})
                       : GridFunction({Axis::t, Axis::x}, {-1, -1}, {0, 1}, {64, 64});
    std::vector<std::array<double, 5>> bumps;
    for (int b = 0; b < 5; ++b)
      bumps.push_back({uniform(rng, -0.9, -0.1), uniform(rng, -0.4, 0.4), uniform(rng, -0.5, 0.5),
                       uniform(rng, 0.5, 3.0), uniform(rng, 0.05, 0.2)});
    g.fill_with([&](const double* c) {
      double s = 0;
      for (const auto& b : bumps) {
        const double dv = k ? c[2] - b[2] : 0.0;
        s += b[3] * std::exp(-((c[0] - b[0]) * (c[0] - b[0]) + (c[1] - b[1]) * (c[1] - b[1]) + dv * dv) / (b[4] * b[4]));
      }
      return s;
    });
    const Geometry geo = k ? Geometry::kinetic : Geometry::parabolic;
    const auto M = maximal_function(g, geo, {0.5, 5, 2});
    worst[i] = {0, maximal_constant(geo, 1), 1};
    for (double kappa : {0.1, 0.5, 1.0}) {
      const auto r = maximal_inequality(g, M.Mg, kappa, geo);
      worst[i][0] = std::max(worst[i][0], r.ratio);
      if (!r.pass) worst[i][2] = 0;
    }
  });
  Table t{"maximal", {"instance", "geometry", "max_ratio", "bound"}, {}};
  bool ok = true;
  double top = 0;
  for (int i = 0; i < n; ++i) {
    ok = ok && worst[i][2] == 1;
    top = std::max(top, worst[i][0] / worst[i][1]);
    t.rows.push_back({static_cast<long>(i), std::string(kin[i] ? "kinetic" : "parabolic"), worst[i][0], worst[i][1]});
  }
  if (n == 0) out.warnings.push_back("maximal_instances = 0: maximal check is vacuous");
  out.checks.push_back({"maximal", ok, {{"instances", double(n)}, {"max_ratio_over_bound", top}}, "|{Mg > k}| k / |g|_1 <= 2 5^(1+2d) (kinetic), 2 5^(1+d) (parabolic)"});
  out.tables.push_back(std::move(t));
}

inline void covering_intervals(const CoveringParams& P, SuiteResult& out) {
  if (P.interval_m.empty()) throw DomainError("interval_m must not be empty");
  Rng rng = make_rng(P.seed, 3000);
  long fail = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < P.interval_families; ++inst) {
    const int m = P.interval_m[inst % P.interval_m.size()];
    std::vector<Interval> fam;
    const int k = 1 + static_cast<int>(uniform(rng, 0, 30));
    // Dyadic endpoints keep the sweep arithmetic exact.
    for (int j = 0; j < k; ++j)
      fam.push_back({std::ldexp(std::floor(uniform(rng, 0, 1024)), -8), std::ldexp(1 + std::floor(uniform(rng, 0, 64)), -8)});
    const auto r = interval_stack_ratio(fam, m);
    fail += !r.pass;
    worst = std::min(worst, r.ratio - r.bound);
  }
  if (P.interval_families == 0) {
    out.warnings.push_back("interval_families = 0: interval stacking check is vacuous");
    worst = 0;
  }
  out.checks.push_back({"interval_stacking", fail == 0, {{"families", double(P.interval_families)}, {"failures", double(fail)}, {"min_margin", worst}}, "ratio >= m/(m+1)"});
}

inline void covering_ink(const CoveringParams& P, unsigned jobs, SuiteResult& out) {
  const int n = std::max(P.ink_instances, 0);
  struct InkRow {
    int geo = 0, m = 1;
    bool hyp = false, pass = false;
    double E = 0, rhs = 0, slack = 0;
  };
  std::vector<InkRow> rows(n);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    const Geometry geo = i % 2 ? Geometry::kinetic : Geometry::parabolic;
    const int m = 1 + static_cast<int>((i / 2) % 2);
    const auto inst = make_ink_instance(geo, m, stream_seed(P.seed, 4000 + i), default_ink_params(geo));
    const auto r = ink_spots_check(inst.E, inst.F, geo, m, inst.r0);
    rows[i] = {geo == Geometry::kinetic, m, r.hypothesis_ok, r.pass, r.E, r.rhs, r.slack};
  });
  Table t{"ink_spots", {"instance", "geometry", "m", "hypothesis", "pass", "E", "rhs", "slack"}, {}};
  long bad = 0;
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[i];
    bad += !(r.hyp && r.pass);
    t.rows.push_back({static_cast<long>(i), std::string(r.geo ? "kinetic" : "parabolic"), static_cast<long>(r.m),
                      static_cast<long>(r.hyp), static_cast<long>(r.pass), r.E, r.rhs, r.slack});
  }
  if (n == 0) out.warnings.push_back("ink_instances = 0: ink-spots check is vacuous");
  out.checks.push_back({"ink_spots", bad == 0, {{"instances", double(n)}, {"failures", double(bad)}}, ""});
  out.tables.push_back(std::move(t));
}

inline SuiteResult covering_suite(const CoveringParams& P, unsigned jobs = 1) {
  SuiteResult out;
  covering_vitali(P, jobs, out);
  covering_maximal(P, jobs, out);
  covering_intervals(P, out);
  covering_ink(P, jobs, out);
  return out;
}

// -------------------------------------------------------------------- Hölder

struct HolderParams {
  std::vector<std::string> kinds{"random", "checkerboard"};
  std::vector<double> ratios{0.5, 0.2};  // λ/Λ with Λ = 1
  int instances = 4;                      // per (kind, ratio)
  int n = 128;
  bool refine = true;                     // also solve at 2n
  int tiles = 8;
  std::string boundary = "mixed";         // mixed | constant
  double r0 = 0.25;
  int k_max = 4;
  int fit_k_max = 3;
  int drop_largest = 0;
  double stability = 0.15;
  bool smooth = true;                     // smooth-coefficient reference case
  std::string smooth_kind = "identity";
  int smooth_n = 512;
  double smooth_r0 = 0.2;
  int smooth_fit_k_max = 4;
  std::vector<double> smooth_window{0.95, 1.05};
  std::uint64_t seed = 1;
};

inline GridFunction holder_solve(const CoefficientField& A, int n, const std::string& boundary) {
  EllipticProblem P;
  P.lo = {0, 0};
  P.hi = {1, 1};
  P.n = {n, n};
  P.A = A;
  if (boundary == "mixed") {
    P.boundary = [](const double* c) { return c[0] + 0.5 * std::sin(3 * c[1]); };
    P.source = [](const double*) { return 1.0; };
  } else if (boundary == "constant") {
    P.boundary = [](const double*) { return 1.0; };
  } else {
    throw DomainError("boundary must be mixed or constant");
  }
  return solve_elliptic(P).u;
}

inline SuiteResult holder_scan(const HolderParams& P, unsigned jobs = 1) {
  if (P.n < 16) throw DomainError("n must be at least 16");
  for (double r : P.ratios)
    if (!(r > 0 && r <= 1)) throw DomainError("ratios must lie in (0, 1]");
  std::vector<CoefficientKind> kinds;
  for (const auto& k : P.kinds) kinds.push_back(coefficient_kind_from(k));
  SuiteResult out;
  struct Inst {
    CoefficientKind kind;
    double ratio;
    int index;
  };
  std::vector<Inst> list;
  for (auto k : kinds)
    for (double r : P.ratios)
      for (int i = 0; i < P.instances; ++i) list.push_back({k, r, i});
  if (list.empty()) out.warnings.push_back("empty ensemble: rough-coefficient checks are vacuous");
  struct Res {
    std::vector<double> centre;
    OscillationProfile coarse, fine;
  };
  std::vector<Res> res(list.size());
  ProfileOptions opt;
  opt.r0 = P.r0;
  opt.k_max = P.k_max;
  opt.fit_k_max = P.fit_k_max;
  opt.drop_largest = P.drop_largest;
  opt.min_points = 3;
  parallel_for(list.size(), jobs, [&](std::size_t i) {
    const Inst& in = list[i];
    CoefficientSpec s;
    s.kind = in.kind;
    s.lambda = in.ratio;
    s.Lambda = 1;
    s.tiles = P.tiles;
    s.seed = stream_seed(P.seed, 5000 + i);
    const CoefficientField A(s, 2, {0, 0}, {1, 1});
    Rng rng = make_rng(P.seed, 6000 + i);
    // Checkerboard instances sit on a tile corner, where the solution is least regular.
    std::vector<double> c{uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7)};
    if (in.kind == CoefficientKind::checkerboard) {
      const double h = 1.0 / P.tiles;
      c = {h * std::round(c[0] / h), h * std::round(c[1] / h)};
    }
    res[i].centre = c;
    res[i].coarse = oscillation_profile(holder_solve(A, P.n, P.boundary), c, Shape::ball, opt);
    if (P.refine) res[i].fine = oscillation_profile(holder_solve(A, 2 * P.n, P.boundary), c, Shape::ball, opt);
  });
  Table inst{"holder_instances", {"instance", "kind", "ratio", "x", "y", "alpha", "alpha_refined", "relative_change", "monotone"}, {}};
  Table prof{"holder_profiles", {"instance", "n", "k", "radius", "oscillation", "cells", "used"}, {}};
  bool positive = true, monotone = true, stable = true, available = true;
  double worst_change = 0, min_alpha = std::numeric_limits<double>::infinity();
  std::vector<double> alphas;
  auto rel_change = [](double a, double b) {
    if (std::isinf(a) && std::isinf(b)) return 0.0;
    return std::abs(a - b) / std::abs(b);
  };
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& r = res[i];
    const double a = r.coarse.alpha;
    const double b = P.refine ? r.fine.alpha : std::numeric_limits<double>::quiet_NaN();
    const double ch = P.refine ? rel_change(a, b) : std::numeric_limits<double>::quiet_NaN();
    available = available && !std::isnan(a) && (!P.refine || !std::isnan(b));
    positive = positive && a > 0 && (!P.refine || b > 0);
    monotone = monotone && r.coarse.monotone && (!P.refine || r.fine.monotone);
    if (P.refine) {
      stable = stable && ch <= P.stability;
      worst_change = std::max(worst_change, ch);
    }
    min_alpha = std::min(min_alpha, a);
    alphas.push_back(P.refine ? b : a);
    inst.rows.push_back({static_cast<long>(i), std::string(coefficient_kind_name(list[i].kind)), list[i].ratio, r.centre[0],
                         r.centre[1], a, b, ch, static_cast<long>(r.coarse.monotone && (!P.refine || r.fine.monotone))});
    for (int level = 0; level < (P.refine ? 2 : 1); ++level) {
      const auto& p = level ? r.fine : r.coarse;
      for (std::size_t k = 0; k < p.radii.size(); ++k)
        prof.rows.push_back({static_cast<long>(i), static_cast<long>(P.n << level), static_cast<long>(k), p.radii[k], p.osc[k],
                             p.cells[k], static_cast<long>(p.used[k])});
    }
  }
  out.checks.push_back({"rough_alpha_positive", available && positive && monotone,
                        {{"instances", double(list.size())}, {"min_alpha", list.empty() ? 0.0 : min_alpha},
                         {"all_monotone", double(monotone)}, {"all_fitted", double(available)}},
                        "alpha > 0 with monotone oscillation profiles"});
  if (P.refine)
    out.checks.push_back({"rough_alpha_stable", stable, {{"max_relative_change", worst_change}, {"allowed", P.stability}}, "n vs 2n"});
  // Histogram of the fitted exponents (finest resolution), bins of width 0.05 on [0, 1.5].
  Table hist{"holder_alpha_histogram", {"bin_lo", "bin_hi", "count"}, {}};
  for (int b = 0; b < 30; ++b) {
    const double lo = 0.05 * b, hi = lo + 0.05;
    long c = 0;
    for (double a : alphas) c += (a >= lo && (a < hi || (b == 29 && a >= hi)));
    hist.rows.push_back({lo, hi, c});
  }
  if (P.smooth) {
    CoefficientSpec s;
    s.kind = coefficient_kind_from(P.smooth_kind);
    s.lambda = 0.5;
    s.Lambda = 1;
    s.seed = P.seed;
    if (s.kind == CoefficientKind::checkerboard || s.kind == CoefficientKind::random_piecewise_constant)
      throw DomainError("smooth_kind must be identity or rotating");
    const CoefficientField A(s, 2, {0, 0}, {1, 1});
    ProfileOptions so = opt;
    so.r0 = P.smooth_r0;
    so.k_max = P.smooth_fit_k_max + 1;
    so.fit_k_max = P.smooth_fit_k_max;
    const auto p = oscillation_profile(holder_solve(A, P.smooth_n, P.boundary), {0.5, 0.5}, Shape::ball, so);
    const bool inside = P.boundary == "constant" ? std::isinf(p.alpha)
                                                 : (p.alpha >= P.smooth_window[0] && p.alpha <= P.smooth_window[1]);
    out.checks.push_back({"smooth_alpha", inside, {{"alpha", p.alpha}, {"lo", P.smooth_window[0]}, {"hi", P.smooth_window[1]}},
                          P.boundary == "constant" ? "constant data: alpha is the +inf sentinel" : ""});
  }
  out.tables.push_back(std::move(inst));
  out.tables.push_back(std::move(prof));
  out.tables.push_back(std::move(hist));
  return out;
}

// ----------------------------------------------------------- Harnack family

struct HarnackParams {
  int instances = 50;
  int n_coarse = 64, n_fine = 128;
  double ratio = 0.2;        // λ/Λ with Λ = 1
  int tiles = 8;
  std::string initial = "bump";  // bump | constant | kernel | signed
  double omega = 0.25, R0 = 2;
  double x_half = 3, v_max = 4;
  double t0 = -1.25;
  int steps_per_unit = 128;  // at n_fine; halved at n_coarse
  double stability = 0.1;
  // Expansion of positivity.
  int expansion_instances = 50;
  double eta0 = 0.5;
  int expansion_n = 128;
  double expansion_x_half = 4;
  double source_eps = 0.1;
  std::uint64_t seed = 1;
};

inline CoefficientField kinetic_field(double ratio, int tiles, std::uint64_t seed, std::vector<double> lo,
                                      std::vector<double> hi) {
  CoefficientSpec s;
  s.kind = ratio == 1 ? CoefficientKind::identity : CoefficientKind::random_piecewise_constant;
  s.lambda = ratio;
  s.Lambda = 1;
  s.tiles = tiles;
  s.seed = seed;
  return CoefficientField(s, 1, std::move(lo), std::move(hi));
}

inline std::function<double(double, double)> harnack_initial(const std::string& kind) {
  if (kind == "bump") return [](double x, double v) { return 0.05 + 2 * std::exp(-4 * x * x - v * v); };
  if (kind == "constant") return [](double, double) { return 1.0; };
  if (kind == "kernel") return [](double x, double v) { return gamma(0.5, Vec{x}, Vec{v}, 1); };
  if (kind == "signed") return [](double x, double v) { return std::sin(x) * std::cos(v); };
  throw DomainError("initial must be bump, constant, kernel or signed");
}

// One rough kinetic solve on [t0, 0] with x and v periodic, linear transport.
inline KineticSolution harnack_solve(const HarnackParams& P, int n, int steps, std::uint64_t field_seed) {
  KineticProblem K;
  K.x_lo = -P.x_half;
  K.x_hi = P.x_half;
  K.nx = n;
  K.v_max = P.v_max;
  K.nv = n;
  K.t0 = P.t0;
  K.T = 0;
  K.steps = steps;
  K.A = kinetic_field(P.ratio, P.tiles, field_seed, {P.t0, -P.x_half, -P.v_max}, {0, P.x_half, P.v_max});
  K.initial = harnack_initial(P.initial);
  K.transport = Transport::linear;
  K.vbc = VBoundary::periodic;
  return solve_kinetic_fp(K);
}

inline KineticSolution expansion_solve(const HarnackParams& P, std::uint64_t field_seed) {
  KineticProblem K;
  K.x_lo = -P.expansion_x_half;
  K.x_hi = P.expansion_x_half;
  K.nx = P.expansion_n;
  K.v_max = 4;
  K.nv = P.expansion_n;
  K.t0 = -1 - P.eta0 * P.eta0;
  K.T = 0;
  K.steps = static_cast<int>(std::ceil(P.steps_per_unit * (K.T - K.t0)));
  K.A = kinetic_field(P.ratio, P.tiles, field_seed, {K.t0, K.x_lo, -4}, {0, K.x_hi, 4});
  K.initial = [](double x, double v) { return (std::abs(x) <= 0.6 && std::abs(v) <= 1.0) ? 3.0 : 0.0; };
  K.transport = Transport::linear;
  return solve_kinetic_fp(K);
}

inline SuiteResult harnack_experiment(const HarnackParams& P, unsigned jobs = 1) {
  if (P.n_coarse < 8 || P.n_fine < P.n_coarse) throw DomainError("need 8 <= n_coarse <= n_fine");
  if (!(P.ratio > 0 && P.ratio <= 1)) throw DomainError("ratio must lie in (0, 1]");
  if (!(P.omega > 0 && P.omega < 1)) throw DomainError("omega must lie in (0, 1)");
  if (!(P.t0 < -1)) throw DomainError("t0 must be below -1");
  harnack_initial(P.initial);
  SuiteResult out;
  const int n = std::max(P.instances, 0);
  struct Row {
    double q_coarse = 0, q_fine = 0, sup = 0, inf = 0;
  };
  std::vector<Row> rows(n);
  HarnackGeometry G;
  G.omega = P.omega;
  G.R0 = P.R0;
  const int steps_fine = static_cast<int>(std::ceil(P.steps_per_unit * -P.t0));
  const int steps_coarse = std::max(1, steps_fine * P.n_coarse / P.n_fine);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    const std::uint64_t fs = stream_seed(P.seed, 7000 + i);
    const auto c = harnack_quotient(harnack_solve(P, P.n_coarse, steps_coarse, fs).f, Shape::kinetic, G, 0.0);
    const auto f = harnack_quotient(harnack_solve(P, P.n_fine, steps_fine, fs).f, Shape::kinetic, G, 0.0);
    rows[i] = {c.quotient, f.quotient, f.sup_past, f.inf_future};
  });
  Table t{"harnack", {"instance", "quotient_coarse", "quotient_fine", "relative_change", "sup_past", "inf_future"}, {}};
  bool finite = true;
  double worst = 0, qmax = 0;
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const double ch = std::abs(r.q_coarse - r.q_fine) / r.q_fine;
    finite = finite && std::isfinite(r.q_coarse) && std::isfinite(r.q_fine);
    worst = std::max(worst, ch);
    qmax = std::max(qmax, r.q_fine);
    t.rows.push_back({static_cast<long>(i), r.q_coarse, r.q_fine, ch, r.sup, r.inf});
  }
  if (n == 0) out.warnings.push_back("instances = 0: Harnack check is vacuous");
  out.checks.push_back({"harnack_finite", finite, {{"instances", double(n)}, {"max_quotient", qmax}}, ""});
  out.checks.push_back({"harnack_stable", worst <= P.stability, {{"max_relative_change", worst}, {"allowed", P.stability}},
                        "n_coarse vs n_fine"});
  out.tables.push_back(std::move(t));

  const int m = std::max(P.expansion_instances, 0);
  if (m > 0) {
    std::vector<ExpansionInstance> ins(m);
    parallel_for(static_cast<std::size_t>(m), jobs, [&](std::size_t i) {
      ins[i] = expansion_measure(expansion_solve(P, stream_seed(P.seed, 8000 + i)).f, P.eta0, 0.0, P.source_eps);
    });
    Table e{"expansion", {"instance", "positive_fraction", "min_Q1", "included", "reason"}, {}};
    double ell = std::numeric_limits<double>::infinity();
    long included = 0;
    for (int i = 0; i < m; ++i) {
      e.rows.push_back({static_cast<long>(i), ins[i].positive_fraction, ins[i].min_Q1, static_cast<long>(ins[i].included),
                        ins[i].reason});
      if (!ins[i].included) {
        out.warnings.push_back("expansion instance " + std::to_string(i) + " excluded: " + ins[i].reason);
        continue;
      }
      ++included;
      ell = std::min(ell, ins[i].min_Q1);
    }
    out.checks.push_back({"expansion_positive", included > 0 && ell > 0,
                          {{"included", double(included)}, {"ell_hat", included ? ell : 0.0}}, "min over Q_1, ensemble minimum"});
    out.tables.push_back(std::move(e));
  }
  return out;
}

}  // namespace kinlab::lab
