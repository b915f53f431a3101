#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "raster.hpp"
#include "rng.hpp"

namespace kinlab {

// ---------------------------------------------------------------- Vitali

// Dyadic-class greedy: class n holds R/2^n < r <= R/2^{n-1}; classes are visited
// in order and, inside a class, cylinders in input order are kept when disjoint
// from everything kept so far.
template <class Cyl>
std::vector<std::size_t> vitali_select(const std::vector<Cyl>& family) {
  std::vector<std::size_t> out;
  if (family.empty()) return out;
  double R = 0;
  for (const auto& q : family) {
    if (!(q.radius > 0)) throw DomainError("cylinder radii must be positive");
    R = std::max(R, q.radius);
  }
  std::vector<int> cls(family.size());
  for (std::size_t j = 0; j < family.size(); ++j) {
    int n = 1;
    while (!(family[j].radius > std::ldexp(R, -n))) ++n;
    cls[j] = n;
  }
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cls[a] < cls[b]; });
  for (std::size_t j : order) {
    bool free = true;
    for (std::size_t s : out)
      if (intersects(family[j], family[s])) {
        free = false;
        break;
      }
    if (free) out.push_back(j);
  }
  return out;
}

// ------------------------------------------------------- maximal function

inline Lattice lattice_of(const GridFunction& g, Geometry geo) {
  const int want = geo == Geometry::kinetic ? 3 : 2;
  if (g.rank() != want || g.roles[0] != Axis::t || g.roles[1] != Axis::x ||
      (want == 3 && g.roles[2] != Axis::v))
    throw DimensionError(std::string("expected a d = 1 ") + geometry_name(geo) + " grid (t, x" +
                         (want == 3 ? ", v)" : ")"));
  std::array<double, 3> lo{g.lower[0], g.lower[1], want == 3 ? g.lower[2] : 0.0};
  std::array<double, 3> hi{g.upper[0], g.upper[1], want == 3 ? g.upper[2] : 1.0};
  std::array<int, 3> n{g.counts[0], g.counts[1], want == 3 ? g.counts[2] : 1};
  return Lattice(geo, lo, hi, n);
}

// Radius r is resolved when each axis extent of Q_r spans at least min_cells cells.
inline bool radius_resolved(const Lattice& L, double r, int min_cells) {
  const double ext_t = r * r;
  const double ext_x = L.geo == Geometry::kinetic ? 2 * r * r * r : 2 * r;
  if (ext_t < min_cells * L.h(0) || ext_x < min_cells * L.h(1)) return false;
  if (L.geo == Geometry::kinetic && 2 * r < min_cells * L.h(2)) return false;
  return true;
}

// The admissible cylinders: radii r_max 2^{-k}, k < levels, resolved ones only;
// tops on the lattice lower + (r²/2, s/2, r/2)·j, s the x radius (r³ or r),
// covering every cylinder that meets the box.
struct MaximalFamily {
  double r_max = 0.5;
  int levels = 4;
  int min_cells = 2;
};

struct MaximalResult {
  GridFunction Mg;
  std::vector<double> radii_used, radii_skipped;
  long cylinders = 0;
};

template <class Fn>
void enumerate_lattice_cylinders(const Lattice& L, double r, Fn&& fn) {
  const bool kin = L.geo == Geometry::kinetic;
  const double rx = kin ? r * r * r : r;
  const double st = r * r / 2, sx = rx / 2, sv = r / 2;
  const double vmax = kin ? std::max(std::abs(L.lo[2]), std::abs(L.hi[2])) + r : 0.0;
  const double xpad = rx + r * r * vmax;
  const long nt = static_cast<long>(std::ceil((L.hi[0] - L.lo[0] + r * r) / st));
  const long jx0 = static_cast<long>(std::floor(-xpad / sx)),
             jx1 = static_cast<long>(std::ceil((L.hi[1] - L.lo[1] + xpad) / sx));
  long jv0 = 0, jv1 = 0;
  if (kin) {
    jv0 = static_cast<long>(std::floor(-r / sv));
    jv1 = static_cast<long>(std::ceil((L.hi[2] - L.lo[2] + r) / sv));
  }
  for (long a = 1; a <= nt; ++a) {
    const double t0 = L.lo[0] + a * st;
    for (long b = jx0; b <= jx1; ++b) {
      const double x0 = L.lo[1] + b * sx;
      for (long c = jv0; c <= jv1; ++c) {
        SlantedSet s;
        if (kin)
          s = slanted(KineticCylinder{PhasePoint(t0, {x0}, {L.lo[2] + c * sv}), r});
        else
          s = slanted(ParabolicCylinder{t0, Vec{x0}, 1, r});
        fn(s);
      }
    }
  }
}

// Discrete maximal function: at each cell, the largest cylinder average of |g|
// over the admissible cylinders whose raster contains the cell. g is extended
// by 0 outside its box.
inline MaximalResult maximal_function(const GridFunction& g, Geometry geo, const MaximalFamily& fam) {
  const Lattice L = lattice_of(g, geo);
  std::vector<double> a(g.values.size());
  for (std::size_t f = 0; f < a.size(); ++f) a[f] = std::abs(g.values[f]);
  const SliceSums sums(L, a);
  MaximalResult res;
  res.Mg = g.like(0.0);
  for (int k = 0; k < fam.levels; ++k) {
    const double r = std::ldexp(fam.r_max, -k);
    if (!radius_resolved(L, r, fam.min_cells)) {
      res.radii_skipped.push_back(r);
      continue;
    }
    res.radii_used.push_back(r);
    enumerate_lattice_cylinders(L, r, [&](const SlantedSet& s) {
      const double cnt = cell_count(L, s);
      if (cnt == 0) return;
      const double sum = sums.sum(s);
      ++res.cylinders;
      if (sum == 0) return;
      const double avg = sum / cnt;
      for_each_row(L, s, true, [&](long i, long j, long k0, long k1) {
        const std::size_t base = L.index(static_cast<int>(i), static_cast<int>(j), 0);
        for (long q = k0; q < k1; ++q) res.Mg.values[base + q] = std::max(res.Mg.values[base + q], avg);
      });
    });
  }
  return res;
}

inline double maximal_constant(Geometry geo, int d) {
  return 2.0 * std::pow(5.0, 1 + (geo == Geometry::kinetic ? 2 : 1) * d);
}

struct MaximalInequality {
  double level_measure = 0;  // |{Mg > κ}|
  double g_l1 = 0;
  double ratio = 0;          // κ |{Mg > κ}| / ‖g‖₁
  double bound = 0;
  bool pass = false;
};

inline MaximalInequality maximal_inequality(const GridFunction& g, const GridFunction& Mg, double kappa,
                                            Geometry geo) {
  if (!(kappa > 0)) throw DomainError("level must be positive");
  MaximalInequality out;
  std::size_t c = 0;
  for (double m : Mg.values) c += m > kappa;
  out.level_measure = static_cast<double>(c) * Mg.cell_volume();
  out.g_l1 = g.lp_norm(1.0);
  out.ratio = out.g_l1 > 0 ? kappa * out.level_measure / out.g_l1 : 0.0;
  out.bound = maximal_constant(geo, 1);
  out.pass = out.ratio <= out.bound;
  return out;
}

// ------------------------------------------------------ interval stacking

struct Interval {
  double a, h;
};

struct IntervalStackReport {
  double stacked = 0;  // |∪ (a, a + m h)|
  double base = 0;     // |∪ (a - h, a]|
  double ratio = 0;
  double bound = 0;    // m / (m + 1)
  bool pass = true;
};

// Measure of a union of intervals given as (left, right) pairs.
inline double union_length(std::vector<std::pair<double, double>> iv) {
  std::sort(iv.begin(), iv.end());
  double total = 0;
  bool open = false;
  double lo = 0, hi = 0;
  for (const auto& [a, b] : iv) {
    if (!open || a > hi) {
      if (open) total += hi - lo;
      lo = a;
      hi = b;
      open = true;
    } else {
      hi = std::max(hi, b);
    }
  }
  if (open) total += hi - lo;
  return total;
}

inline IntervalStackReport interval_stack_ratio(const std::vector<Interval>& family, int m) {
  if (m < 1) throw DomainError("m must be >= 1");
  std::vector<std::pair<double, double>> up, down;
  for (const auto& I : family) {
    if (!(I.h > 0)) throw DomainError("interval heights must be positive");
    up.emplace_back(I.a, I.a + m * I.h);
    down.emplace_back(I.a - I.h, I.a);
  }
  IntervalStackReport r;
  r.stacked = union_length(up);
  r.base = union_length(down);
  r.bound = static_cast<double>(m) / (m + 1);
  r.ratio = r.base > 0 ? r.stacked / r.base : std::numeric_limits<double>::infinity();
  // Cross-multiplied so an exact sweep is compared without a division.
  r.pass = r.stacked * (m + 1) >= m * r.base;
  return r;
}

// ------------------------------------------------- stacked-cylinder union

struct StackUnionReport {
  double stacked = 0, base = 0, ratio = 0, bound = 0;
  double slack = 0;  // boundary-cell volume of both rasters over the base measure
  bool pass = false;
};

template <class Cyl>
StackUnionReport stacked_union_ratio(const std::vector<Cyl>& family, int m, const Lattice& L) {
  RasterMask up(L), down(L);
  for (const auto& q : family) {
    down.add_set(q);
    up.add_set(stack(q, m));
  }
  StackUnionReport r;
  r.stacked = up.measure();
  r.base = down.measure();
  r.bound = static_cast<double>(m) / (m + 1);
  if (r.base == 0) {
    r.ratio = std::numeric_limits<double>::infinity();
    r.pass = true;
    return r;
  }
  r.ratio = r.stacked / r.base;
  r.slack = (up.boundary_volume() + down.boundary_volume()) / r.base;
  r.pass = r.ratio >= r.bound - r.slack;
  return r;
}

// ----------------------------------------------------------- ink spots

inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1);
}

// c for the crawling-ink-spots step; 5^{-1-d}/4 at μ = 1/2.
inline double ink_spots_c(int d, double mu) { return std::pow(5.0, -1 - d) * std::min(mu, 1 - mu) / 2; }

// Leak constant: |B₁| (parabolic) and (1 + d 2^d)|B₁|² (kinetic).
inline double ink_spots_leak_constant(Geometry geo, int d) {
  const double b = unit_ball_volume(d);
  return geo == Geometry::kinetic ? (1 + d * std::pow(2.0, d)) * b * b : b;
}

struct InkFamily {
  int k_min = 1, k_max = 6;
  int min_cells = 4;
};

inline bool inside_unit(const SlantedSet& s, Geometry geo) {
  const double r = std::sqrt(s.t_hi - s.t_lo);
  if (s.t_hi > 0 || s.t_lo < -1) return false;
  if (geo == Geometry::parabolic) return std::abs(s.x0) + s.rx <= 1;
  if (std::abs(s.v0) + s.rv > 1) return false;
  return std::max(std::abs(s.x0), std::abs(s.x0 - r * r * s.v0)) + s.rx <= 1;
}

// Family cylinders Q ⊆ Q₁ of radius 2^{-k}: tops t0 = -j r²/2, x0 = j s/2 and
// v0 = j r/2 (kinetic), restricted to those meeting the lattice box.
template <class Fn>
void enumerate_ink_family(const Lattice& L, double r, Fn&& fn) {
  const bool kin = L.geo == Geometry::kinetic;
  const double rx = kin ? r * r * r : r;
  const double st = r * r / 2, sx = rx / 2, sv = r / 2;
  const long a0 = static_cast<long>(std::floor(-std::min(0.0, L.hi[0] + r * r) / st)) - 1;
  const long a1 = static_cast<long>(std::ceil(-L.lo[0] / st)) + 1;
  const double xpad = rx + (kin ? r * r : 0.0);
  const long b0 = static_cast<long>(std::floor((L.lo[1] - xpad) / sx)) - 1;
  const long b1 = static_cast<long>(std::ceil((L.hi[1] + xpad) / sx)) + 1;
  long c0 = 0, c1 = 0;
  if (kin) {
    c0 = static_cast<long>(std::floor((L.lo[2] - r) / sv)) - 1;
    c1 = static_cast<long>(std::ceil((L.hi[2] + r) / sv)) + 1;
  }
  for (long a = std::max(0L, a0); a <= a1; ++a) {
    const double t0 = -a * st;
    for (long b = b0; b <= b1; ++b)
      for (long c = c0; c <= c1; ++c) {
        SlantedSet s = kin ? slanted(KineticCylinder{PhasePoint(t0, {b * sx}, {c * sv}), r})
                           : slanted(ParabolicCylinder{t0, Vec{b * sx}, 1, r});
        if (!inside_unit(s, L.geo)) continue;
        fn(s);
      }
  }
}

inline SlantedSet stacked_of(const SlantedSet& s, int m) {
  const double r2 = s.t_hi - s.t_lo;
  SlantedSet u = s;
  u.t_lo = s.t_hi;
  u.t_hi = s.t_hi + m * r2;
  u.closed_top = false;
  u.rx = s.has_v ? (m + 2) * s.rx : s.rx;
  return u;
}

struct InkSpotsReport {
  Geometry geo = Geometry::kinetic;
  int m = 1;
  double mu = 0.5, r0 = 0;
  double E = 0, F_in_Q1 = 0;
  double c = 0, C = 0, rhs = 0;
  double slack = 0;
  bool hypothesis_ok = true;
  std::string violation;              // first violating cylinder when !hypothesis_ok
  std::vector<double> radii_checked, radii_skipped;
  long half_filled = 0;
  double max_half_filled_radius = 0;
  bool pass = false;                  // |E| <= rhs + slack, given the hypothesis
};

// Checks the hypothesis over the documented family and evaluates
// |E| <= (m+1)/m (1 - c)(|F ∩ Q₁| + C m r0²).
inline InkSpotsReport ink_spots_check(const RasterMask& E, const RasterMask& F, Geometry geo, int m,
                                      double r0, double mu = 0.5, const InkFamily& fam = {}) {
  if (m < 1) throw DomainError("m must be >= 1");
  if (!(r0 > 0 && r0 < 1)) throw DomainError("r0 must lie in (0, 1)");
  if (!(mu > 0 && mu < 1)) throw DomainError("mu must lie in (0, 1)");
  const Lattice& L = E.lattice;
  if (L.geo != geo || F.lattice.geo != geo || F.bits.size() != E.bits.size())
    throw DimensionError("E and F must share a lattice of the requested geometry");
  InkSpotsReport rep;
  rep.geo = geo;
  rep.m = m;
  rep.mu = mu;
  rep.r0 = r0;
  RasterMask Q1(L);
  Q1.add(geo == Geometry::kinetic ? slanted(unit_kinetic(1)) : slanted(unit_parabolic(1)));
  for (std::size_t f = 0; f < E.bits.size(); ++f)
    if (E.bits[f] && !(F.bits[f] && Q1.bits[f])) {
      rep.hypothesis_ok = false;
      rep.violation = "E is not contained in F ∩ Q1";
      break;
    }
  std::vector<double> ew(E.bits.begin(), E.bits.end()), fw(F.bits.begin(), F.bits.end());
  const SliceSums es(L, ew), fs(L, fw);
  for (int k = fam.k_min; k <= fam.k_max && rep.hypothesis_ok; ++k) {
    const double r = std::ldexp(1.0, -k);
    if (!radius_resolved(L, r, fam.min_cells)) {
      rep.radii_skipped.push_back(r);
      continue;
    }
    rep.radii_checked.push_back(r);
    enumerate_ink_family(L, r, [&](const SlantedSet& s) {
      if (!rep.hypothesis_ok) return;
      const double hit = es.sum(s);
      if (!(hit > mu * cell_count(L, s))) return;
      ++rep.half_filled;
      rep.max_half_filled_radius = std::max(rep.max_half_filled_radius, r);
      const SlantedSet up = stacked_of(s, m);
      const bool stack_in_F = fs.sum(up) == cell_count(L, up);
      if (!stack_in_F || !(r < r0)) {
        rep.hypothesis_ok = false;
        rep.violation = std::string(stack_in_F ? "radius not below r0" : "stacked cylinder not in F") +
                        " at top t0=" + std::to_string(s.t_hi) + " x0=" + std::to_string(s.x0) +
                        " v0=" + std::to_string(s.v0) + " r=" + std::to_string(r);
      }
    });
  }
  rep.E = E.measure();
  rep.F_in_Q1 = intersection_measure(F, Q1);
  rep.c = ink_spots_c(1, mu);
  rep.C = ink_spots_leak_constant(geo, 1);
  rep.rhs = (m + 1.0) / m * (1 - rep.c) * (rep.F_in_Q1 + rep.C * m * r0 * r0);
  rep.slack = E.boundary_volume() + F.boundary_volume();
  rep.pass = rep.hypothesis_ok && rep.E <= rep.rhs + rep.slack;
  return rep;
}

struct InkInstance {
  RasterMask E, F;
  double r0 = 0.5;
  double keep = 0.5;
};

struct InkInstanceParams {
  int cylinders = 3;
  double rho_min = 0.125, rho_max = 0.25;
  double ht = 1.0 / 256, hx = 1.0 / 1024, hv = 1.0 / 32;
  double r_cap = 0.25;  // largest family radius whose stack the box must hold
};

// Cell sizes resolving radius 1/8 (kinetic) and 1/16 (parabolic) at 4 cells.
inline InkInstanceParams default_ink_params(Geometry geo) {
  InkInstanceParams p;
  if (geo == Geometry::parabolic) {
    p.ht = 1.0 / 2048;
    p.hx = 1.0 / 256;
  }
  return p;
}

// E: a random union of base cylinders, cells kept with probability `keep`.
// F: the base union plus the stacks of every family cylinder that E half fills.
inline InkInstance make_ink_instance(Geometry geo, int m, std::uint64_t seed, InkInstanceParams p = {},
                                     const InkFamily& fam = {}) {
  const bool kin = geo == Geometry::kinetic;
  Rng rng = make_rng(seed);
  InkInstance inst;
  inst.keep = uniform(rng, 0.55, 0.9);
  std::vector<SlantedSet> base;
  const double tc = uniform(rng, -0.7, -0.3), xc = uniform(rng, -0.4, 0.4), vc = uniform(rng, -0.4, 0.4);
  double tlo = 0, thi = -1, xlo = 1, xhi = -1;
  for (int q = 0; q < p.cylinders; ++q) {
    const double rho = uniform(rng, p.rho_min, p.rho_max);
    const double t0 = tc + uniform(rng, -0.05, 0.05);
    const double x0 = xc + uniform(rng, -1, 1) * (kin ? 0.02 : 0.1);
    SlantedSet s = kin ? slanted(KineticCylinder{PhasePoint(t0, {x0}, {vc + uniform(rng, -0.2, 0.2)}), rho})
                       : slanted(ParabolicCylinder{t0, Vec{x0}, 1, rho});
    base.push_back(s);
    tlo = std::min(tlo, s.t_lo);
    thi = std::max(thi, s.t_hi);
    const double drift = kin ? rho * rho * std::abs(s.v0) : 0.0;
    xlo = std::min(xlo, s.x0 - drift - s.rx);
    xhi = std::max(xhi, s.x0 + drift + s.rx);
  }
  const double rc = p.r_cap;
  const double rcx = kin ? rc * rc * rc : rc;
  const double xpad = kin ? (m + 1) * rc * rc + (m + 3) * rcx : 2 * rcx;
  std::array<double, 3> lo{std::max(-1.0, tlo - rc * rc), xlo - xpad, -1.0};
  std::array<double, 3> hi{thi + (m + 1) * rc * rc, xhi + xpad, 1.0};
  if (!kin) {
    lo[1] = std::max(lo[1], -1.0 - 1e-9);
    hi[1] = std::min(hi[1], 1.0 + 1e-9);
  }
  std::array<int, 3> n{static_cast<int>(std::ceil((hi[0] - lo[0]) / p.ht)),
                       static_cast<int>(std::ceil((hi[1] - lo[1]) / p.hx)),
                       kin ? static_cast<int>(std::ceil((hi[2] - lo[2]) / p.hv)) : 1};
  // Snap the box so cell sizes are exactly the requested ones.
  hi[0] = lo[0] + n[0] * p.ht;
  hi[1] = lo[1] + n[1] * p.hx;
  if (kin) hi[2] = lo[2] + n[2] * p.hv;
  const Lattice L(geo, lo, hi, n);
  RasterMask U(L);
  for (const auto& s : base) U.add(s);
  inst.E = RasterMask(L);
  const std::uint64_t salt = stream_seed(seed, 0x1234);
  for (std::size_t f = 0; f < U.bits.size(); ++f)
    if (U.bits[f] && hash_uniform(splitmix64(salt ^ f), 0, 1) < inst.keep) inst.E.bits[f] = 1;
  inst.F = U;
  std::vector<double> ew(inst.E.bits.begin(), inst.E.bits.end());
  const SliceSums es(L, ew);
  double rmax = 0;
  for (int k = fam.k_min; k <= fam.k_max; ++k) {
    const double r = std::ldexp(1.0, -k);
    if (!radius_resolved(L, r, fam.min_cells)) continue;
    enumerate_ink_family(L, r, [&](const SlantedSet& s) {
      if (es.sum(s) > 0.5 * cell_count(L, s)) {
        inst.F.add(stacked_of(s, m));
        rmax = std::max(rmax, r);
      }
    });
  }
  inst.r0 = rmax > 0 ? std::min(2 * rmax, (1 + rmax) / 2) : std::ldexp(1.0, -fam.k_max);
  return inst;
}

// --------------------------------------------------- Lebesgue differentiation

struct LebesgueRow {
  double r = 0;
  double median = 0, mean = 0;
};

struct LebesgueReport {
  std::vector<LebesgueRow> rows;  // decreasing r
  long samples = 0;
  bool monotone = true;           // medians non-increasing as r decreases
};

// For random cells z with Q_{r_max}(z) inside the box, the averages
// ⨍_{Q_r(z)} |g - g(z)| over the cells of Q_r(z), r = r_max 2^{-k}.
inline LebesgueReport lebesgue_differentiation_probe(const GridFunction& g, Geometry geo, double r_max,
                                                     int levels, int samples, std::uint64_t seed,
                                                     int min_cells = 2) {
  const Lattice L = lattice_of(g, geo);
  std::vector<double> radii;
  for (int k = 0; k < levels; ++k) {
    const double r = std::ldexp(r_max, -k);
    if (radius_resolved(L, r, min_cells)) radii.push_back(r);
  }
  LebesgueReport rep;
  if (radii.empty()) return rep;
  std::vector<std::vector<double>> vals(radii.size());
  Rng rng = make_rng(seed);
  const bool kin = geo == Geometry::kinetic;
  int attempts = 0;
  while (rep.samples < samples && attempts < 100 * samples + 100) {
    ++attempts;
    const int i = static_cast<int>(uniform(rng, 0, L.n[0]));
    const int j = static_cast<int>(uniform(rng, 0, L.n[1]));
    const int k = kin ? static_cast<int>(uniform(rng, 0, L.n[2])) : 0;
    const double t0 = L.centre(0, i), x0 = L.centre(1, j), v0 = kin ? L.centre(2, k) : 0.0;
    auto cyl = [&](double r) {
      return kin ? slanted(KineticCylinder{PhasePoint(t0, {x0}, {v0}), r})
                 : slanted(ParabolicCylinder{t0, Vec{x0}, 1, r});
    };
    const SlantedSet big = cyl(radii[0]);
    double inside = 0;
    for_each_row(L, big, true, [&](long, long, long a, long b) { inside += static_cast<double>(b - a); });
    if (inside != cell_count(L, big)) continue;
    const double gz = g.values[L.index(i, j, k)];
    for (std::size_t q = 0; q < radii.size(); ++q) {
      double s = 0, c = 0;
      for_each_row(L, cyl(radii[q]), true, [&](long a, long b, long k0, long k1) {
        const std::size_t base = L.index(static_cast<int>(a), static_cast<int>(b), 0);
        for (long w = k0; w < k1; ++w) s += std::abs(g.values[base + w] - gz);
        c += static_cast<double>(k1 - k0);
      });
      vals[q].push_back(c > 0 ? s / c : 0.0);
    }
    ++rep.samples;
  }
  for (std::size_t q = 0; q < radii.size(); ++q) {
    auto v = vals[q];
    LebesgueRow row{radii[q], 0, 0};
    if (!v.empty()) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      row.median = v[v.size() / 2];
      row.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    }
    if (!rep.rows.empty() && row.median > rep.rows.back().median) rep.monotone = false;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace kinlab
