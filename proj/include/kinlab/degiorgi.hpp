#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "covering.hpp"
#include "distance.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "rng.hpp"

// De Giorgi measurements on grid functions. Essential sup/inf are grid max/min,
// sets are rasterized by cell centres.
//
// Grid layouts: elliptic (x_1..x_d), parabolic (t, x_1..x_d), kinetic
// (t, x_1..x_d, v_1..v_d).

namespace kinlab {

enum class Sign { plus, minus };
enum class Shape { ball, parabolic, kinetic };

inline const char* shape_name(Shape s) {
  return s == Shape::ball ? "ball" : s == Shape::parabolic ? "parabolic" : "kinetic";
}

using GridProfile = std::function<double(const double*)>;  // coordinates in grid order

struct TruncationLevel {
  double kappa = 0;
  Sign sign = Sign::plus;
};

inline double truncated(double u, double kappa, Sign s) {
  return s == Sign::plus ? std::max(u - kappa, 0.0) : std::max(kappa - u, 0.0);
}

inline GridFunction truncate(const GridFunction& u, double kappa, Sign s) {
  GridFunction out = u;
  for (double& w : out.values) w = truncated(w, kappa, s);
  return out;
}

inline GridFunction truncate(const GridFunction& u, TruncationLevel L) { return truncate(u, L.kappa, L.sign); }

// Forward difference along axis a attributed to the lower cell: the pair
// (i, i+1), or (n-2, n-1) on the last cell. Writes the two flat indices used.
inline double forward_difference(const GridFunction& u, const int* idx, int a, std::size_t* lo = nullptr,
                                 std::size_t* hi = nullptr) {
  const int n = u.counts[a];
  if (n < 2) return 0.0;
  int p[8];
  std::copy(idx, idx + u.rank(), p);
  if (p[a] == n - 1) p[a] = n - 2;
  const std::size_t f0 = u.index(p);
  const std::size_t f1 = f0 + u.stride(a);
  if (lo) *lo = f0;
  if (hi) *hi = f1;
  return (u.values[f1] - u.values[f0]) / u.spacing(a);
}

// ------------------------------------------------------------------ regions

// A set given by a predicate on grid coordinates with a bounding box.
struct Region {
  std::vector<double> lo, hi;
  std::function<bool(const double*)> contains;
  double volume = 0;  // exact Lebesgue measure
};

// Values of g over Q: at cell centres when Q holds at least min_cells of them,
// otherwise interpolated on a sub^k lattice of the bounding box (cylinders that
// are thin in x can miss every centre).
inline std::vector<double> region_values(const GridFunction& g, const Region& Q, std::size_t min_cells = 64,
                                         int sub = 8);

inline bool region_inside_grid(const GridFunction& g, const Region& R, double slack = 1e-12) {
  for (int a = 0; a < g.rank(); ++a)
    if (R.lo[a] < g.lower[a] - slack || R.hi[a] > g.upper[a] + slack) return false;
  return true;
}

// fn(flat, idx, coords) for every cell whose centre lies in the bounding box
// (expanded by `pad` cells per side).
template <class Fn>
void for_cells_in_box(const GridFunction& g, const std::vector<double>& lo, const std::vector<double>& hi, Fn&& fn,
                      int pad = 0) {
  const int k = g.rank();
  int first[8], last[8], idx[8];
  for (int a = 0; a < k; ++a) {
    const double h = g.spacing(a);
    first[a] = std::max(0, static_cast<int>(std::ceil((lo[a] - g.lower[a]) / h - 0.5 - 1e-9)) - pad);
    last[a] = std::min(g.counts[a] - 1, static_cast<int>(std::floor((hi[a] - g.lower[a]) / h - 0.5 + 1e-9)) + pad);
    if (first[a] > last[a]) return;
    idx[a] = first[a];
  }
  double c[8];
  while (true) {
    const std::size_t f = g.index(idx);
    for (int a = 0; a < k; ++a) c[a] = g.center(a, idx[a]);
    fn(f, static_cast<const int*>(idx), static_cast<const double*>(c));
    int a = k - 1;
    while (a >= 0 && ++idx[a] > last[a]) {
      idx[a] = first[a];
      --a;
    }
    if (a < 0) return;
  }
}

inline std::vector<double> region_values(const GridFunction& g, const Region& Q, std::size_t min_cells, int sub) {
  std::vector<double> out;
  for_cells_in_box(g, Q.lo, Q.hi, [&](std::size_t f, const int*, const double* c) {
    if (Q.contains(c)) out.push_back(g.values[f]);
  });
  if (out.size() >= min_cells) return out;
  out.clear();
  const int k = g.rank();
  std::vector<int> idx(k, 0);
  std::vector<double> z(k);
  while (true) {
    for (int a = 0; a < k; ++a) z[a] = Q.lo[a] + (idx[a] + 0.5) / sub * (Q.hi[a] - Q.lo[a]);
    if (Q.contains(z.data())) out.push_back(g.interpolate(z.data()));
    int a = k - 1;
    while (a >= 0 && ++idx[a] >= sub) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) return out;
  }
}

inline std::vector<std::size_t> region_cells(const GridFunction& g, const Region& R) {
  std::vector<std::size_t> out;
  for_cells_in_box(g, R.lo, R.hi, [&](std::size_t f, const int*, const double* c) {
    if (R.contains(c)) out.push_back(f);
  });
  return out;
}

// Cells whose corners are not all on the same side of the region boundary,
// as a fraction of the cells whose centre lies inside.
inline double boundary_fraction(const GridFunction& g, const Region& R) {
  const int k = g.rank();
  long inside = 0, straddle = 0;
  double corner[8];
  for_cells_in_box(
      g, R.lo, R.hi,
      [&](std::size_t, const int*, const double* c) {
        if (R.contains(c)) ++inside;
        int in = 0;
        for (int m = 0; m < (1 << k); ++m) {
          for (int a = 0; a < k; ++a) corner[a] = c[a] + (((m >> a) & 1) ? 0.5 : -0.5) * g.spacing(a);
          in += R.contains(corner) ? 1 : 0;
        }
        if (in != 0 && in != (1 << k)) ++straddle;
      },
      1);
  return inside > 0 ? static_cast<double>(straddle) / static_cast<double>(inside) : 1.0;
}

inline int space_dim(const GridFunction& g, Shape s) {
  switch (s) {
    case Shape::ball: return g.rank();
    case Shape::parabolic: return g.rank() - 1;
    case Shape::kinetic: return (g.rank() - 1) / 2;
  }
  return 0;
}

inline void check_layout(const GridFunction& g, Shape s) {
  const int k = g.rank();
  bool ok = true;
  if (s == Shape::ball) {
    ok = g.count_role(Axis::x) == k;
  } else if (s == Shape::parabolic) {
    ok = k >= 2 && g.roles[0] == Axis::t && g.count_role(Axis::x) == k - 1;
  } else {
    const int d = (k - 1) / 2;
    ok = k >= 3 && (k - 1) % 2 == 0 && g.roles[0] == Axis::t;
    for (int i = 0; ok && i < d; ++i) ok = g.roles[1 + i] == Axis::x && g.roles[1 + d + i] == Axis::v;
  }
  if (!ok) throw DimensionError(std::string("grid layout does not match ") + shape_name(s) + " geometry");
}

inline PhasePoint phase_of(const double* c, int d) {
  PhasePoint z = PhasePoint::origin(d);
  z.t = c[0];
  for (int i = 0; i < d; ++i) {
    z.x[i] = c[1 + i];
    z.v[i] = c[1 + d + i];
  }
  return z;
}

// Euclidean ball on an all-x grid.
inline Region ball_region(std::vector<double> centre, double r) {
  Region R;
  for (double c : centre) {
    R.lo.push_back(c - r);
    R.hi.push_back(c + r);
  }
  R.contains = [centre, r](const double* c) {
    double s = 0;
    for (std::size_t a = 0; a < centre.size(); ++a) s += (c[a] - centre[a]) * (c[a] - centre[a]);
    return s < r * r;
  };
  R.volume = unit_ball_volume(static_cast<int>(centre.size())) * std::pow(r, static_cast<double>(centre.size()));
  return R;
}

// (t0 - r², t0] × B_r(x0) on a (t, x..) grid.
inline Region parabolic_region(double t0, std::vector<double> x0, double r) {
  Region R;
  R.lo.push_back(t0 - r * r);
  R.hi.push_back(t0);
  for (double c : x0) {
    R.lo.push_back(c - r);
    R.hi.push_back(c + r);
  }
  const int d = static_cast<int>(x0.size());
  ParabolicCylinder q{t0, make_vec(x0), d, r};
  R.contains = [q, d](const double* c) {
    Vec x{};
    for (int i = 0; i < d; ++i) x[i] = c[1 + i];
    return contains(q, c[0], x);
  };
  R.volume = r * r * unit_ball_volume(d) * std::pow(r, d);
  return R;
}

// Q_r(z0) on a (t, x.., v..) grid.
inline Region kinetic_region(const KineticCylinder& q) {
  const int d = q.center.d;
  const double r = q.radius;
  const PhasePoint& z = q.center;
  Region R;
  R.lo.push_back(z.t - r * r);
  R.hi.push_back(z.t);
  for (int i = 0; i < d; ++i) {
    const double a = z.x[i] - r * r * z.v[i];
    R.lo.push_back(std::min(a, z.x[i]) - r * r * r);
    R.hi.push_back(std::max(a, z.x[i]) + r * r * r);
  }
  for (int i = 0; i < d; ++i) {
    R.lo.push_back(z.v[i] - r);
    R.hi.push_back(z.v[i] + r);
  }
  R.contains = [q, d](const double* c) { return contains(q, phase_of(c, d)); };
  R.volume = r * r * unit_ball_volume(d) * unit_ball_volume(d) * std::pow(r, 4 * d);
  return R;
}

// (t_lo, t_hi] × B_rx(x0) × B_rv(v0), not a kinetic cylinder.
inline Region product_region(double t_lo, double t_hi, std::vector<double> x0, double rx, std::vector<double> v0,
                             double rv) {
  const int d = static_cast<int>(x0.size());
  Region R;
  R.lo.push_back(t_lo);
  R.hi.push_back(t_hi);
  for (int i = 0; i < d; ++i) {
    R.lo.push_back(x0[i] - rx);
    R.hi.push_back(x0[i] + rx);
  }
  for (int i = 0; i < d; ++i) {
    R.lo.push_back(v0[i] - rv);
    R.hi.push_back(v0[i] + rv);
  }
  R.contains = [=](const double* c) {
    if (!(c[0] > t_lo && c[0] <= t_hi)) return false;
    double sx = 0, sv = 0;
    for (int i = 0; i < d; ++i) {
      sx += (c[1 + i] - x0[i]) * (c[1 + i] - x0[i]);
      sv += (c[1 + d + i] - v0[i]) * (c[1 + d + i] - v0[i]);
    }
    return sx < rx * rx && sv < rv * rv;
  };
  R.volume = (t_hi - t_lo) * unit_ball_volume(d) * unit_ball_volume(d) * std::pow(rx * rv, d);
  return R;
}

inline Region shape_region(Shape s, const std::vector<double>& centre, double r) {
  switch (s) {
    case Shape::ball: return ball_region(centre, r);
    case Shape::parabolic: return parabolic_region(centre[0], {centre.begin() + 1, centre.end()}, r);
    case Shape::kinetic: {
      const int d = static_cast<int>(centre.size() - 1) / 2;
      return kinetic_region({phase_of(centre.data(), d), r});
    }
  }
  throw DomainError("unknown shape");
}

// -------------------------------------------------------- energy estimates

struct EnergyRecord {
  std::vector<double> params;  // geometry of the sample, layout depends on the variant
  double kappa = 0;
  Sign sign = Sign::plus;
  double lhs = 0;
  double initial = 0;  // time-dependent variants only
  double energy = 0;
  double source = 0;
  double ratio = 0;
  double slack = 0;    // boundary-cell fraction of the rasterized sets
};

struct EnergyReport {
  std::vector<EnergyRecord> records;
  std::vector<std::string> skipped;
  double bound = 0;
  double worst_ratio = 0;
  double slack = 0;  // max over records
  bool pass() const { return worst_ratio <= bound * (1 + slack); }
};

inline double safe_ratio(double num, double den) {
  if (num <= 0) return 0.0;
  return den > 0 ? num / den : std::numeric_limits<double>::infinity();
}

inline void finish(EnergyReport& rep) {
  for (const auto& r : rep.records) {
    rep.worst_ratio = std::max(rep.worst_ratio, r.ratio);
    rep.slack = std::max(rep.slack, r.slack);
  }
}

inline double caccioppoli_constant(double lambda, double Lambda) { return std::max(2 / lambda, 16 * Lambda / lambda); }

struct EllipticEnergySample {
  std::vector<double> centre;
  double r = 0, R = 0, kappa = 0;
  Sign sign = Sign::plus;
};

// ∫_{B_r}|∇(u-κ)±|² against (R-r)^{-2}∫_{B_R}(u-κ)±² + ∫_{B_R}|S|(u-κ)±; the
// ratio is compared with max(2/λ, 16Λ/λ).
inline EnergyReport caccioppoli_elliptic(const GridFunction& u, double lambda, double Lambda, const GridProfile& S,
                                         const std::vector<EllipticEnergySample>& samples) {
  check_layout(u, Shape::ball);
  if (!(lambda > 0) || Lambda < lambda) throw DomainError("need 0 < lambda <= Lambda");
  const int d = u.rank();
  EnergyReport rep;
  rep.bound = caccioppoli_constant(lambda, Lambda);
  const double vol = u.cell_volume();
  for (const auto& s : samples) {
    if (static_cast<int>(s.centre.size()) != d) throw DimensionError("sample centre dimension");
    if (!(s.r > 0 && s.R > s.r)) {
      rep.skipped.push_back("need 0 < r < R");
      continue;
    }
    const Region inner = ball_region(s.centre, s.r), outer = ball_region(s.centre, s.R);
    if (!region_inside_grid(u, outer)) {
      rep.skipped.push_back("B_R leaves the grid (R = " + std::to_string(s.R) + ")");
      continue;
    }
    EnergyRecord rec;
    rec.params = s.centre;
    rec.params.push_back(s.r);
    rec.params.push_back(s.R);
    rec.kappa = s.kappa;
    rec.sign = s.sign;
    for (std::size_t f : region_cells(u, inner)) {
      int idx[8];
      u.unravel(f, idx);
      for (int a = 0; a < d; ++a) {
        std::size_t f0, f1;
        forward_difference(u, idx, a, &f0, &f1);
        const double g = (truncated(u.values[f1], s.kappa, s.sign) - truncated(u.values[f0], s.kappa, s.sign)) /
                         u.spacing(a);
        rec.lhs += g * g * vol;
      }
    }
    double e = 0, src = 0, c[8];
    for (std::size_t f : region_cells(u, outer)) {
      const double w = truncated(u.values[f], s.kappa, s.sign);
      e += w * w * vol;
      if (S) {
        u.coords(f, c);
        src += std::abs(S(c)) * w * vol;
      }
    }
    rec.energy = e / ((s.R - s.r) * (s.R - s.r));
    rec.source = src;
    rec.ratio = safe_ratio(rec.lhs, rec.energy + rec.source);
    rec.slack = std::max(boundary_fraction(u, inner), boundary_fraction(u, outer));
    rep.records.push_back(rec);
  }
  finish(rep);
  return rep;
}

// Random admissible samples: B_R inside [lo, hi], r in [r_min, r_max], R in
// (r, r + (r_max - r_min)], κ uniform in [k_lo, k_hi], both signs.
inline std::vector<EllipticEnergySample> random_elliptic_samples(const std::vector<double>& lo,
                                                                 const std::vector<double>& hi, int count,
                                                                 double r_min, double r_max, double k_lo,
                                                                 double k_hi, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<EllipticEnergySample> out;
  const std::size_t d = lo.size();
  double room = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < d; ++a) room = std::min(room, (hi[a] - lo[a]) / 2);
  if (!(r_max > r_min && r_min > 0)) throw DomainError("need 0 < r_min < r_max");
  for (int k = 0; k < count; ++k) {
    EllipticEnergySample s;
    s.r = uniform(rng, r_min, r_max);
    s.R = std::min(s.r + uniform(rng, 0.1, 1.0) * (r_max - r_min), room * 0.999);
    if (s.R <= s.r) s.R = s.r * 1.01;
    for (std::size_t a = 0; a < d; ++a) s.centre.push_back(uniform(rng, lo[a] + s.R, hi[a] - s.R));
    s.kappa = uniform(rng, k_lo, k_hi);
    s.sign = uniform(rng, 0, 1) < 0.5 ? Sign::plus : Sign::minus;
    out.push_back(s);
  }
  return out;
}

struct ParabolicEnergySample {
  std::vector<double> x0;
  double r = 0, R = 0;
  int i1 = 0, i2 = 1;  // time indices on the grid, i1 < i2
  double kappa = 0;
  Sign sign = Sign::plus;
};

// ∫_{B_r}(u-κ)±²(t_2) + λ∫∫_{B_r}|∇(u-κ)±|² against ∫_{B_r}(u-κ)±²(t_1)
// + 16Λ/(R-r)² ∫∫_{B_R}(u-κ)±² + ∫∫_{B_R} ±S (u-κ)±. Time integrals sum the
// slices i1 < i <= i2 (implicit Euler). The ratio is compared with 1.
inline EnergyReport caccioppoli_parabolic(const GridFunction& u, double lambda, double Lambda, const GridProfile& S,
                                          const std::vector<ParabolicEnergySample>& samples) {
  check_layout(u, Shape::parabolic);
  const int d = u.rank() - 1;
  EnergyReport rep;
  rep.bound = 1;
  const double dt = u.spacing(0);
  const double hv = u.cell_volume() / dt;  // spatial cell volume
  for (const auto& s : samples) {
    if (!(s.r > 0 && s.R > s.r) || !(0 <= s.i1 && s.i1 < s.i2 && s.i2 < u.counts[0])) {
      rep.skipped.push_back("bad radii or time indices");
      continue;
    }
    const double t1 = u.center(0, s.i1), t2 = u.center(0, s.i2);
    std::vector<double> ctr{t2};
    ctr.insert(ctr.end(), s.x0.begin(), s.x0.end());
    Region inner = ball_region(s.x0, s.r), outer = ball_region(s.x0, s.R);
    auto lift = [&](const Region& b, double ta, double tb) {
      Region R;
      R.lo = {ta};
      R.hi = {tb};
      R.lo.insert(R.lo.end(), b.lo.begin(), b.lo.end());
      R.hi.insert(R.hi.end(), b.hi.begin(), b.hi.end());
      auto in = b.contains;
      R.contains = [in](const double* c) { return in(c + 1); };
      return R;
    };
    const Region out_all = lift(outer, t1, t2);
    if (!region_inside_grid(u, out_all)) {
      rep.skipped.push_back("B_R leaves the grid");
      continue;
    }
    EnergyRecord rec;
    rec.params = s.x0;
    rec.params.insert(rec.params.end(), {s.r, s.R, t1, t2});
    rec.kappa = s.kappa;
    rec.sign = s.sign;
    const double sg = s.sign == Sign::plus ? 1.0 : -1.0;
    double grad = 0, e = 0, src = 0;
    double c[8];
    for_cells_in_box(u, out_all.lo, out_all.hi, [&](std::size_t f, const int* idx, const double* cc) {
      const int i = idx[0];
      const bool in_r = inner.contains(cc + 1), in_R = outer.contains(cc + 1);
      if (!in_R) return;
      const double w = truncated(u.values[f], s.kappa, s.sign);
      if (i == s.i2 && in_r) rec.lhs += w * w * hv;
      if (i == s.i1 && in_r) rec.initial += w * w * hv;
      if (i <= s.i1) return;
      e += w * w * hv * dt;
      if (S) {
        std::copy(cc, cc + d + 1, c);
        src += sg * S(c) * w * hv * dt;
      }
      if (in_r)
        for (int a = 1; a <= d; ++a) {
          std::size_t f0, f1;
          forward_difference(u, idx, a, &f0, &f1);
          const double g =
              (truncated(u.values[f1], s.kappa, s.sign) - truncated(u.values[f0], s.kappa, s.sign)) / u.spacing(a);
          grad += g * g * hv * dt;
        }
    });
    rec.lhs += lambda * grad;
    rec.energy = 16 * Lambda / ((s.R - s.r) * (s.R - s.r)) * e;
    rec.source = src;
    rec.ratio = safe_ratio(rec.lhs, rec.initial + rec.energy + rec.source);
    rec.slack = std::max(boundary_fraction(u, lift(inner, t1, t2)), boundary_fraction(u, out_all));
    rep.records.push_back(rec);
  }
  finish(rep);
  return rep;
}

struct KineticEnergySample {
  std::vector<double> x0, v0;
  double rx = 0, Rx = 0, rv = 0, Rv = 0;
  int i1 = 0, i2 = 1;
  double kappa = 0;
  Sign sign = Sign::plus;
};

// ∬(f-κ)±²(t_2) + (λ/4)∫_{Q_int}|∇_v(f-κ)±|² against ∬(f-κ)±²(t_1)
// + [8Λ/(R_v-r_v)² + 4R_v/(R_x-r_x) + Λ²/λ]∫_{Q_ext}(f-κ)±² + 2∫_{Q_ext} ±S (f-κ)±.
inline EnergyReport caccioppoli_kinetic(const GridFunction& f, double lambda, double Lambda, const GridProfile& S,
                                        const std::vector<KineticEnergySample>& samples) {
  check_layout(f, Shape::kinetic);
  const int d = (f.rank() - 1) / 2;
  EnergyReport rep;
  rep.bound = 1;
  const double dt = f.spacing(0);
  const double hv = f.cell_volume() / dt;
  for (const auto& s : samples) {
    if (!(s.rx > 0 && s.Rx > s.rx && s.rv > 0 && s.Rv > s.rv) ||
        !(0 <= s.i1 && s.i1 < s.i2 && s.i2 < f.counts[0])) {
      rep.skipped.push_back("bad radii or time indices");
      continue;
    }
    const double t1 = f.center(0, s.i1), t2 = f.center(0, s.i2);
    // Time window padded by half a cell so both end slices are included.
    const Region inner = product_region(t1 - dt / 2, t2 + dt / 4, s.x0, s.rx, s.v0, s.rv);
    const Region outer = product_region(t1 - dt / 2, t2 + dt / 4, s.x0, s.Rx, s.v0, s.Rv);
    Region check = outer;
    check.lo[0] = t1;
    check.hi[0] = t2;
    if (!region_inside_grid(f, check)) {
      rep.skipped.push_back("Q_ext leaves the grid");
      continue;
    }
    EnergyRecord rec;
    rec.params = s.x0;
    rec.params.insert(rec.params.end(), s.v0.begin(), s.v0.end());
    rec.params.insert(rec.params.end(), {s.rx, s.Rx, s.rv, s.Rv, t1, t2});
    rec.kappa = s.kappa;
    rec.sign = s.sign;
    const double sg = s.sign == Sign::plus ? 1.0 : -1.0;
    double grad = 0, e = 0, src = 0;
    for_cells_in_box(f, outer.lo, outer.hi, [&](std::size_t q, const int* idx, const double* cc) {
      if (!outer.contains(cc)) return;
      const int i = idx[0];
      const bool in_r = inner.contains(cc);
      const double w = truncated(f.values[q], s.kappa, s.sign);
      if (i == s.i2 && in_r) rec.lhs += w * w * hv;
      if (i == s.i1 && in_r) rec.initial += w * w * hv;
      if (i <= s.i1) return;
      e += w * w * hv * dt;
      if (S) src += sg * S(cc) * w * hv * dt;
      if (in_r)
        for (int a = 1 + d; a <= 2 * d; ++a) {
          std::size_t f0, f1;
          forward_difference(f, idx, a, &f0, &f1);
          const double g =
              (truncated(f.values[f1], s.kappa, s.sign) - truncated(f.values[f0], s.kappa, s.sign)) / f.spacing(a);
          grad += g * g * hv * dt;
        }
    });
    rec.lhs += lambda / 4 * grad;
    const double coef = 8 * Lambda / ((s.Rv - s.rv) * (s.Rv - s.rv)) + 4 * s.Rv / (s.Rx - s.rx) + Lambda * Lambda / lambda;
    rec.energy = coef * e;
    rec.source = 2 * src;
    rec.ratio = safe_ratio(rec.lhs, rec.initial + rec.energy + rec.source);
    rec.slack = std::max(boundary_fraction(f, inner), boundary_fraction(f, outer));
    rep.records.push_back(rec);
  }
  finish(rep);
  return rep;
}

// --------------------------------------------------------- iteration lemma

struct IterationResult {
  std::vector<double> sequence;  // A_0 .. A_last
  double threshold = 0;          // C^{-β/(β-1)²}
  std::vector<double> p, p_bound;  // p_k = Σ_{i<=k}(k-i)β^i and β^{k+1}/(β-1)², k = 0..k_max
  bool converged = false;        // A_k < 1e-12 for some k <= k_max
  int steps = 0;                 // first k with A_k < 1e-12, or k_max
  bool overflow = false;
};

inline IterationResult iterate_lemma(double A0, double C, double beta, int k_max) {
  if (!(C > 1) || !(beta > 1) || !(A0 >= 0) || k_max < 0) throw DomainError("need C > 1, beta > 1, A0 >= 0");
  IterationResult r;
  r.threshold = std::pow(C, -beta / ((beta - 1) * (beta - 1)));
  double pk = 0;
  for (int k = 0; k <= k_max; ++k) {
    if (k > 0) pk = pk * beta + k;  // p_k = p_{k-1} β + k
    r.p.push_back(pk);
    r.p_bound.push_back(std::pow(beta, k + 1) / ((beta - 1) * (beta - 1)));
  }
  double a = A0;
  r.sequence.push_back(a);
  r.steps = k_max;
  if (a < 1e-12) {
    r.converged = true;
    r.steps = 0;
    return r;
  }
  for (int k = 0; k < k_max; ++k) {
    // A_{k+1} = C^{k+1} A_k^β in log form.
    const double la = (k + 1) * std::log(C) + beta * std::log(a);
    if (la > std::log(std::numeric_limits<double>::max())) {
      r.overflow = true;
      r.steps = k + 1;
      return r;
    }
    a = std::exp(la);
    r.sequence.push_back(a);
    if (a < 1e-12) {
      r.converged = true;
      r.steps = k + 1;
      return r;
    }
  }
  return r;
}

// --------------------------------------------------------------- oscillation

struct ProfileOptions {
  double r0 = 0.25;   // largest radius; r_k = r0 2^{-k}
  int k_max = 8;
  int drop_largest = 2;
  int min_cells = 8;
  int min_points = 4;
  int fit_k_max = -1;  // cap on k used in the fit (-1: none)
  double zero_floor = 1e-9;  // oscillations below zero_floor · max|u| count as zero (solver roundoff)
};

struct OscillationProfile {
  std::vector<double> centre;
  Shape shape = Shape::ball;
  std::vector<double> radii, osc;
  std::vector<long> cells;
  std::vector<bool> used;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double constant = 0;
  double residual = 0;  // max |log osc - fit| over used radii
  bool available = false;
  bool monotone = true;
  std::vector<std::string> log;

  int last_used() const {
    int k = -1;
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) k = static_cast<int>(i);
    return k;
  }
  double largest_used_radius() const {
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) return radii[i];
    return 0;
  }
};

inline OscillationProfile oscillation_profile(const GridFunction& u, const std::vector<double>& centre, Shape shape,
                                              const ProfileOptions& opt = {}) {
  check_layout(u, shape);
  if (static_cast<int>(centre.size()) != u.rank()) throw DimensionError("centre must have one entry per grid axis");
  OscillationProfile P;
  P.centre = centre;
  P.shape = shape;
  for (int k = 0; k <= opt.k_max; ++k) {
    const double r = opt.r0 * std::pow(0.5, k);
    const Region Q = shape_region(shape, centre, r);
    if (!region_inside_grid(u, Q)) throw DomainError("oscillation cylinder of radius " + std::to_string(r) + " leaves the grid");
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    long n = 0;
    for_cells_in_box(u, Q.lo, Q.hi, [&](std::size_t f, const int*, const double* c) {
      if (!Q.contains(c)) return;
      mx = std::max(mx, u.values[f]);
      mn = std::min(mn, u.values[f]);
      ++n;
    });
    P.radii.push_back(r);
    P.osc.push_back(n > 0 ? mx - mn : 0.0);
    P.cells.push_back(n);
    bool use = k >= opt.drop_largest && (opt.fit_k_max < 0 || k <= opt.fit_k_max);
    if (n < opt.min_cells) {
      if (use) P.log.push_back("radius " + std::to_string(r) + " dropped: " + std::to_string(n) + " cells");
      use = false;
    }
    P.used.push_back(use);
  }
  for (std::size_t k = 1; k < P.osc.size(); ++k)
    if (P.osc[k] > P.osc[k - 1]) P.monotone = false;
  double scale = 0;
  for (double w : u.values) scale = std::max(scale, std::abs(w));
  const double floor = opt.zero_floor * scale;
  std::vector<double> lr, lo;
  bool all_zero = true;
  for (std::size_t k = 0; k < P.radii.size(); ++k) {
    if (!P.used[k]) continue;
    if (P.osc[k] > floor) {
      all_zero = false;
      lr.push_back(std::log(P.radii[k]));
      lo.push_back(std::log(P.osc[k]));
    }
  }
  const bool any_used = std::find(P.used.begin(), P.used.end(), true) != P.used.end();
  if (any_used && all_zero) {
    P.log.push_back("zero oscillation");
    P.alpha = std::numeric_limits<double>::infinity();
    P.constant = 0;
    return P;
  }
  if (static_cast<int>(lr.size()) < opt.min_points) {
    P.log.push_back("fewer than " + std::to_string(opt.min_points) + " usable radii");
    return P;
  }
  const double n = static_cast<double>(lr.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    mx += lr[i] / n;
    my += lo[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    sxy += (lr[i] - mx) * (lo[i] - my);
    sxx += (lr[i] - mx) * (lr[i] - mx);
  }
  P.alpha = sxy / sxx;
  const double b = my - P.alpha * mx;
  P.constant = std::exp(b);
  for (std::size_t i = 0; i < lr.size(); ++i) P.residual = std::max(P.residual, std::abs(lo[i] - b - P.alpha * lr[i]));
  P.available = true;
  return P;
}

struct HolderFailure {
  std::vector<double> z1, z2;
  double difference = 0, bound = 0;
};

struct HolderReport {
  long pairs = 0;
  double C0 = 0, alpha = 0;
  double worst_ratio = 0;  // max |Δu| / (C0 d^α)
  std::vector<HolderFailure> failures;
  bool pass() const { return failures.empty(); }
};

inline double shape_distance(Shape s, const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t k = a.size();
  if (s == Shape::ball) {
    double q = 0;
    for (std::size_t i = 0; i < k; ++i) q += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(q);
  }
  if (s == Shape::parabolic) {
    double q = 0;
    for (std::size_t i = 1; i < k; ++i) q += (a[i] - b[i]) * (a[i] - b[i]);
    return std::max(std::sqrt(std::abs(a[0] - b[0])), std::sqrt(q));
  }
  const int d = static_cast<int>(k - 1) / 2;
  return kinetic_distance(phase_of(a.data(), d), phase_of(b.data(), d), 1e-9);
}

// Pairs sampled in the largest fitted cylinder; |u(z1) - u(z2)| <= C0 d^α with
// C0 = constant · e^{residual} · inflation. Values by multilinear interpolation.
inline HolderReport holder_consistency(const GridFunction& u, const OscillationProfile& P, long pairs,
                                       std::uint64_t seed, double inflation = 4) {
  HolderReport rep;
  const double r = P.largest_used_radius();
  if (!(r > 0) || std::isnan(P.alpha)) throw DomainError("profile has no fitted alpha");
  const Region Q = shape_region(P.shape, P.centre, r);
  rep.alpha = std::isinf(P.alpha) ? 1.0 : P.alpha;
  rep.C0 = std::isinf(P.alpha) ? 0.0 : P.constant * std::exp(P.residual) * inflation;
  Rng rng = make_rng(seed);
  const int k = u.rank();
  double scale = 0;
  for (double w : u.values) scale = std::max(scale, std::abs(w));
  auto draw = [&] {
    std::vector<double> z(k);
    for (int tries = 0; tries < 100000; ++tries) {
      for (int a = 0; a < k; ++a) z[a] = uniform(rng, Q.lo[a], Q.hi[a]);
      if (Q.contains(z.data())) return z;
    }
    throw DomainError("could not sample the fitted cylinder");
  };
  for (long n = 0; n < pairs; ++n) {
    const auto z1 = draw(), z2 = draw();
    const double diff = std::abs(u.interpolate(z1.data()) - u.interpolate(z2.data()));
    const double dist = shape_distance(P.shape, z1, z2);
    const double bound = rep.C0 * std::pow(dist, rep.alpha) + 1e-12 * scale;
    ++rep.pairs;
    rep.worst_ratio = std::max(rep.worst_ratio, safe_ratio(diff, bound));
    if (diff > bound) rep.failures.push_back({z1, z2, diff, bound});
  }
  return rep;
}

// ------------------------------------------------------------------ Harnack

struct HarnackGeometry {
  double omega = 0.25;
  double scale = 1;   // ρ: cylinders are mapped by σ_ρ
  double top = 0;     // time of the top of Q_future
  double R0 = 2;      // Q_harn = (top - ρ², top] × B_{ρ³R0} × B_{ρR0}
  double past = 0.5;  // sup taken over Q_{past·ω}(-1+ω², 0, 0)
  int sub = 7;        // interpolation sample points per axis
};

struct HarnackReport {
  double sup_past = 0, inf_future = 0, source_norm = 0, quotient = 0;
  double p = 0, weak_norm = 0;  // ‖f‖_{L^p(Q_past)} when p > 0
  long past_points = 0, future_points = 0;
};

namespace detail {

// Extremes over the cell centres inside Q plus a sub^k lattice of interpolated
// points inside Q (small cylinders may contain few or no centres).
inline std::pair<double, double> region_extremes(const GridFunction& g, const Region& Q, int sub, long& count) {
  double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
  count = 0;
  for_cells_in_box(g, Q.lo, Q.hi, [&](std::size_t f, const int*, const double* c) {
    if (!Q.contains(c)) return;
    mx = std::max(mx, g.values[f]);
    mn = std::min(mn, g.values[f]);
    ++count;
  });
  const int k = g.rank();
  std::vector<int> idx(k, 0);
  std::vector<double> z(k);
  while (true) {
    for (int a = 0; a < k; ++a) {
      // Interior lattice; the closed top in time is included.
      const double s = a == 0 ? (idx[a] + 1.0) / sub : (idx[a] + 0.5) / sub;
      z[a] = Q.lo[a] + s * (Q.hi[a] - Q.lo[a]);
    }
    if (Q.contains(z.data())) {
      const double w = g.interpolate(z.data());
      mx = std::max(mx, w);
      mn = std::min(mn, w);
      ++count;
    }
    int a = k - 1;
    while (a >= 0 && ++idx[a] >= sub) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return {mn, mx};
}

}  // namespace detail

// sup over Q_{past·ω}(-1+ω², 0, 0), inf over Q_future = Q_ω, both mapped
// by σ_ρ and shifted to `top`; quotient = sup / (inf + ‖S‖).
inline HarnackReport harnack_quotient(const GridFunction& f, Shape shape, const HarnackGeometry& G, double source_norm,
                                      double p = 0) {
  if (shape == Shape::ball) throw DomainError("Harnack quotient needs a time-dependent grid");
  check_layout(f, shape);
  const int d = space_dim(f, shape);
  const double rho = G.scale, w = G.omega;
  auto cyl = [&](double t_top, double r) {
    std::vector<double> c(f.rank(), 0.0);
    c[0] = t_top;
    return shape_region(shape, c, r);
  };
  const Region future = cyl(G.top, rho * w);
  const Region past_star = cyl(G.top - rho * rho * (1 - w * w), rho * w * G.past);
  const Region past = cyl(G.top - rho * rho * (1 - w * w), rho * w);
  for (const Region* Q : {&future, &past_star})
    if (!region_inside_grid(f, *Q)) throw DomainError("Harnack cylinders leave the grid");
  // Positivity over Q_harn ∩ grid.
  std::vector<double> hlo{G.top - rho * rho}, hhi{G.top};
  const double rx = shape == Shape::kinetic ? rho * rho * rho * G.R0 : rho * G.R0;
  for (int i = 0; i < d; ++i) {
    hlo.push_back(-rx);
    hhi.push_back(rx);
  }
  if (shape == Shape::kinetic)
    for (int i = 0; i < d; ++i) {
      hlo.push_back(-rho * G.R0);
      hhi.push_back(rho * G.R0);
    }
  double mn = std::numeric_limits<double>::infinity();
  for_cells_in_box(f, hlo, hhi, [&](std::size_t q, const int*, const double*) { mn = std::min(mn, f.values[q]); });
  if (!(mn > 0)) throw DomainError("Harnack quotient needs a positive solution (min " + std::to_string(mn) + ")");
  HarnackReport rep;
  rep.source_norm = source_norm;
  rep.sup_past = detail::region_extremes(f, past_star, G.sub, rep.past_points).second;
  rep.inf_future = detail::region_extremes(f, future, G.sub, rep.future_points).first;
  rep.quotient = rep.sup_past / (rep.inf_future + source_norm);
  if (p > 0) {
    rep.p = p;
    const auto vals = region_values(f, past);
    double s = 0;
    for (double w : vals) s += std::pow(w, p);
    rep.weak_norm = vals.empty() ? 0.0 : std::pow(s / vals.size() * past.volume, 1 / p);
  }
  return rep;
}

// ---------------------------------------------------- expansion of positivity

struct ExpansionInstance {
  double positive_fraction = 0;  // |{f >= 1} ∩ Q_pos| / |Q_pos|, by cells
  double source_norm = 0;
  double min_value = 0;          // min f over the grid window (-1-η², 0]
  double min_Q1 = 0;
  bool included = false;
  std::string reason;
};

struct ExpansionReport {
  std::vector<ExpansionInstance> instances;
  double ell_hat = std::numeric_limits<double>::quiet_NaN();
  int included = 0;
};

// Q_pos = Q_η(-1, 0, 0), Q_1 = Q_1(0, 0, 0) on a kinetic grid.
inline ExpansionInstance expansion_measure(const GridFunction& f, double eta0, double source_norm, double eps) {
  check_layout(f, Shape::kinetic);
  const int d = space_dim(f, Shape::kinetic);
  if (!(eta0 > 0 && eta0 < 1)) throw DomainError("eta0 must lie in (0, 1)");
  PhasePoint zpos = PhasePoint::origin(d);
  zpos.t = -1;
  const Region pos = kinetic_region({zpos, eta0}), one = kinetic_region({PhasePoint::origin(d), 1.0});
  ExpansionInstance inst;
  inst.source_norm = source_norm;
  if (!region_inside_grid(f, pos) || !region_inside_grid(f, one)) {
    inst.reason = "Q_pos or Q_1 leaves the grid";
    return inst;
  }
  const auto pv = region_values(f, pos);
  const long hit = std::count_if(pv.begin(), pv.end(), [](double w) { return w >= 1; });
  inst.positive_fraction = pv.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pv.size());
  inst.min_Q1 = std::numeric_limits<double>::infinity();
  for (double w : region_values(f, one)) inst.min_Q1 = std::min(inst.min_Q1, w);
  std::vector<double> lo = f.lower, hi = f.upper;
  lo[0] = -1 - eta0 * eta0;
  hi[0] = 0;
  inst.min_value = std::numeric_limits<double>::infinity();
  for_cells_in_box(f, lo, hi, [&](std::size_t q, const int*, const double*) {
    inst.min_value = std::min(inst.min_value, f.values[q]);
  });
  if (inst.min_value < 0)
    inst.reason = "f takes negative values";
  else if (inst.positive_fraction < 0.5)
    inst.reason = "measure hypothesis fails (fraction " + std::to_string(inst.positive_fraction) + ")";
  else if (source_norm > eps)
    inst.reason = "source too large";
  else
    inst.included = true;
  return inst;
}

inline ExpansionReport expansion_experiment(const std::vector<GridFunction>& fs, const std::vector<double>& source_norms,
                                            double eta0, double eps) {
  if (fs.size() != source_norms.size()) throw DimensionError("one source norm per instance");
  ExpansionReport rep;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    rep.instances.push_back(expansion_measure(fs[i], eta0, source_norms[i], eps));
    const auto& in = rep.instances.back();
    if (!in.included) continue;
    ++rep.included;
    rep.ell_hat = std::isnan(rep.ell_hat) ? in.min_Q1 : std::min(rep.ell_hat, in.min_Q1);
  }
  return rep;
}

// ---------------------------------------------------- intermediate values

struct IVGeometry {
  double eta2 = 0.5;
  double R = 1;
  double theta = 0.25;
};

struct IntermediateValueRecord {
  double measure_minus = 0, measure_plus = 0, measure_ext = 0;  // |Q_-|, |Q_+|, |Q_ext ∩ grid|
  double high_minus = 0;  // |{f >= 1} ∩ Q_-|
  double low_plus = 0;    // |{f <= θ} ∩ Q_+|
  double mid_ext = 0;     // |{θ < f < 1} ∩ Q_ext|
  double grad_v_l2 = 0;   // ‖∇_v f‖_{L²(Q_ext)}
  bool clipped = false;   // Q_ext was cut to the grid
};

// Q_- = Q_η(-1-η², 0, 0), Q_+ = Q_1, Q_ext = (-1-2η², 0] × B_{8R} × B_{2R}.
inline IntermediateValueRecord intermediate_value_stats(const GridFunction& f, const IVGeometry& G) {
  check_layout(f, Shape::kinetic);
  const int d = space_dim(f, Shape::kinetic);
  PhasePoint zm = PhasePoint::origin(d);
  zm.t = -1 - G.eta2 * G.eta2;
  const Region minus = kinetic_region({zm, G.eta2}), plus = kinetic_region({PhasePoint::origin(d), 1.0});
  const std::vector<double> zero(d, 0.0);
  const Region ext = product_region(-1 - 2 * G.eta2 * G.eta2, 0, zero, 8 * G.R, zero, 2 * G.R);
  if (!region_inside_grid(f, minus) || !region_inside_grid(f, plus)) throw DomainError("Q_- or Q_+ leaves the grid");
  IntermediateValueRecord rec;
  rec.clipped = !region_inside_grid(f, ext);
  const double vol = f.cell_volume();
  auto fraction = [](const std::vector<double>& vals, auto pred) {
    if (vals.empty()) return 0.0;
    return static_cast<double>(std::count_if(vals.begin(), vals.end(), pred)) / static_cast<double>(vals.size());
  };
  rec.measure_minus = minus.volume;
  rec.high_minus = minus.volume * fraction(region_values(f, minus), [](double w) { return w >= 1; });
  rec.measure_plus = plus.volume;
  rec.low_plus = plus.volume * fraction(region_values(f, plus), [&](double w) { return w <= G.theta; });
  double g2 = 0;
  for_cells_in_box(f, ext.lo, ext.hi, [&](std::size_t q, const int* idx, const double* c) {
    if (!ext.contains(c)) return;
    rec.measure_ext += vol;
    if (f.values[q] > G.theta && f.values[q] < 1) rec.mid_ext += vol;
    for (int a = 1 + d; a <= 2 * d; ++a) {
      const double g = forward_difference(f, idx, a);
      g2 += g * g * vol;
    }
  });
  rec.grad_v_l2 = std::sqrt(g2);
  return rec;
}

// Central difference, one-sided at the grid edges.
inline double centred_difference(const GridFunction& g, const int* idx, int a) {
  int p[8], q[8];
  std::copy(idx, idx + g.rank(), p);
  std::copy(idx, idx + g.rank(), q);
  const int n = g.counts[a];
  double span = 2;
  if (idx[a] == 0 || idx[a] == n - 1) span = 1;
  p[a] = std::min(idx[a] + 1, n - 1);
  q[a] = std::max(idx[a] - 1, 0);
  return (g.values[g.index(p)] - g.values[g.index(q)]) / (span * g.spacing(a));
}

struct PoincareEstimate {
  double q = 1;
  double constant = 0;          // max ratio over the family (a lower bound for C_PW)
  std::vector<double> ratios;   // per used member
  int skipped = 0;
};

// ∫_{B_1}|u - mean|^q / ∫_{B_1}|∇u|^q over all-x grids containing B_1(0).
inline PoincareEstimate poincare_wirtinger_estimate(const std::vector<GridFunction>& family, double q) {
  if (!(q >= 1 && q <= 2)) throw DomainError("q must lie in [1, 2]");
  PoincareEstimate est;
  est.q = q;
  for (const auto& u : family) {
    check_layout(u, Shape::ball);
    const int d = u.rank();
    const Region B = ball_region(std::vector<double>(d, 0.0), 1.0);
    if (!region_inside_grid(u, B)) throw DomainError("grid must contain the unit ball");
    const auto cells = region_cells(u, B);
    double mean = 0;
    for (std::size_t f : cells) mean += u.values[f];
    mean /= static_cast<double>(cells.size());
    double num = 0, den = 0;
    int idx[8];
    for (std::size_t f : cells) {
      num += std::pow(std::abs(u.values[f] - mean), q);
      u.unravel(f, idx);
      double g2 = 0;
      for (int a = 0; a < d; ++a) {
        const double g = centred_difference(u, idx, a);
        g2 += g * g;
      }
      den += std::pow(g2, q / 2);
    }
    if (den <= 1e-300) {
      ++est.skipped;
      continue;
    }
    est.ratios.push_back(num / den);
    est.constant = std::max(est.constant, num / den);
  }
  return est;
}

struct EllipticIVL {
  double low = 0, high = 0, mid = 0;  // |{u<=½}|, |{u>=1}|, |{½<u<1}| in B_1
  double grad_l2 = 0;
  double measured_constant = 0;       // low·high / (‖∇u‖ |mid|^{1/2})
  double c_pw = 0, c_ivl = 0;         // C_IVL = 2 C_PW |B_1|
  bool holds = false;
};

inline EllipticIVL elliptic_intermediate_value(const GridFunction& u, double c_pw) {
  check_layout(u, Shape::ball);
  const int d = u.rank();
  const Region B = ball_region(std::vector<double>(d, 0.0), 1.0);
  if (!region_inside_grid(u, B)) throw DomainError("grid must contain the unit ball");
  EllipticIVL r;
  const double vol = u.cell_volume();
  double g2 = 0;
  int idx[8];
  for (std::size_t f : region_cells(u, B)) {
    const double w = u.values[f];
    if (w <= 0.5) r.low += vol;
    if (w >= 1) r.high += vol;
    if (w > 0.5 && w < 1) r.mid += vol;
    u.unravel(f, idx);
    for (int a = 0; a < d; ++a) {
      const double g = centred_difference(u, idx, a);
      g2 += g * g * vol;
    }
  }
  r.grad_l2 = std::sqrt(g2);
  r.c_pw = c_pw;
  r.c_ivl = 2 * c_pw * unit_ball_volume(d);
  const double lhs = r.low * r.high, rhs_unit = r.grad_l2 * std::sqrt(r.mid);
  r.measured_constant = safe_ratio(lhs, rhs_unit);
  r.holds = lhs <= r.c_ivl * rhs_unit;
  return r;
}

// ----------------------------------------------------------- DG membership

struct MembershipSample {
  std::vector<double> centre;  // top of the cylinder, grid order
  double r = 0, R = 0, kappa = 0;
};

struct MembershipReport {
  double p_c = 0;
  std::vector<double> gain;    // per sample: ‖(f-κ)₊‖²_{p_c}(Q_r) / right side
  std::vector<double> energy;  // parabolic only: energy inequality ratio
  double certified_gain = 0, certified_energy = 0;
  std::vector<std::string> skipped;
};

namespace detail {

struct CylinderSums {
  double lp = 0;         // ∫_{Q_r} w^p
  double l2_outer = 0;   // ∫_{Q_R} w²
  double s2_outer = 0;   // ∫_{Q_R} S² 1{f >= κ}
  double s1_outer = 0;   // ∫_{Q_R} |S| w
  double grad_inner = 0; // ∫_{Q_r} |∇_space w|² (parabolic)
  double sup_slice = 0;  // max over time slices of ∫_{B_r} w²
};

inline CylinderSums cylinder_sums(const GridFunction& g, Shape shape, const MembershipSample& s, double p,
                                  const GridProfile& S) {
  const Region in = shape_region(shape, s.centre, s.r), out = shape_region(shape, s.centre, s.R);
  const int d = space_dim(g, shape);
  CylinderSums cs;
  const double vol = g.cell_volume(), dt = g.spacing(0);
  std::vector<double> slice(static_cast<std::size_t>(g.counts[0]), 0.0);
  for_cells_in_box(g, out.lo, out.hi, [&](std::size_t q, const int* idx, const double* c) {
    if (!out.contains(c)) return;
    const double w = truncated(g.values[q], s.kappa, Sign::plus);
    cs.l2_outer += w * w * vol;
    if (S) {
      const double sv = S(c);
      if (g.values[q] >= s.kappa) cs.s2_outer += sv * sv * vol;
      cs.s1_outer += std::abs(sv) * w * vol;
    }
    if (!in.contains(c)) return;
    cs.lp += std::pow(w, p) * vol;
    slice[idx[0]] += w * w * vol / dt;
    if (shape == Shape::parabolic)
      for (int a = 1; a <= d; ++a) {
        std::size_t f0, f1;
        forward_difference(g, idx, a, &f0, &f1);
        const double gr = (truncated(g.values[f1], s.kappa, Sign::plus) - truncated(g.values[f0], s.kappa, Sign::plus)) /
                          g.spacing(a);
        cs.grad_inner += gr * gr * vol;
      }
  });
  for (double v : slice) cs.sup_slice = std::max(cs.sup_slice, v);
  return cs;
}

}  // namespace detail

inline double kinetic_pc(int d) { return 2 + 1.0 / (2 * d); }
inline double parabolic_pc(int d) { return 2 + 4.0 / d; }

// ‖(f-κ)₊‖²_{L^{p_c}(Q_r)} against (R-r)^{-4}∫_{Q_R}(f-κ)₊² + (R-r)^{-2}∫_{Q_R}|S|²1{f>=κ};
// the certified constant is the largest ratio.
inline MembershipReport kinetic_dg_membership(const GridFunction& f, const GridProfile& S,
                                              const std::vector<MembershipSample>& samples, double p_c = 0) {
  check_layout(f, Shape::kinetic);
  const int d = space_dim(f, Shape::kinetic);
  MembershipReport rep;
  rep.p_c = p_c > 0 ? p_c : kinetic_pc(d);
  for (const auto& s : samples) {
    if (!(s.r > 0 && s.R > s.r && s.R < 1)) {
      rep.skipped.push_back("need 0 < r < R < 1");
      continue;
    }
    if (!region_inside_grid(f, shape_region(Shape::kinetic, s.centre, s.R))) {
      rep.skipped.push_back("Q_R leaves the grid");
      continue;
    }
    const auto cs = detail::cylinder_sums(f, Shape::kinetic, s, rep.p_c, S);
    const double lhs = std::pow(cs.lp, 2 / rep.p_c);
    const double gap = s.R - s.r;
    const double rhs = cs.l2_outer / std::pow(gap, 4) + cs.s2_outer / (gap * gap);
    rep.gain.push_back(safe_ratio(lhs, rhs));
    rep.certified_gain = std::max(rep.certified_gain, rep.gain.back());
  }
  return rep;
}

// Energy class: sup_t ∫_{B_r}(u-κ)₊² + ∫_{Q_r}|∇(u-κ)₊|² against
// ((R-r)^{-2} + r^{-2})∫_{Q_R}(u-κ)₊² + ∫_{Q_R}|S|(u-κ)₊; gain of integrability
// ‖(u-κ)₊‖²_{L^{p_c}(Q_r)} against the same right side.
inline MembershipReport parabolic_dg_membership(const GridFunction& u, const GridProfile& S,
                                                const std::vector<MembershipSample>& samples, double p_c = 0) {
  check_layout(u, Shape::parabolic);
  const int d = space_dim(u, Shape::parabolic);
  MembershipReport rep;
  rep.p_c = p_c > 0 ? p_c : parabolic_pc(d);
  for (const auto& s : samples) {
    if (!(s.r > 0 && s.R > s.r)) {
      rep.skipped.push_back("need 0 < r < R");
      continue;
    }
    if (!region_inside_grid(u, shape_region(Shape::parabolic, s.centre, s.R))) {
      rep.skipped.push_back("Q_R leaves the grid");
      continue;
    }
    const auto cs = detail::cylinder_sums(u, Shape::parabolic, s, rep.p_c, S);
    const double gap = s.R - s.r;
    const double rhs = (1 / (gap * gap) + 1 / (s.r * s.r)) * cs.l2_outer + cs.s1_outer;
    rep.energy.push_back(safe_ratio(cs.sup_slice + cs.grad_inner, rhs));
    rep.gain.push_back(safe_ratio(std::pow(cs.lp, 2 / rep.p_c), rhs));
    rep.certified_energy = std::max(rep.certified_energy, rep.energy.back());
    rep.certified_gain = std::max(rep.certified_gain, rep.gain.back());
  }
  return rep;
}

struct GradientSample {
  double T = 0, tau_minus = 0, tau_plus = 0;
  std::vector<double> x0, v0;
  double rx = 0, Rx = 0, rv = 0, Rv = 0, kappa = 0;
};

// ‖∇_v(f-κ)₋‖_{L²(Q_int)} against e^{-1}‖(f-κ)₋‖_{L²(Q_ext)} + ‖S 1{f<=κ}‖_{L²(Q_ext)}
// with e = min((τ₊-τ₋)^{1/2}, R_v^{-1/2}(R_x-r_x)^{1/2}, R_v-r_v).
inline MembershipReport kinetic_gradient_estimate(const GridFunction& f, const GridProfile& S,
                                                  const std::vector<GradientSample>& samples) {
  check_layout(f, Shape::kinetic);
  const int d = space_dim(f, Shape::kinetic);
  MembershipReport rep;
  for (const auto& s : samples) {
    if (!(s.tau_plus > s.tau_minus && s.tau_minus > 0 && s.Rx > s.rx && s.Rv > s.rv && s.rx > 0 && s.rv > 0)) {
      rep.skipped.push_back("need nested cylinders");
      continue;
    }
    const Region in = product_region(s.T - s.tau_minus, s.T, s.x0, s.rx, s.v0, s.rv);
    const Region out = product_region(s.T - s.tau_plus, s.T, s.x0, s.Rx, s.v0, s.Rv);
    if (!region_inside_grid(f, out)) {
      rep.skipped.push_back("Q_ext leaves the grid");
      continue;
    }
    const double vol = f.cell_volume();
    double g2 = 0, w2 = 0, s2 = 0;
    for_cells_in_box(f, out.lo, out.hi, [&](std::size_t q, const int* idx, const double* c) {
      if (!out.contains(c)) return;
      const double w = truncated(f.values[q], s.kappa, Sign::minus);
      w2 += w * w * vol;
      if (S && f.values[q] <= s.kappa) {
        const double sv = S(c);
        s2 += sv * sv * vol;
      }
      if (!in.contains(c)) return;
      for (int a = 1 + d; a <= 2 * d; ++a) {
        std::size_t f0, f1;
        forward_difference(f, idx, a, &f0, &f1);
        const double g =
            (truncated(f.values[f1], s.kappa, Sign::minus) - truncated(f.values[f0], s.kappa, Sign::minus)) / f.spacing(a);
        g2 += g * g * vol;
      }
    });
    const double e =
        std::min({std::sqrt(s.tau_plus - s.tau_minus), std::sqrt((s.Rx - s.rx) / s.Rv), s.Rv - s.rv});
    rep.gain.push_back(safe_ratio(std::sqrt(g2), std::sqrt(w2) / e + std::sqrt(s2)));
    rep.certified_gain = std::max(rep.certified_gain, rep.gain.back());
  }
  return rep;
}

}  // namespace kinlab
