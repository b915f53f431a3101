#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace kinlab {

// max(|Δt|^{1/2}, |v1-w|, |v2-w|, 2^{-1/3}|Δx - Δt w|^{1/3})
inline double distance_objective(const PhasePoint& z1, const PhasePoint& z2, const Vec& w) {
  const int d = z1.d;
  const double dt = z1.t - z2.t;
  Vec s{};
  for (int i = 0; i < d; ++i) s[i] = (z1.x[i] - z2.x[i]) - dt * w[i];
  return std::max({std::sqrt(std::abs(dt)), norm(sub(z1.v, w), d), norm(sub(z2.v, w), d),
                   std::cbrt(norm(s, d) / 2)});
}

namespace detail {

// Do three closed balls in R^d (d <= 3) share a point? Any common point projects
// onto the affine hull of the centres, so the test runs on disks in a plane
// through them: a nonempty intersection has a leftmost point, which is either
// the leftmost point of one disk or a crossing of two circles.
inline bool balls_intersect(const std::array<Vec, 3>& c, const std::array<double, 3>& r, int d) {
  for (double ri : r)
    if (ri < 0) return false;
  Vec e1{}, e2{};
  auto orth = [&](Vec a, const Vec& against, bool has) {
    if (has) {
      const double p = dot(a, against, d);
      for (int i = 0; i < d; ++i) a[i] -= p * against[i];
    }
    return a;
  };
  const Vec a = sub(c[1], c[0]), b = sub(c[2], c[0]);
  const double scale = std::max({norm(a, d), norm(b, d), 1e-300});
  bool has1 = false, has2 = false;
  for (const Vec& cand : {a, b}) {
    if (!has1) {
      if (norm(cand, d) > 1e-14 * scale) {
        const double n = norm(cand, d);
        for (int i = 0; i < d; ++i) e1[i] = cand[i] / n;
        has1 = true;
      }
    } else if (!has2) {
      Vec o = orth(cand, e1, true);
      const double n = norm(o, d);
      if (n > 1e-12 * scale) {
        for (int i = 0; i < d; ++i) e2[i] = o[i] / n;
        has2 = true;
      }
    }
  }
  std::array<std::array<double, 2>, 3> p{};
  for (int k = 0; k < 3; ++k) {
    const Vec rel = sub(c[k], c[0]);
    p[k] = {has1 ? dot(rel, e1, d) : 0.0, has2 ? dot(rel, e2, d) : 0.0};
  }
  auto inside_all = [&](double px, double py) {
    for (int k = 0; k < 3; ++k) {
      const double dist = std::hypot(px - p[k][0], py - p[k][1]);
      if (dist > r[k] * (1 + 1e-12) + 1e-15 * (1 + scale)) return false;
    }
    return true;
  };
  for (int k = 0; k < 3; ++k)
    if (inside_all(p[k][0] - r[k], p[k][1])) return true;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double dx = p[j][0] - p[i][0], dy = p[j][1] - p[i][1];
      const double D = std::hypot(dx, dy);
      if (D == 0 || D > r[i] + r[j] || D < std::abs(r[i] - r[j])) continue;
      const double along = (r[i] * r[i] - r[j] * r[j] + D * D) / (2 * D);
      const double h = std::sqrt(std::max(0.0, r[i] * r[i] - along * along));
      const double mx = p[i][0] + along * dx / D, my = p[i][1] + along * dy / D;
      if (inside_all(mx + h * dy / D, my - h * dx / D)) return true;
      if (inside_all(mx - h * dy / D, my + h * dx / D)) return true;
    }
  }
  return false;
}

// Is the sublevel set {w : objective(w) <= rho} nonempty?
inline bool distance_level_feasible(const PhasePoint& z1, const PhasePoint& z2, double rho) {
  const int d = z1.d;
  const double dt = z1.t - z2.t;
  if (std::sqrt(std::abs(dt)) > rho) return false;
  Vec dx{};
  for (int i = 0; i < d; ++i) dx[i] = z1.x[i] - z2.x[i];
  if (dt == 0) {
    if (std::cbrt(norm(dx, d) / 2) > rho) return false;
    return norm(sub(z1.v, z2.v), d) <= 2 * rho * (1 + 1e-12);
  }
  Vec c3{};
  for (int i = 0; i < d; ++i) c3[i] = dx[i] / dt;
  return balls_intersect({z1.v, z2.v, c3}, {rho, rho, 2 * rho * rho * rho / std::abs(dt)}, d);
}

inline std::vector<double> nelder_mead(const PhasePoint& z1, const PhasePoint& z2, Vec start,
                                       double step, int max_iter, double ftol) {
  const int d = z1.d;
  const int n = d + 1;
  std::vector<Vec> simplex(n, start);
  for (int i = 0; i < d; ++i) simplex[i + 1][i] += step;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = distance_objective(z1, z2, simplex[i]);
  auto order = [&] {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
    std::vector<Vec> s2;
    std::vector<double> f2;
    for (int i : idx) {
      s2.push_back(simplex[i]);
      f2.push_back(f[i]);
    }
    simplex = s2;
    f = f2;
  };
  for (int it = 0; it < max_iter; ++it) {
    order();
    if (f[n - 1] - f[0] <= ftol) {
      double size = 0;
      for (int i = 1; i < n; ++i) size = std::max(size, norm(sub(simplex[i], simplex[0]), d));
      if (size <= ftol) break;
    }
    Vec centroid{};
    for (int i = 0; i < n - 1; ++i)
      for (int k = 0; k < d; ++k) centroid[k] += simplex[i][k] / (n - 1);
    auto along = [&](double coef) {
      Vec p{};
      for (int k = 0; k < d; ++k) p[k] = centroid[k] + coef * (simplex[n - 1][k] - centroid[k]);
      return p;
    };
    const Vec xr = along(-1.0);
    const double fr = distance_objective(z1, z2, xr);
    if (fr < f[0]) {
      const Vec xe = along(-2.0);
      const double fe = distance_objective(z1, z2, xe);
      if (fe < fr) {
        simplex[n - 1] = xe;
        f[n - 1] = fe;
      } else {
        simplex[n - 1] = xr;
        f[n - 1] = fr;
      }
    } else if (fr < f[n - 2]) {
      simplex[n - 1] = xr;
      f[n - 1] = fr;
    } else {
      const Vec xc = fr < f[n - 1] ? along(-0.5) : along(0.5);
      const double fc = distance_objective(z1, z2, xc);
      if (fc < std::min(fr, f[n - 1])) {
        simplex[n - 1] = xc;
        f[n - 1] = fc;
      } else {
        for (int i = 1; i < n; ++i) {
          for (int k = 0; k < d; ++k)
            simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
          f[i] = distance_objective(z1, z2, simplex[i]);
        }
      }
    }
  }
  order();
  std::vector<double> out{f[0]};
  for (int k = 0; k < d; ++k) out.push_back(simplex[0][k]);
  return out;
}

}  // namespace detail

struct DistanceOptions {
  int simplex_iterations = 400;
  int bisection_iterations = 200;
};

// Kinetic distance to absolute accuracy tol. The bracket starts from the two-sided
// bound ½|z2^{-1}∘z1|_∞ <= d <= |z2^{-1}∘z1|_∞, is tightened from above by a
// multi-start simplex descent and closed by bisection on the convex sublevel sets.
// The returned value is the upper end of the final bracket.
inline double kinetic_distance(const PhasePoint& z1, const PhasePoint& z2, double tol,
                               const DistanceOptions& opt = {}) {
  same_dim(z1, z2);
  if (!(tol > 0)) throw DomainError("distance tolerance must be positive");
  if (!z1.finite() || !z2.finite()) throw DomainError("non-finite phase point");
  const int d = z1.d;
  const double upper = sup_norm(relative(z2, z1));
  double hi = upper;
  double lo = std::max({upper / 2, std::sqrt(std::abs(z1.t - z2.t)),
                        norm(sub(z1.v, z2.v), d) / 2});
  if (hi - lo <= tol) return hi;

  Vec mid{};
  for (int i = 0; i < d; ++i) mid[i] = (z1.v[i] + z2.v[i]) / 2;
  const double step = std::max(upper, 1e-3) / 2;
  for (const Vec& s : {z1.v, z2.v, mid, Vec{}}) {
    const auto r = detail::nelder_mead(z1, z2, s, step, opt.simplex_iterations, tol * 1e-3);
    hi = std::min(hi, r[0]);
  }
  if (hi - lo <= tol) return hi;

  for (int it = 0; it < opt.bisection_iterations && hi - lo > tol; ++it) {
    const double m = (lo + hi) / 2;
    if (detail::distance_level_feasible(z1, z2, m))
      hi = m;
    else
      lo = m;
  }
  if (hi - lo > tol) throw DistanceError("kinetic distance did not converge", hi, hi - lo);
  return hi;
}

// Brute-force minimum of the objective over a grid covering hull(v1, v2) inflated
// by the upper bound; used as an independent check.
inline double distance_grid_search(const PhasePoint& z1, const PhasePoint& z2, int n) {
  same_dim(z1, z2);
  const int d = z1.d;
  const double upper = sup_norm(relative(z2, z1));
  Vec lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    lo[i] = std::min(z1.v[i], z2.v[i]) - upper;
    hi[i] = std::max(z1.v[i], z2.v[i]) + upper;
  }
  double best = std::numeric_limits<double>::infinity();
  std::array<int, max_dim> idx{};
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n + 1;
  for (long k = 0; k < total; ++k) {
    long rem = k;
    Vec w{};
    for (int i = 0; i < d; ++i) {
      idx[i] = static_cast<int>(rem % (n + 1));
      rem /= n + 1;
      w[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / n;
    }
    best = std::min(best, distance_objective(z1, z2, w));
  }
  return best;
}

}  // namespace kinlab
