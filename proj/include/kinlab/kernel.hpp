#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"

namespace kinlab {

// log of (3/(4π²))^{d/2} t^{-2d} exp(-3|x - t v/2|²/t³ - |v|²/(4t)), t > 0.
// With x - t v/2 this solves ∂_t + v·∇_x - Δ_v; the opposite sign solves the
// operator with reversed transport.
inline double log_gamma_kernel(double t, const Vec& x, const Vec& v, int d) {
  double q = 0, vv = 0;
  for (int i = 0; i < d; ++i) {
    const double y = x[i] - 0.5 * t * v[i];
    q += y * y;
    vv += v[i] * v[i];
  }
  const double logc = 0.5 * d * std::log(3.0 / (4.0 * std::numbers::pi * std::numbers::pi));
  return logc - 2.0 * d * std::log(t) - 3.0 * q / (t * t * t) - vv / (4.0 * t);
}

inline double gamma(double t, const Vec& x, const Vec& v, int d) {
  check_dim(d);
  if (!(t > 0)) return 0.0;
  return std::exp(log_gamma_kernel(t, x, v, d));
}

inline double gamma1(const Vec& x, const Vec& v, int d) { return gamma(1.0, x, v, d); }

// t ∇_x Γ
inline Vec gamma_x(double t, const Vec& x, const Vec& v, int d) {
  Vec g{};
  if (!(t > 0)) return g;
  const double G = gamma(t, x, v, d);
  for (int i = 0; i < d; ++i) g[i] = -6.0 * G * (x[i] - 0.5 * t * v[i]) / (t * t);
  return g;
}

// ∇_v Γ
inline Vec gamma_v(double t, const Vec& x, const Vec& v, int d) {
  Vec g{};
  if (!(t > 0)) return g;
  const double G = gamma(t, x, v, d);
  for (int i = 0; i < d; ++i)
    g[i] = G * (3.0 * (x[i] - 0.5 * t * v[i]) / (t * t) - v[i] / (2.0 * t));
  return g;
}

// exp(-(t³|φ|²/3 - t² φ·ξ + t|ξ|²)) = exp(-∫_0^t |sφ - ξ|² ds), the transform
// ∫ Γ(t,x,v) e^{-i(φ·x - ξ·v)} dx dv.
inline double fourier_symbol(double t, const Vec& phi, const Vec& xi, int d) {
  if (t < 0) throw DomainError("fourier_symbol needs t >= 0");
  const double pp = dot(phi, phi, d), px = dot(phi, xi, d), xx = dot(xi, xi, d);
  return std::exp(-(t * t * t * pp / 3.0 - t * t * px + t * xx));
}

struct MassReport {
  double box_mass;   // midpoint quadrature over [-L, L]^{2d}
  double tail_mass;  // mass outside the box
  double total() const { return box_mass + tail_mass; }
};

namespace detail {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// P(|X| <= L, |V| <= L) for one coordinate pair of Γ(t,·,·): V ~ N(0, 2t) and
// X | V = v ~ N(t v / 2, t³/6).
inline double pair_box_probability(double t, double L) {
  const double sv = std::sqrt(2 * t), sx = std::sqrt(t * t * t / 6.0);
  const int n = 4000;
  const double h = 2 * L / n;
  double s = 0;
  for (int k = 0; k < n; ++k) {
    const double v = -L + (k + 0.5) * h;
    const double m = 0.5 * t * v;
    const double pin = std_normal_cdf((L - m) / sx) - std_normal_cdf((-L - m) / sx);
    s += std::exp(-0.5 * v * v / (sv * sv)) / (sv * std::sqrt(2 * std::numbers::pi)) * pin;
  }
  return s * h;
}

}  // namespace detail

// ∫∫ Γ(t,·,·) over R^{2d}: tensor midpoint rule on [-L, L]^{2d} with n nodes per
// axis plus the Gaussian tail outside the box.
inline MassReport gamma_mass(double t, int d, double L, int n) {
  check_dim(d);
  const double h = 2 * L / n;
  std::vector<double> nodes(n);
  for (int k = 0; k < n; ++k) nodes[k] = -L + (k + 0.5) * h;
  const int k2 = 2 * d;
  long total = 1;
  for (int a = 0; a < k2; ++a) total *= n;
  double s = 0;
  std::vector<int> idx(k2, 0);
  for (long f = 0; f < total; ++f) {
    long r = f;
    Vec x{}, v{};
    for (int a = 0; a < k2; ++a) {
      const int i = static_cast<int>(r % n);
      r /= n;
      if (a < d)
        x[a] = nodes[i];
      else
        v[a - d] = nodes[i];
    }
    s += gamma(t, x, v, d);
  }
  const double box = s * std::pow(h, k2);
  const double p = detail::pair_box_probability(t, L);
  return {box, 1.0 - std::pow(p, d)};
}

struct ResidualNorms {
  double max_abs = 0;
  double l2 = 0;
  long points = 0;
};

// Central-difference residual of ∂_t h + v·∇_x h - Δ_v h at interior cells.
// Axis layout: (t, x_1..x_d, v_1..v_d).
inline ResidualNorms kolmogorov_residual(const GridFunction& h) {
  const int d = h.count_role(Axis::x);
  if (h.roles.size() != static_cast<std::size_t>(1 + 2 * d) || h.roles[0] != Axis::t ||
      h.count_role(Axis::v) != d)
    throw DimensionError("kolmogorov_residual expects axes (t, x..., v...)");
  const int k = h.rank();
  ResidualNorms out;
  double sum2 = 0;
  int idx[8];
  for (std::size_t f = 0; f < h.values.size(); ++f) {
    h.unravel(f, idx);
    bool interior = true;
    for (int a = 0; a < k; ++a)
      if (idx[a] == 0 || idx[a] == h.counts[a] - 1) interior = false;
    if (!interior) continue;
    auto diff1 = [&](int a) {
      const std::size_t s = h.stride(a);
      return (h.values[f + s] - h.values[f - s]) / (2 * h.spacing(a));
    };
    auto diff2 = [&](int a) {
      const std::size_t s = h.stride(a);
      const double ha = h.spacing(a);
      return (h.values[f + s] - 2 * h.values[f] + h.values[f - s]) / (ha * ha);
    };
    double r = diff1(0);
    for (int i = 0; i < d; ++i) {
      const double vi = h.center(1 + d + i, idx[1 + d + i]);
      r += vi * diff1(1 + i) - diff2(1 + d + i);
    }
    out.max_abs = std::max(out.max_abs, std::abs(r));
    sum2 += r * r;
    ++out.points;
  }
  out.l2 = std::sqrt(sum2 * h.cell_volume());
  return out;
}

// Least-squares slope of log(err) against log(h).
inline double fitted_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  const std::size_t n = hs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(hs[i]) / n;
    my += std::log(errs[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxy += dx * (std::log(errs[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Integrability exponents.
inline double critical_exponent(int d, double beta0) { return (1.0 + 2 * d) / (2 * d + beta0); }
inline double gamma_lp_endpoint(int d) { return 1.0 + 1.0 / (2 * d); }
inline double gamma_gradient_lp_endpoint(int d) { return 1.0 + 1.0 / (4 * d + 1); }
inline double fractional_p_endpoint(int d, double eps) {
  return 1.0 + (2.0 - 3 * eps) / (4 * d + 3 * eps);
}
inline double fractional_q_endpoint(int d, double eps) {
  return 1.0 + (1.0 - 3 * eps) / (4 * d + 1 + 3 * eps);
}

struct IntegrabilityReport {
  double exponent = 0;            // (2d+β0)p - 2d
  bool predicted_finite = false;  // exponent < 1
  bool converged = false;
  double last_ratio = 0;          // ratio of the last two dyadic increments
  double estimate = 0;            // extrapolated integral when converged
  std::vector<double> eps;
  std::vector<double> partial;    // ∫_{eps_k}^T ‖F(t)‖_p^p dt
};

// F(t,x,v) = t^{-2d-β0} G(t^{-3/2}x, t^{-1/2}v). For each t the (x,v) integral is a
// midpoint sum over the image of G's lattice under (t^{3/2}, t^{1/2}); the time
// integral runs over dyadic shells [T 2^{-k-1}, T 2^{-k}] with Simpson's rule in log t.
inline IntegrabilityReport scaled_integrability_probe(double beta0, const GridFunction& G,
                                                      double p, double T, int shells = 40) {
  const int d = G.count_role(Axis::x);
  if (G.count_role(Axis::v) != d || G.rank() != 2 * d)
    throw DimensionError("probe profile must have axes (x..., v...)");
  double gp = 0;
  for (double g : G.values) gp += std::pow(std::abs(g), p);
  const double cellG = G.cell_volume();
  auto slice = [&](double t) {
    // Physical cell volume t^{2d} cellG; F = t^{-2d-β0} G at the mapped centres.
    const double phys = std::pow(t, 2 * d) * cellG;
    const double fac = std::pow(t, -(2 * d + beta0) * p);
    return fac * gp * phys;
  };
  auto shell = [&](double a, double b) {
    const int m = 32;
    const double la = std::log(a), lb = std::log(b), hs = (lb - la) / m;
    double s = 0;
    for (int i = 0; i <= m; ++i) {
      const double t = std::exp(la + i * hs);
      const double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
      s += w * slice(t) * t;
    }
    return s * hs / 3;
  };
  IntegrabilityReport rep;
  rep.exponent = (2 * d + beta0) * p - 2 * d;
  rep.predicted_finite = rep.exponent < 1;
  double acc = 0;
  std::vector<double> inc;
  for (int k = 0; k < shells; ++k) {
    const double b = T * std::ldexp(1.0, -k), a = b / 2;
    const double piece = shell(a, b);
    acc += piece;
    inc.push_back(piece);
    rep.eps.push_back(a);
    rep.partial.push_back(acc);
  }
  rep.last_ratio = inc[shells - 1] / inc[shells - 2];
  rep.converged = std::isfinite(rep.last_ratio) && rep.last_ratio < 1 - 1e-3;
  rep.estimate = rep.converged
                     ? acc + inc.back() * rep.last_ratio / (1 - rep.last_ratio)
                     : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace kinlab
