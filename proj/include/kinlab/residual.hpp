#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "coefficients.hpp"
#include "diffusion.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "kinetic_fp.hpp"

// Discrete weak-form residuals against a fixed battery of smooth, compactly
// supported tensor bumps.

namespace kinlab {

// Π_a β((y_a - c_a) / w_a) with β(s) = exp(1 - 1/(1 - s²)) on |s| < 1.
struct TensorBump {
  std::vector<double> centre, half;

  static double beta(double s) { return std::abs(s) < 1 ? std::exp(1 - 1 / (1 - s * s)) : 0.0; }
  static double dbeta(double s) {
    if (std::abs(s) >= 1) return 0.0;
    const double q = 1 - s * s;
    return beta(s) * (-2 * s / (q * q));
  }

  double value(const double* y) const {
    double p = 1;
    for (std::size_t a = 0; a < centre.size(); ++a) p *= beta((y[a] - centre[a]) / half[a]);
    return p;
  }
  double derivative(const double* y, std::size_t k) const {
    double p = 1;
    for (std::size_t a = 0; a < centre.size(); ++a) {
      const double s = (y[a] - centre[a]) / half[a];
      p *= a == k ? dbeta(s) / half[a] : beta(s);
    }
    return p;
  }
  // Central difference with step h along axis k. Summed over a cell-centred
  // grid it telescopes to zero, so constant fluxes leave no quadrature residue.
  double difference(const double* y, std::size_t k, double h) const {
    double p = 1, q = 1;
    for (std::size_t a = 0; a < centre.size(); ++a) {
      const double s = (y[a] - centre[a]) / half[a];
      if (a == k) {
        p *= beta(s + h / half[a]);
        q *= beta(s - h / half[a]);
      } else {
        const double b = beta(s);
        p *= b;
        q *= b;
      }
    }
    return (p - q) / (2 * h);
  }
};

// Centres at 0.3, 0.5, 0.7 of each axis, half widths 0.2 of the extent: 3^k bumps
// supported in the middle 80% of the box.
inline std::vector<TensorBump> bump_battery(const std::vector<double>& lo, const std::vector<double>& hi) {
  const std::size_t k = lo.size();
  std::size_t total = 1;
  for (std::size_t a = 0; a < k; ++a) total *= 3;
  std::vector<TensorBump> out;
  for (std::size_t f = 0; f < total; ++f) {
    TensorBump b;
    std::size_t r = f;
    for (std::size_t a = 0; a < k; ++a) {
      const double L = hi[a] - lo[a];
      b.centre.push_back(lo[a] + L * (0.3 + 0.2 * static_cast<double>(r % 3)));
      b.half.push_back(0.2 * L);
      r /= 3;
    }
    out.push_back(b);
  }
  return out;
}

struct WeakResidualReport {
  std::vector<double> absolute, relative;  // per bump
  double max_absolute = 0, max_relative = 0;
};

inline void finish(WeakResidualReport& r) {
  for (double a : r.absolute) r.max_absolute = std::max(r.max_absolute, std::abs(a));
  for (double a : r.relative) r.max_relative = std::max(r.max_relative, std::abs(a));
}

namespace detail {

// Central difference along axis a, one-sided at the box edges.
inline double central_diff(const GridFunction& g, const int* idx, int a) {
  int p[8], q[8];
  std::copy(idx, idx + g.rank(), p);
  std::copy(idx, idx + g.rank(), q);
  const int n = g.counts[a];
  double span = 2;
  if (idx[a] == 0) {
    q[a] = 0;
    p[a] = 1;
    span = 1;
  } else if (idx[a] == n - 1) {
    q[a] = n - 2;
    p[a] = n - 1;
    span = 1;
  } else {
    q[a] = idx[a] - 1;
    p[a] = idx[a] + 1;
  }
  return (g.values[g.index(p)] - g.values[g.index(q)]) / (span * g.spacing(a));
}

}  // namespace detail

// Elliptic: R(φ) = ∫ A∇u·∇φ - ∫ S φ, with ∇u and ∇φ by central differences and
// the full matrix A at cell centres.
inline WeakResidualReport elliptic_residual(const GridFunction& u, const CoefficientField& A, const Profile& S) {
  const int d = u.rank();
  if (A.input_dim() != d || A.matrix_dim() != d) throw DimensionError("coefficient field does not match u");
  WeakResidualReport rep;
  const auto bumps = bump_battery(u.lower, u.upper);
  std::vector<double> R(bumps.size(), 0.0), scale(bumps.size(), 0.0);
  int idx[3];
  double c[3], gu[3];
  for (std::size_t f = 0; f < u.size(); ++f) {
    u.unravel(f, idx);
    u.coords(f, c);
    for (int a = 0; a < d; ++a) gu[a] = detail::central_diff(u, idx, a);
    const Mat3 M = A(c);
    double flux[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) flux[a] += M(a, b) * gu[b];
    const double s = S ? S(c) : 0.0;
    for (std::size_t k = 0; k < bumps.size(); ++k) {
      const double phi = bumps[k].value(c);
      double e = 0;
      for (int a = 0; a < d; ++a) e += flux[a] * bumps[k].difference(c, a, u.spacing(a));
      R[k] += e - s * phi;
      scale[k] += std::abs(e) + std::abs(s * phi);
    }
  }
  const double vol = u.cell_volume();
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    rep.absolute.push_back(R[k] * vol);
    rep.relative.push_back(scale[k] > 0 ? R[k] / scale[k] : 0.0);
  }
  finish(rep);
  return rep;
}

// Kinetic, d = 1: R(φ) = ∫ f (∂_t + v ∂_x)φ - ∫ a ∂_v f ∂_v φ + ∫ (B ∂_v f + S) φ
// over a (t, x, v) grid, midpoint rule in every variable and central differences
// for the derivatives of φ.
inline WeakResidualReport kinetic_residual(const GridFunction& f, const CoefficientField& A,
                                           const PhaseProfile& B, const PhaseProfile& S) {
  if (f.rank() != 3 || f.roles[0] != Axis::t || f.roles[1] != Axis::x || f.roles[2] != Axis::v)
    throw DimensionError("kinetic residual expects a (t, x, v) grid");
  if (A.input_dim() != 3 || A.matrix_dim() != 1) throw DimensionError("kinetic coefficients are 1x1 on (t, x, v)");
  WeakResidualReport rep;
  const auto bumps = bump_battery(f.lower, f.upper);
  std::vector<double> R(bumps.size(), 0.0), scale(bumps.size(), 0.0);
  int idx[3];
  double c[3];
  const double ht = f.spacing(0), hx = f.spacing(1), hv = f.spacing(2);
  for (std::size_t q = 0; q < f.size(); ++q) {
    f.unravel(q, idx);
    f.coords(q, c);
    const double fv = f.values[q];
    const double dv = detail::central_diff(f, idx, 2);
    const double a = A(c)(0, 0);
    const double b = B ? B(c[0], c[1], c[2]) : 0.0;
    const double s = S ? S(c[0], c[1], c[2]) : 0.0;
    for (std::size_t k = 0; k < bumps.size(); ++k) {
      const double phi = bumps[k].value(c);
      const double tr = fv * (bumps[k].difference(c, 0, ht) + c[2] * bumps[k].difference(c, 1, hx));
      const double df = a * dv * bumps[k].difference(c, 2, hv);
      const double rest = (b * dv + s) * phi;
      R[k] += tr - df + rest;
      scale[k] += std::abs(tr) + std::abs(df) + std::abs(rest);
    }
  }
  const double vol = f.cell_volume();
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    rep.absolute.push_back(R[k] * vol);
    rep.relative.push_back(scale[k] > 0 ? R[k] / scale[k] : 0.0);
  }
  finish(rep);
  return rep;
}

}  // namespace kinlab
