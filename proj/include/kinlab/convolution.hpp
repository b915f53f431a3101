#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "parallel.hpp"

namespace kinlab {

namespace detail {

inline int phase_dim(const GridFunction& g) {
  const int d = g.count_role(Axis::x);
  if (d < 1 || d > max_dim || g.rank() != 1 + 2 * d || g.roles[0] != Axis::t ||
      g.count_role(Axis::v) != d)
    throw DimensionError("expected a (t, x..., v...) grid");
  for (int i = 0; i < d; ++i)
    if (g.roles[1 + i] != Axis::x || g.roles[1 + d + i] != Axis::v)
      throw DimensionError("expected axis order (t, x..., v...)");
  return d;
}

inline PhasePoint point_of(const double* c, int d) {
  PhasePoint z = PhasePoint::origin(d);
  z.t = c[0];
  for (int i = 0; i < d; ++i) {
    z.x[i] = c[1 + i];
    z.v[i] = c[1 + d + i];
  }
  return z;
}

inline void coords_of(const PhasePoint& z, double* c) {
  c[0] = z.t;
  for (int i = 0; i < z.d; ++i) {
    c[1 + i] = z.x[i];
    c[1 + z.d + i] = z.v[i];
  }
}

}  // namespace detail

struct ConvolutionResult {
  GridFunction out;
  // Σ |g(ζ)| dζ dz over quadrature pairs whose f-argument left f's box.
  double outside_weight = 0;
};

// Box containing ζ ∘ z' for ζ in g's box and z' in f's box, i.e. the support of
// f *_kin g when both factors vanish outside their boxes.
inline GridFunction convolution_support_lattice(const GridFunction& f, const GridFunction& g,
                                                std::vector<int> counts) {
  const int d = detail::phase_dim(f);
  if (detail::phase_dim(g) != d) throw DimensionError("convolution factors differ in d");
  std::vector<double> lo(1 + 2 * d), hi(1 + 2 * d);
  lo[0] = f.lower[0] + g.lower[0];
  hi[0] = f.upper[0] + g.upper[0];
  for (int i = 0; i < d; ++i) {
    const int xa = 1 + i, va = 1 + d + i;
    // x = y + x' + t' w with y in g's x-range, (t', x') in f's box, w in g's v-range.
    const double p[4] = {f.lower[0] * g.lower[va], f.lower[0] * g.upper[va],
                         f.upper[0] * g.lower[va], f.upper[0] * g.upper[va]};
    lo[xa] = g.lower[xa] + f.lower[xa] + *std::min_element(p, p + 4);
    hi[xa] = g.upper[xa] + f.upper[xa] + *std::max_element(p, p + 4);
    lo[va] = f.lower[va] + g.lower[va];
    hi[va] = f.upper[va] + g.upper[va];
  }
  return GridFunction(f.roles, lo, hi, std::move(counts));
}

// (f * g)(z) = ∫ f(ζ^{-1} ∘ z) g(ζ) dζ by the midpoint rule over g's cells, with f
// interpolated multilinearly and taken as zero outside its box.
inline ConvolutionResult kin_convolve(const GridFunction& f, const GridFunction& g,
                                      const GridFunction& target, unsigned jobs = 1) {
  const int d = detail::phase_dim(f);
  if (detail::phase_dim(g) != d || detail::phase_dim(target) != d)
    throw DimensionError("convolution grids differ in d");
  std::vector<PhasePoint> zeta;
  std::vector<double> gw;
  double c[8];
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    if (g.values[k] == 0) continue;
    g.coords(k, c);
    zeta.push_back(inverse(detail::point_of(c, d)));
    gw.push_back(g.values[k] * g.cell_volume());
  }
  ConvolutionResult res{target.like(), 0.0};
  std::vector<double> outside(target.values.size(), 0.0);
  parallel_for(target.values.size(), jobs, [&](std::size_t k) {
    double tc[8], fc[8];
    target.coords(k, tc);
    const PhasePoint z = detail::point_of(tc, d);
    double s = 0, lost = 0;
    for (std::size_t j = 0; j < zeta.size(); ++j) {
      detail::coords_of(compose(zeta[j], z), fc);
      if (!f.inside_box(fc)) {
        lost += std::abs(gw[j]);
        continue;
      }
      s += f.interpolate(fc) * gw[j];
    }
    res.out.values[k] = s;
    outside[k] = lost * target.cell_volume();
  });
  for (double o : outside) res.outside_weight += o;
  return res;
}

// Same quadrature with f given as a function of the phase point.
template <class F>
GridFunction kin_convolve_function(F&& f, const GridFunction& g, const GridFunction& target,
                                   unsigned jobs = 1) {
  const int d = detail::phase_dim(g);
  std::vector<PhasePoint> zeta;
  std::vector<double> gw;
  double c[8];
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    if (g.values[k] == 0) continue;
    g.coords(k, c);
    zeta.push_back(inverse(detail::point_of(c, d)));
    gw.push_back(g.values[k] * g.cell_volume());
  }
  GridFunction out = target.like();
  parallel_for(target.values.size(), jobs, [&](std::size_t k) {
    double tc[8];
    target.coords(k, tc);
    const PhasePoint z = detail::point_of(tc, d);
    double s = 0;
    for (std::size_t j = 0; j < zeta.size(); ++j) s += f(compose(zeta[j], z)) * gw[j];
    out.values[k] = s;
  });
  return out;
}

struct YoungReport {
  double p = 1, q = 1, r = 1;
  double lhs = 0;  // ‖f * g‖_r
  double rhs = 0;  // ‖f‖_p ‖g‖_q
  double slack = 0;
  bool pass = false;
};

inline double young_exponent(double p, double q) {
  if (p < 1 || q < 1) throw DomainError("Young exponents must be >= 1");
  const double s = 1.0 / p + 1.0 / q - 1.0;
  if (s < -1e-15) throw DomainError("Young exponents need 1/p + 1/q >= 1");
  return s <= 0 ? std::numeric_limits<double>::infinity() : 1.0 / s;
}

inline YoungReport young_check(const GridFunction& f, const GridFunction& g, double p, double q,
                               std::vector<int> target_counts, double slack = 0.05,
                               unsigned jobs = 1) {
  YoungReport rep;
  rep.p = p;
  rep.q = q;
  rep.r = young_exponent(p, q);
  rep.slack = slack;
  const GridFunction target = convolution_support_lattice(f, g, std::move(target_counts));
  const auto conv = kin_convolve(f, g, target, jobs);
  rep.lhs = conv.out.lp_norm(rep.r);
  rep.rhs = f.lp_norm(p) * g.lp_norm(q);
  rep.pass = rep.lhs <= rep.rhs * (1 + slack);
  return rep;
}

struct WeakLpEstimate {
  double p = 1;
  double value = 0;          // sup over the α-grid of α |{|f| > α}|^{1/p}
  double strong = 0;         // ‖f‖_p on the same grid
  std::vector<double> alpha; // the α-grid
};

// α runs over a logarithmic grid between the smallest and largest nonzero |f|.
inline WeakLpEstimate weak_lp_norm(const GridFunction& f, double p, int per_decade = 64) {
  if (p < 1) throw DomainError("weak Lp needs p >= 1");
  WeakLpEstimate est;
  est.p = p;
  est.strong = f.lp_norm(p);
  std::vector<double> a;
  for (double v : f.values)
    if (v != 0) a.push_back(std::abs(v));
  if (a.empty()) return est;
  std::sort(a.begin(), a.end());
  const double lo = a.front(), hi = a.back();
  const double vol = f.cell_volume();
  // Log space: hi / lo overflows when lo is subnormal.
  const double llo = std::log(lo), lhi = std::log(hi);
  const int n = std::max(2, static_cast<int>(std::ceil(per_decade * (lhi - llo) / std::log(10.0))) + 1);
  for (int k = 0; k < n; ++k) {
    // Slightly below each node so the top level set is never empty.
    const double alpha = std::exp(llo + (lhi - llo) * k / (n - 1)) * (1 - 1e-12);
    const auto above = a.end() - std::upper_bound(a.begin(), a.end(), alpha);
    est.alpha.push_back(alpha);
    est.value = std::max(est.value, alpha * std::pow(static_cast<double>(above) * vol, 1.0 / p));
  }
  return est;
}

// Separable Gaussian bump B(ζ) = exp(-a t'² - b|x'|² - c|v'|²) in the coordinates
// ζ = (t', x', v') = z0^{-1} ∘ z, so left translates stay in the family.
struct GaussianBump {
  PhasePoint center;
  double a = 1, b = 1, c = 1;
  double amplitude = 1;
  double cutoff = 40;  // exponent beyond which the bump counts as zero

  int d() const { return center.d; }

  double operator()(const PhasePoint& z) const {
    const PhasePoint r = relative(center, z);
    const int n = center.d;
    return amplitude * std::exp(-a * r.t * r.t - b * dot(r.x, r.x, n) - c * dot(r.v, r.v, n));
  }

  // (∂_t + v·∇_x + Δ_v) applied analytically; the operator is left invariant.
  double adjoint_operator(const PhasePoint& z) const {
    const PhasePoint r = relative(center, z);
    const int n = center.d;
    const double B = amplitude * std::exp(-a * r.t * r.t - b * dot(r.x, r.x, n) - c * dot(r.v, r.v, n));
    return B * (-2 * a * r.t - 2 * b * dot(r.v, r.x, n) + 4 * c * c * dot(r.v, r.v, n) -
                2 * c * n);
  }

  // Half-widths in relative coordinates where the exponent reaches the cutoff.
  double half_t() const { return std::sqrt(cutoff / a); }
  double half_x() const { return std::sqrt(cutoff / b); }
  double half_v() const { return std::sqrt(cutoff / c); }
};

struct AdjointQuadrature {
  int time_nodes = 16;   // midpoint nodes in σ = √τ
  int space_nodes = 12;  // midpoint nodes per x and v axis
  double gamma_extent = 7;  // kernel window in marginal standard deviations
};

struct AdjointReport {
  double relative_error = 0;  // ‖LHS + φ‖₂ / ‖φ‖₂ over the targets
  double max_error = 0;
  long targets = 0;
};

namespace detail {

// (Γ̌ * ψ)(z) = ∫_{τ>0} ∫∫ Γ(τ, ŷ, ŵ) ψ(t+τ, x+ŷ+τv, v+ŵ) dŷ dŵ dτ with ψ = K*φ.
// Per τ the (ŷ, ŵ) window is the kernel's window intersected with the bump's
// support, so both factors are resolved.
inline double adjoint_lhs(const GaussianBump& phi, const PhasePoint& z, double t_max,
                          const AdjointQuadrature& q) {
  const int d = phi.d();
  const double tau_max = t_max - z.t;
  if (tau_max <= 0) return 0;
  const double smax = std::sqrt(tau_max);
  const double hs = smax / q.time_nodes;
  double total = 0;
  const int ns = q.space_nodes;
  const int k2 = 2 * d;
  long cells = 1;
  for (int a = 0; a < k2; ++a) cells *= ns;
  for (int it = 0; it < q.time_nodes; ++it) {
    const double s = (it + 0.5) * hs;
    const double tau = s * s;
    // Marginal std of Γ(τ): x ~ sqrt(2/3) τ^{3/2}, v ~ sqrt(2) τ^{1/2}.
    const double wx = q.gamma_extent * std::sqrt(2.0 / 3.0) * tau * std::sqrt(tau);
    const double wv = q.gamma_extent * std::sqrt(2.0) * std::sqrt(tau);
    std::array<double, 2 * max_dim> lo{}, hi{};
    bool empty = false;
    // Bump support in absolute coordinates at time t+τ, enclosed in a box.
    const PhasePoint& c0 = phi.center;
    const double dt = z.t + tau - c0.t;
    for (int i = 0; i < d; ++i) {
      const double vlo = c0.v[i] - phi.half_v(), vhi = c0.v[i] + phi.half_v();
      const double xc = c0.x[i] + dt * c0.v[i];
      const double ylo = xc - phi.half_x() - z.x[i] - tau * z.v[i];
      const double yhi = xc + phi.half_x() - z.x[i] - tau * z.v[i];
      lo[i] = std::max(-wx, ylo);
      hi[i] = std::min(wx, yhi);
      lo[d + i] = std::max(-wv, vlo - z.v[i]);
      hi[d + i] = std::min(wv, vhi - z.v[i]);
      if (!(lo[i] < hi[i]) || !(lo[d + i] < hi[d + i])) empty = true;
    }
    if (empty) continue;
    double vol = 1;
    for (int a = 0; a < k2; ++a) vol *= (hi[a] - lo[a]) / ns;
    double slice = 0;
    for (long f = 0; f < cells; ++f) {
      long r = f;
      Vec yh{}, wh{};
      for (int a = 0; a < k2; ++a) {
        const int i = static_cast<int>(r % ns);
        r /= ns;
        const double val = lo[a] + (i + 0.5) * (hi[a] - lo[a]) / ns;
        if (a < d)
          yh[a] = val;
        else
          wh[a - d] = val;
      }
      const double G = gamma(tau, yh, wh, d);
      if (G == 0) continue;
      PhasePoint zeta = z;
      zeta.t = z.t + tau;
      for (int i = 0; i < d; ++i) {
        zeta.x[i] = z.x[i] + yh[i] + tau * z.v[i];
        zeta.v[i] = z.v[i] + wh[i];
      }
      slice += G * phi.adjoint_operator(zeta);
    }
    total += slice * vol * 2 * s * hs;
  }
  return total;
}

}  // namespace detail

// Relative L² error of Γ̌ *_kin (∂_t + v·∇_x + Δ_v)φ + φ on a target lattice that
// covers the bump's support box with n_target nodes per axis.
inline AdjointReport adjoint_identity_check(const GaussianBump& phi, int n_target,
                                            const AdjointQuadrature& q, unsigned jobs = 1) {
  const int d = phi.d();
  if (phi.a <= 0 || phi.b <= 0 || phi.c <= 0) throw DomainError("bump widths must be positive");
  if (n_target < 1) throw DomainError("need at least one target per axis");
  if (phi.cutoff < 28) throw DomainError("bump support touches its box (cutoff below 28)");
  const int k = 1 + 2 * d;
  const double half[3] = {phi.half_t(), phi.half_x(), phi.half_v()};
  std::vector<PhasePoint> targets;
  long total = 1;
  for (int a = 0; a < k; ++a) total *= n_target;
  for (long f = 0; f < total; ++f) {
    long r = f;
    PhasePoint rel = PhasePoint::origin(d);
    for (int a = 0; a < k; ++a) {
      const int i = static_cast<int>(r % n_target);
      r /= n_target;
      const int kind = a == 0 ? 0 : (a <= d ? 1 : 2);
      const double u = -half[kind] + (i + 0.5) * 2 * half[kind] / n_target;
      if (a == 0)
        rel.t = u;
      else if (a <= d)
        rel.x[a - 1] = u;
      else
        rel.v[a - 1 - d] = u;
    }
    targets.push_back(compose(phi.center, rel));
  }
  const double t_max = phi.center.t + phi.half_t();
  std::vector<double> err(targets.size()), ref(targets.size());
  parallel_for(targets.size(), jobs, [&](std::size_t i) {
    const double lhs = detail::adjoint_lhs(phi, targets[i], t_max, q);
    ref[i] = phi(targets[i]);
    err[i] = lhs + ref[i];
  });
  AdjointReport rep;
  double e2 = 0, r2 = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    e2 += err[i] * err[i];
    r2 += ref[i] * ref[i];
    rep.max_error = std::max(rep.max_error, std::abs(err[i]));
  }
  rep.targets = static_cast<long>(targets.size());
  rep.relative_error = r2 > 0 ? std::sqrt(e2 / r2) : std::sqrt(e2);
  return rep;
}

}  // namespace kinlab
