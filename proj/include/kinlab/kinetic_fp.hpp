#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "coefficients.hpp"
#include "diffusion.hpp"
#include "error.hpp"
#include "fractional.hpp"
#include "grid.hpp"
#include "linear_solver.hpp"

// ∂_t f + v ∂_x f = ∂_v(a ∂_v f) + B ∂_v f + S in d = 1, x periodic.
// One step: transport by dt/2, implicit v-diffusion and drift by dt, transport
// by dt/2 (transport is exact in time). With Dirichlet v-data the outer v cells
// are held at 0.

namespace kinlab {

enum class Transport { linear, spectral };
enum class VBoundary { dirichlet, periodic };

using PhaseProfile = std::function<double(double, double, double)>;  // (t, x, v)

struct KineticProblem {
  double x_lo = -1, x_hi = 1;
  int nx = 64;
  double v_max = 3;
  int nv = 64;
  double t0 = 0, T = 1;
  int steps = 64;
  int save_every = 1;
  CoefficientField A;  // inputs (t, x, v), 1x1
  PhaseProfile drift;  // B; zero when empty
  PhaseProfile source; // S; zero when empty
  std::function<double(double, double)> initial;  // f(t0, x, v)
  Transport transport = Transport::linear;
  VBoundary vbc = VBoundary::dirichlet;
  FaceAverage average = FaceAverage::arithmetic;
  double theta = 1;  // implicit weight of the v step: 1 backward Euler (monotone), 0.5 Crank-Nicolson
};

struct KineticSolution {
  GridFunction f;             // roles (t, x, v); t cell centres are the saved times
  std::vector<double> times;
  std::vector<double> mass;   // ∫∫ f dx dv at saved times
  double boundary_outflow = 0;  // mass removed by the v-boundary over the run
  double source_mass = 0;       // ∫∫∫ S added over the run
  double max_drift = 0;
  double min_value = 0, max_value = 0;
};

namespace detail {

// Periodic shift g(x) = f(x - s) of one row sampled at cell centres.
class RowShifter {
 public:
  RowShifter(int n, double length, Transport kind) : n_(n), L_(length), kind_(kind) {
    if (kind == Transport::spectral) {
      fwd_ = std::make_unique<FftPlan>(std::vector<int>{n}, FFTW_FORWARD);
      bwd_ = std::make_unique<FftPlan>(std::vector<int>{n}, FFTW_BACKWARD);
    }
    tmp_.resize(static_cast<std::size_t>(n));
  }

  void shift(double* row, double s) {
    const double h = L_ / n_;
    if (kind_ == Transport::linear) {
      // Departure point x_i - s = x_{i-q} - θh with q integer, θ in [0, 1).
      const double u = s / h;
      const double q = std::floor(u);
      const double th = u - q;
      const long qi = static_cast<long>(q);
      for (int i = 0; i < n_; ++i) {
        const long a = ((i - qi) % n_ + n_) % n_;
        const long b = ((a - 1) % n_ + n_) % n_;
        tmp_[i] = (1 - th) * row[a] + th * row[b];
      }
      std::copy(tmp_.begin(), tmp_.end(), row);
      return;
    }
    auto* z = fwd_->data();
    for (int i = 0; i < n_; ++i) z[i] = row[i];
    fwd_->run();
    auto* w = bwd_->data();
    for (int k = 0; k < n_; ++k) {
      const int m = wavenumber(k, n_);
      const double kk = 2 * std::numbers::pi * m / L_;
      // The Nyquist mode is real: use the real part of its phase factor.
      const std::complex<double> ph = (2 * m == n_) ? std::complex<double>(std::cos(kk * s), 0)
                                                    : std::polar(1.0, -kk * s);
      w[k] = z[k] * ph / static_cast<double>(n_);
    }
    bwd_->run();
    for (int i = 0; i < n_; ++i) row[i] = w[i].real();
  }

 private:
  int n_;
  double L_;
  Transport kind_;
  std::unique_ptr<FftPlan> fwd_, bwd_;
  std::vector<double> tmp_;
};

}  // namespace detail

inline KineticSolution solve_kinetic_fp(const KineticProblem& P) {
  if (P.nx < 4 || P.nv < 4) throw DomainError("kinetic grid needs at least 4 cells per axis");
  if (!(P.x_hi > P.x_lo) || !(P.v_max > 0)) throw DomainError("kinetic box needs positive extent");
  if (P.steps < 1 || P.save_every < 1 || P.steps % P.save_every != 0)
    throw DomainError("steps must be a positive multiple of save_every");
  if (!(P.T > P.t0)) throw DomainError("need T > t0");
  if (!(P.theta >= 0.5 && P.theta <= 1)) throw DomainError("theta must lie in [1/2, 1]");
  if (P.A.input_dim() != 3 || P.A.matrix_dim() != 1)
    throw DimensionError("kinetic coefficients take (t, x, v) and are 1x1 (d = 1)");
  const int nx = P.nx, nv = P.nv;
  const double dt = (P.T - P.t0) / P.steps;
  const int nsave = P.steps / P.save_every;
  const double dts = dt * P.save_every;
  KineticSolution sol;
  sol.f = GridFunction({Axis::t, Axis::x, Axis::v}, {P.t0 - dts / 2, P.x_lo, -P.v_max},
                       {P.t0 + nsave * dts + dts / 2, P.x_hi, P.v_max}, {nsave + 1, nx, nv});
  const double hx = (P.x_hi - P.x_lo) / nx, hv = 2 * P.v_max / nv;
  auto xc = [&](int i) { return P.x_lo + (i + 0.5) * hx; };
  auto vc = [&](int j) { return -P.v_max + (j + 0.5) * hv; };
  const bool dir = P.vbc == VBoundary::dirichlet;
  // f[i * nv + j]: x row-major, v fastest.
  std::vector<double> f(static_cast<std::size_t>(nx) * nv);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nv; ++j)
      f[i * nv + j] = (dir && (j == 0 || j == nv - 1)) ? 0.0 : (P.initial ? P.initial(xc(i), vc(j)) : 0.0);
  const double cell = hx * hv;
  auto mass = [&] {
    double m = 0;
    for (double w : f) m += w;
    return m * cell;
  };
  auto store = [&](int k, double t) {
    std::copy(f.begin(), f.end(), sol.f.values.begin() + static_cast<long>(k) * nx * nv);
    sol.times.push_back(t);
    sol.mass.push_back(mass());
  };
  store(0, P.t0);
  detail::RowShifter shifter(nx, P.x_hi - P.x_lo, P.transport);
  std::vector<double> row(static_cast<std::size_t>(nx));
  auto transport = [&](double tau) {
    for (int j = 0; j < nv; ++j) {
      if (dir && (j == 0 || j == nv - 1)) continue;
      for (int i = 0; i < nx; ++i) row[i] = f[i * nv + j];
      shifter.shift(row.data(), vc(j) * tau);
      for (int i = 0; i < nx; ++i) f[i * nv + j] = row[i];
    }
  };
  const int first = dir ? 1 : 0, last = dir ? nv - 2 : nv - 1;
  const int m = last - first + 1;
  std::vector<double> a(m), b(m), c(m), d(m), coef(nv), face(nv + 1);
  const double Lam = P.A.Lambda();
  const double th = P.theta;
  // Coefficients, drift and source are evaluated at t = t_end - (1 - theta) dt.
  auto diffuse = [&](double t) {
    double y[3];
    y[0] = t;
    double removed = 0;
    for (int i = 0; i < nx; ++i) {
      y[1] = xc(i);
      for (int j = 0; j < nv; ++j) {
        y[2] = vc(j);
        coef[j] = P.A(y)(0, 0);
      }
      // face[j] sits between cells j-1 and j.
      for (int j = 1; j < nv; ++j) face[j] = face_mean(coef[j - 1], coef[j], P.average);
      face[0] = face_mean(coef[nv - 1], coef[0], P.average);
      face[nv] = face[0];
      double before = 0;
      for (int j = first; j <= last; ++j) before += f[i * nv + j];
      double src = 0;
      for (int k = 0; k < m; ++k) {
        const int j = first + k;
        const double wl = face[j] / (hv * hv), wr = face[j + 1] / (hv * hv);
        double B = P.drift ? P.drift(t, xc(i), vc(j)) : 0.0;
        sol.max_drift = std::max(sol.max_drift, std::abs(B));
        // Upwind: B > 0 moves mass toward lower v, so use the forward difference.
        const double up = B > 0 ? B / hv : 0.0, dn = B < 0 ? -B / hv : 0.0;
        a[k] = -th * dt * (wl + dn);
        c[k] = -th * dt * (wr + up);
        b[k] = 1 + th * dt * (wl + wr + up + dn);
        const double s = P.source ? P.source(t, xc(i), vc(j)) : 0.0;
        src += s;
        d[k] = f[i * nv + j] + dt * s;
        if (th < 1) {
          const double fm = f[i * nv + (j - 1 + nv) % nv], fp = f[i * nv + (j + 1) % nv];
          d[k] -= (1 - th) * dt * ((wl + wr + up + dn) * f[i * nv + j] - (wl + dn) * fm - (wr + up) * fp);
        }
      }
      if (dir) {
        std::vector<double> aa = a, bb = b, cc = c;
        thomas(aa, bb, cc, d);
      } else {
        thomas_cyclic(a, b, c, d);
      }
      double after = 0;
      for (int k = 0; k < m; ++k) {
        f[i * nv + first + k] = d[k];
        after += d[k];
      }
      removed += before + dt * src - after;
      sol.source_mass += dt * src * cell;
    }
    sol.boundary_outflow += removed * cell;
  };
  for (int step = 1; step <= P.steps; ++step) {
    const double t = P.t0 + step * dt;
    transport(dt / 2);
    diffuse(t - (1 - th) * dt);
    transport(dt / 2);
    if (step % P.save_every == 0) store(step / P.save_every, t);
  }
  if (sol.max_drift > Lam * (1 + 1e-12)) throw DomainError("drift exceeds Lambda on the grid");
  sol.min_value = *std::min_element(sol.f.values.begin(), sol.f.values.end());
  sol.max_value = *std::max_element(sol.f.values.begin(), sol.f.values.end());
  return sol;
}

}  // namespace kinlab
