#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "coefficients.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "linear_solver.hpp"

// Cell-centred finite volumes for -div(A ∇u) on a box in R^d. Two-point fluxes
// use the face-normal entry A_aa averaged over the two adjacent cells. With
// Dirichlet data the outer layer of cells is fixed to the trace at its centres
// and the interior cells are unknown; with periodic data every cell is unknown.

namespace kinlab {

enum class FaceAverage { arithmetic, harmonic };
enum class Boundary { dirichlet, periodic };

inline double face_mean(double a, double b, FaceAverage avg) {
  return avg == FaceAverage::arithmetic ? 0.5 * (a + b) : 2 * a * b / (a + b);
}

using Profile = std::function<double(const double*)>;
using TimeProfile = std::function<double(double, const double*)>;

struct DiffusionSystem {
  GridFunction lattice;                 // roles all x; values unused
  Boundary bc = Boundary::dirichlet;
  std::vector<long> unknown;            // cell -> unknown index, -1 for fixed cells
  std::vector<std::size_t> cell;        // unknown -> cell
  SpMat K;                              // stiffness per unit volume
  // Couplings from unknowns to fixed cells: K_PQ u_Q moves to the right side.
  struct Link {
    long row;
    std::size_t fixed_cell;
    double weight;
  };
  std::vector<Link> links;

  std::size_t size() const { return cell.size(); }

  // Right side contribution of the fixed-cell values in g (a full-lattice array).
  Vector boundary_rhs(const std::vector<double>& g) const {
    Vector b = Vector::Zero(static_cast<long>(size()));
    for (const auto& l : links) b(l.row) += l.weight * g[l.fixed_cell];
    return b;
  }
};

inline GridFunction space_lattice(const std::vector<double>& lo, const std::vector<double>& hi,
                                  const std::vector<int>& n) {
  if (lo.empty() || lo.size() > 3) throw DimensionError("diffusion solvers support 1 to 3 space dimensions");
  return GridFunction(std::vector<Axis>(lo.size(), Axis::x), lo, hi, n);
}

// diag(c, a) returns A_aa at cell centre c.
template <class Diag>
DiffusionSystem assemble_diffusion(const GridFunction& lattice, Boundary bc, FaceAverage avg, Diag&& diag) {
  const int d = lattice.rank();
  DiffusionSystem S;
  S.lattice = lattice;
  S.bc = bc;
  const std::size_t N = lattice.size();
  for (int a = 0; a < d; ++a)
    if (lattice.counts[a] < 3) throw DomainError("need at least 3 cells per axis");
  S.unknown.assign(N, -1);
  int idx[3], nb[3];
  for (std::size_t f = 0; f < N; ++f) {
    lattice.unravel(f, idx);
    bool fixed = false;
    if (bc == Boundary::dirichlet)
      for (int a = 0; a < d; ++a)
        if (idx[a] == 0 || idx[a] == lattice.counts[a] - 1) fixed = true;
    if (!fixed) {
      S.unknown[f] = static_cast<long>(S.cell.size());
      S.cell.push_back(f);
    }
  }
  // Diagonal entries A_aa at every cell centre.
  std::vector<double> A(N * d);
  double c[3];
  for (std::size_t f = 0; f < N; ++f) {
    lattice.coords(f, c);
    for (int a = 0; a < d; ++a) A[f * d + a] = diag(c, a);
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(S.size() * (2 * d + 1));
  for (std::size_t u = 0; u < S.size(); ++u) {
    const std::size_t f = S.cell[u];
    lattice.unravel(f, idx);
    double diag_sum = 0;
    for (int a = 0; a < d; ++a) {
      const double h = lattice.spacing(a);
      for (int s : {-1, 1}) {
        std::copy(idx, idx + d, nb);
        nb[a] += s;
        if (nb[a] < 0 || nb[a] >= lattice.counts[a]) {
          if (bc != Boundary::periodic) continue;  // unreachable for interior unknowns
          nb[a] = (nb[a] + lattice.counts[a]) % lattice.counts[a];
        }
        const std::size_t g = lattice.index(nb);
        const double w = face_mean(A[f * d + a], A[g * d + a], avg) / (h * h);
        diag_sum += w;
        if (S.unknown[g] >= 0)
          trip.emplace_back(static_cast<int>(u), static_cast<int>(S.unknown[g]), -w);
        else
          S.links.push_back({static_cast<long>(u), g, w});
      }
    }
    trip.emplace_back(static_cast<int>(u), static_cast<int>(u), diag_sum);
  }
  S.K.resize(static_cast<long>(S.size()), static_cast<long>(S.size()));
  S.K.setFromTriplets(trip.begin(), trip.end());
  return S;
}

// ---------------------------------------------------------------- elliptic

struct EllipticProblem {
  std::vector<double> lo{0, 0}, hi{1, 1};
  std::vector<int> n{64, 64};
  CoefficientField A;
  Profile boundary;  // Dirichlet trace; zero when empty
  Profile source;    // S; zero when empty
  FaceAverage average = FaceAverage::arithmetic;
  double tol = 1e-10;
  int max_iter = 20000;
  Preconditioner preconditioner = Preconditioner::incomplete_cholesky;
};

struct EllipticSolution {
  GridFunction u;
  SolveInfo solve;
  DiffusionSystem system;
};

inline void check_coefficient_inputs(const CoefficientField& A, int want_in, int want_m) {
  if (A.input_dim() != want_in || A.matrix_dim() != want_m)
    throw DimensionError("coefficient field has the wrong input or matrix dimension");
}

inline EllipticSolution solve_elliptic(const EllipticProblem& P) {
  const GridFunction lat = space_lattice(P.lo, P.hi, P.n);
  const int d = lat.rank();
  check_coefficient_inputs(P.A, d, d);
  EllipticSolution sol;
  sol.system = assemble_diffusion(lat, Boundary::dirichlet, P.average,
                                  [&](const double* c, int a) { return P.A(c)(a, a); });
  const DiffusionSystem& S = sol.system;
  sol.u = lat.like();
  double c[3];
  for (std::size_t f = 0; f < lat.size(); ++f)
    if (S.unknown[f] < 0) {
      lat.coords(f, c);
      sol.u.values[f] = P.boundary ? P.boundary(c) : 0.0;
    }
  Vector b = S.boundary_rhs(sol.u.values);
  if (P.source)
    for (std::size_t u = 0; u < S.size(); ++u) {
      lat.coords(S.cell[u], c);
      b(static_cast<long>(u)) += P.source(c);
    }
  Vector x = Vector::Zero(static_cast<long>(S.size()));
  sol.solve = pcg(S.K, b, x, P.tol, P.max_iter, P.preconditioner);
  for (std::size_t u = 0; u < S.size(); ++u) sol.u.values[S.cell[u]] = x(static_cast<long>(u));
  return sol;
}

// Discrete operator applied to a full-lattice array (fixed cells act as data):
// returns (K u_int - links · u_fixed) on unknowns, i.e. -div(A ∇u) per unit volume.
inline Vector apply_operator(const DiffusionSystem& S, const std::vector<double>& u) {
  Vector x(static_cast<long>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) x(static_cast<long>(k)) = u[S.cell[k]];
  Vector y = S.K * x;
  for (const auto& l : S.links) y(l.row) -= l.weight * u[l.fixed_cell];
  return y;
}

// --------------------------------------------------------------- parabolic

struct ParabolicProblem {
  std::vector<double> lo{0}, hi{1};
  std::vector<int> n{64};
  double t0 = 0, T = 1;
  int steps = 100;
  int save_every = 1;
  // Inputs x (time independent) or (t, x).
  CoefficientField A;
  Boundary bc = Boundary::dirichlet;
  TimeProfile boundary;  // Dirichlet data g(t, x); zero when empty
  Profile initial;       // u(t0, x); zero when empty
  TimeProfile source;    // S(t, x); zero when empty
  FaceAverage average = FaceAverage::arithmetic;
  double tol = 1e-10;
  int max_iter = 20000;
};

struct ParabolicSolution {
  GridFunction u;               // roles (t, x...); t cell centres are the saved times
  std::vector<double> times;    // saved times
  std::vector<double> energy;   // ∫ u² dx at saved times
  int total_iterations = 0;
  double max_relative_residual = 0;
};

inline ParabolicSolution solve_parabolic(const ParabolicProblem& P) {
  const GridFunction lat = space_lattice(P.lo, P.hi, P.n);
  const int d = lat.rank();
  if (P.steps < 1 || P.save_every < 1 || P.steps % P.save_every != 0)
    throw DomainError("steps must be a positive multiple of save_every");
  if (!(P.T > P.t0)) throw DomainError("need T > t0");
  const bool timed = P.A.input_dim() == d + 1;
  if (!timed) check_coefficient_inputs(P.A, d, d);
  if (P.A.matrix_dim() != d) throw DimensionError("coefficient matrix dimension must equal d");
  const double dt = (P.T - P.t0) / P.steps;
  const int nsave = P.steps / P.save_every;
  const double dts = dt * P.save_every;
  std::vector<Axis> roles{Axis::t};
  std::vector<double> lo{P.t0 - dts / 2}, hi{P.t0 + nsave * dts + dts / 2};
  std::vector<int> cnt{nsave + 1};
  for (int a = 0; a < d; ++a) {
    roles.push_back(Axis::x);
    lo.push_back(P.lo[a]);
    hi.push_back(P.hi[a]);
    cnt.push_back(P.n[a]);
  }
  ParabolicSolution sol;
  sol.u = GridFunction(roles, lo, hi, cnt);
  const std::size_t N = lat.size();
  std::vector<double> u(N), g(N);
  double c[3], y[4];
  for (std::size_t f = 0; f < N; ++f) {
    lat.coords(f, c);
    u[f] = P.initial ? P.initial(c) : 0.0;
  }
  auto store = [&](int k, double t) {
    std::copy(u.begin(), u.end(), sol.u.values.begin() + static_cast<long>(k * N));
    double e = 0;
    for (double w : u) e += w * w;
    sol.times.push_back(t);
    sol.energy.push_back(e * lat.cell_volume());
  };
  store(0, P.t0);
  auto assemble = [&](double t) {
    return assemble_diffusion(lat, P.bc, P.average, [&](const double* cc, int a) {
      if (!timed) return P.A(cc)(a, a);
      y[0] = t;
      std::copy(cc, cc + d, y + 1);
      return P.A(y)(a, a);
    });
  };
  DiffusionSystem S = assemble(P.t0 + dt);
  SpMat M(static_cast<long>(S.size()), static_cast<long>(S.size()));
  M.setIdentity();
  M *= 1.0 / dt;
  SpMat K = S.K + M;
  Vector x(static_cast<long>(S.size()));
  for (int step = 1; step <= P.steps; ++step) {
    const double t = P.t0 + step * dt;
    if (timed && step > 1) {
      S = assemble(t);
      K = S.K + M;
    }
    for (std::size_t f = 0; f < N; ++f) {
      if (S.unknown[f] >= 0) continue;
      lat.coords(f, c);
      g[f] = P.boundary ? P.boundary(t, c) : 0.0;
    }
    Vector b = S.boundary_rhs(g);
    for (std::size_t k = 0; k < S.size(); ++k) {
      const std::size_t f = S.cell[k];
      double rhs = u[f] / dt;
      if (P.source) {
        lat.coords(f, c);
        rhs += P.source(t, c);
      }
      b(static_cast<long>(k)) += rhs;
      x(static_cast<long>(k)) = u[f];
    }
    const SolveInfo info = pcg(K, b, x, P.tol, P.max_iter);
    sol.total_iterations += info.iterations;
    sol.max_relative_residual = std::max(sol.max_relative_residual, info.relative_residual);
    for (std::size_t f = 0; f < N; ++f)
      if (S.unknown[f] < 0) u[f] = g[f];
    for (std::size_t k = 0; k < S.size(); ++k) u[S.cell[k]] = x(static_cast<long>(k));
    if (step % P.save_every == 0) store(step / P.save_every, t);
  }
  return sol;
}

}  // namespace kinlab
