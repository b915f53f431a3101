// Acceptance runner: one [PASS]/[FAIL] line per criterion, exit 1 if any fails.
// A criterion also fails when it overruns its time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include "kinlab/lab/experiments.hpp"

using namespace kinlab;
using namespace kinlab::lab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.pass && dt <= budget_s;
  failures += !ok;
  std::printf("[%s] %2d %-22s %7.1fs/%gs  %s%s\n", ok ? "PASS" : "FAIL", id, name, dt, budget_s, o.detail.c_str(),
              dt > budget_s ? "  (over budget)" : "");
  std::fflush(stdout);
}

Outcome from_checks(const SuiteResult& r, std::initializer_list<const char*> names) {
  Outcome o{true, ""};
  for (const char* n : names) {
    const Check& c = r.check(n);
    o.pass = o.pass && c.pass;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + n + ":";
    for (const auto& m : c.metrics) o.detail += fmt(" %s=%.4g", m.key.c_str(), m.value);
  }
  return o;
}

}  // namespace

int main() {
  criterion(1, "kernel-mass", 5, [] {
    KernelParams p;
    SuiteResult r1, r2;
    kernel_mass(p, r1);
    p.d = 2;
    kernel_mass(p, r2);
    const auto &a = r1.check("mass"), &b = r2.check("mass");
    return Outcome{a.pass && b.pass, fmt("d=1 err=%.2e (tol 1e-8); d=2 err=%.2e (tol 1e-4)", a.metric("error"), b.metric("error"))};
  });

  criterion(2, "residual-order", 30, [] {
    SuiteResult r;
    kernel_residual(KernelParams{}, r);
    return from_checks(r, {"residual_order"});
  });

  criterion(3, "adjoint-identity", 120, [] {
    const GaussianBump phi{PhasePoint(0, {0}, {0}), 4, 4, 4, 1, 30};
    std::vector<double> e;
    for (auto q : {AdjointQuadrature{12, 8, 7}, AdjointQuadrature{24, 16, 7}, AdjointQuadrature{48, 32, 7}})
      e.push_back(adjoint_identity_check(phi, 5, q, jobs()).relative_error);
    return Outcome{e[1] < e[0] && e[2] < e[1] && e[2] < 0.02, fmt("errors %.3e > %.3e > %.3e, final < 0.02", e[0], e[1], e[2])};
  });

  criterion(4, "kinetic-distance", 60, [] {
    GeometryParams p;
    p.samples = 10000;
    p.tol = 1e-6;
    return from_checks(geometry_suite(p, jobs()), {"distance_bounds", "triangle", "optimality"});
  });

  criterion(5, "iteration-lemma", 1, [] {
    const auto conv = iterate_lemma(0.25 * (1 - 1e-6), 2, 2, 60);
    const auto div = iterate_lemma(0.275, 2, 2, 60);
    bool diverges = div.overflow || (!div.converged && div.sequence.back() > div.sequence.front());
    bool p_ok = true;
    const auto pk = iterate_lemma(0.1, 2, 2, 30);
    for (int k = 0; k <= 30; ++k) {
      double sum = 0;
      for (int i = 0; i <= k; ++i) sum += (k - i) * std::pow(2.0, i);
      p_ok = p_ok && pk.p[k] == sum && pk.p[k] <= std::pow(2.0, k + 1);
    }
    return Outcome{conv.converged && conv.steps <= 60 && diverges && p_ok,
                   fmt("threshold=%.3g, below: A_k<1e-12 at k=%d; 0.275 diverges=%d; p_k exact and bounded for k<=30: %d",
                       conv.threshold, conv.steps, diverges, p_ok)};
  });

  criterion(6, "caccioppoli", 180, [] {
    CoefficientSpec s;
    s.kind = CoefficientKind::checkerboard;
    s.lambda = 0.2;
    s.Lambda = 1;
    s.tiles = 8;
    const CoefficientField A(s, 2, {0, 0}, {1, 1});
    const auto u = holder_solve(A, 256, "mixed");
    const auto samples = random_elliptic_samples({0, 0}, {1, 1}, 200, 0.1, 0.25, 0, 1, 7);
    const auto r = caccioppoli_elliptic(u, 0.2, 1, [](const double*) { return 1.0; }, samples);
    return Outcome{r.pass() && r.slack < 0.2 && r.records.size() == 200,
                   fmt("%zu samples, worst ratio %.3g vs C_DG %.3g, slack %.3f", r.records.size(), r.worst_ratio, r.bound, r.slack)};
  });

  criterion(7, "maximal-inequality", 120, [] {
    CoveringParams p;
    p.maximal_instances = 50;
    SuiteResult r;
    covering_maximal(p, jobs(), r);
    return from_checks(r, {"maximal"});
  });

  criterion(8, "interval-stacking", 5, [] {
    CoveringParams p;
    p.interval_families = 1000;
    p.interval_m = {1, 2, 4};
    SuiteResult r;
    covering_intervals(p, r);
    return from_checks(r, {"interval_stacking"});
  });

  criterion(9, "ink-spots", 300, [] {
    CoveringParams p;
    p.ink_instances = 100;
    SuiteResult r;
    covering_ink(p, jobs(), r);
    return from_checks(r, {"ink_spots"});
  });

  criterion(10, "kernel-evolution", 300, [] {
    auto problem = [](int steps) {
      KineticProblem P;
      P.x_lo = -1.5;
      P.x_hi = 1.5;
      P.nx = 128;
      P.v_max = 4;
      P.nv = 128;
      P.t0 = 0.2;
      P.T = 0.5;
      P.steps = steps;
      P.save_every = steps;
      P.A = kinetic_field(1, 1, 0, {0.2, -1.5, -4}, {0.5, 1.5, 4});
      P.transport = Transport::spectral;
      P.theta = 0.5;
      P.initial = [](double x, double v) { return gamma(0.2, Vec{x}, Vec{v}, 1); };
      return solve_kinetic_fp(P).f;
    };
    std::vector<GridFunction> f;
    for (int steps : {32, 64, 128}) f.push_back(problem(steps));
    auto last = [](const GridFunction& g, std::size_t q) { return g.values[g.size() / 2 + q]; };
    const auto& g = f.back();
    double err = 0, d1 = 0, d2 = 0;
    for (std::size_t q = 0; q < g.size() / 2; ++q) {
      const int i = static_cast<int>(q) / g.counts[2], j = static_cast<int>(q) % g.counts[2];
      err += std::abs(last(g, q) - gamma(0.5, Vec{g.center(1, i)}, Vec{g.center(2, j)}, 1));
      d1 += std::abs(last(f[0], q) - last(f[1], q));
      d2 += std::abs(last(f[1], q) - last(f[2], q));
    }
    err *= g.spacing(1) * g.spacing(2);
    const double order = std::log2(d1 / d2);
    return Outcome{err < 0.02 && order >= 1, fmt("L1 error vs exact %.3e (< 0.02), temporal order %.3f (>= 1)", err, order)};
  });

  criterion(11, "holder-regularity", 600, [] {
    HolderParams p;  // random + checkerboard, lambda/Lambda in {0.5, 0.2}, 128 vs 256, smooth case at 512
    return from_checks(holder_scan(p, jobs()), {"smooth_alpha", "rough_alpha_positive", "rough_alpha_stable"});
  });

  criterion(12, "expansion-harnack", 900, [] {
    HarnackParams p;  // 50 instances each
    return from_checks(harnack_experiment(p, jobs()), {"expansion_positive", "harnack_finite", "harnack_stable"});
  });

  criterion(13, "young-weak-lp", 180, [] {
    KernelParams p;
    p.young_pairs = 10;
    SuiteResult r;
    kernel_young(p, jobs(), r);
    kernel_weak(p, r);
    return from_checks(r, {"young", "weak_lp"});
  });

  std::printf("%s: %d of 13 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
