#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

namespace kinlab::lab {

// ---------------------------------------------------------------- schemas
// Caps keep every run at desk scale (minutes on one core).

inline Schema geometry_schema(GeometryParams& P) {
  Schema s("verify-geometry");
  s.seed(P.seed);
  s.integer("samples", P.samples, 0, 1000000, "random pairs/triples per property suite (0: vacuous pass)");
  s.real("tol", P.tol, 0, 1e6, "distance solver tolerance (bracket gap)", true);
  s.real("optimality_band", P.optimality_band, 0, 1, "accepted deviation of the two optimality instances", true);
  s.integers("dims", P.dims, 1, 3, 1, 3, "dimensions cycled over the samples");
  return s;
}

inline Schema kernel_schema(KernelParams& P) {
  Schema s("verify-kernel");
  s.seed(P.seed);
  s.integer("d", P.d, 1, 2, "dimension; residual/adjoint/Young/weak-Lp run for d = 1 only");
  s.real("mass_L", P.mass_L, 1, 20, "half-width of the mass quadrature box", true);
  s.integer("mass_n", P.mass_n, 0, 4000, "mass quadrature cells per axis (0: 400 for d = 1, 64 for d = 2; d = 2 capped at 128)");
  s.real("mass_tol", P.mass_tol, 0, 1, "mass tolerance (0: 1e-8 for d = 1, 1e-4 for d = 2)");
  s.integers("residual_meshes", P.residual_meshes, 8, 256, 2, 5, "nested meshes for the residual order fit");
  s.real("residual_order", P.residual_order, 0, 10, "required fitted order");
  s.integers("adjoint_coarse", P.adjoint_coarse, 2, 96, 3, 3, "[time nodes, space nodes per axis, extent] of the coarse quadrature");
  s.integers("adjoint_fine", P.adjoint_fine, 2, 96, 3, 3, "same for the fine quadrature");
  s.integer("adjoint_targets", P.adjoint_targets, 1, 50, "target points for the adjoint identity");
  s.real("adjoint_threshold", P.adjoint_threshold, 0, 1, "fine relative error must fall below this", true);
  s.integer("young_pairs", P.young_pairs, 0, 20, "random (f, g) pairs for the Young inequality");
  s.integers("weak_resolutions", P.weak_resolutions, 8, 192, 2, 5, "grid resolutions for the weak-Lp norm of the kernel");
  s.real("weak_stability", P.weak_stability, 0, 1, "allowed relative change of the weak norm between resolutions", true);
  return s;
}

inline Schema covering_schema(CoveringParams& P) {
  Schema s("covering");
  s.seed(P.seed);
  s.integer("vitali_families", P.vitali_families, 0, 200, "random families of 100 kinetic cylinders");
  s.integer("maximal_instances", P.maximal_instances, 0, 500, "random g for the maximal inequality (alternating geometry)");
  s.integer("interval_families", P.interval_families, 0, 100000, "random dyadic interval families");
  s.integers("interval_m", P.interval_m, 1, 64, 1, 8, "stacking multiplicities cycled over the families");
  s.integer("ink_instances", P.ink_instances, 0, 1000, "random ink-spots instances (alternating geometry, m in {1, 2})");
  return s;
}

inline Schema holder_schema(HolderParams& P) {
  Schema s("holder-scan");
  s.seed(P.seed);
  s.choices("kinds", P.kinds, {"identity", "checkerboard", "random", "rotating"}, "coefficient families of the ensemble");
  s.reals("ratios", P.ratios, 0, 1, 0, 8, "ellipticity ratios lambda/Lambda (Lambda = 1)", true);
  s.integer("instances", P.instances, 0, 50, "instances per (kind, ratio)");
  s.integer("n", P.n, 16, 512, "grid cells per axis on the unit square");
  s.boolean("refine", P.refine, "also solve at 2n and compare exponents");
  s.integer("tiles", P.tiles, 1, 64, "tiles per axis of piecewise-constant coefficients");
  s.choice("boundary", P.boundary, {"mixed", "constant"}, "mixed: g = x + sin(3y)/2, f = 1; constant: g = 1, f = 0");
  s.real("r0", P.r0, 0, 0.5, "largest ball radius", true);
  s.integer("k_max", P.k_max, 1, 10, "radii r0 2^-k, k = 0..k_max");
  s.integer("fit_k_max", P.fit_k_max, -1, 10, "largest k used in the fit (-1: all)");
  s.integer("drop_largest", P.drop_largest, 0, 5, "largest radii excluded from the fit");
  s.real("stability", P.stability, 0, 1, "allowed relative change of alpha between n and 2n", true);
  s.boolean("smooth", P.smooth, "run the smooth reference case");
  s.choice("smooth_kind", P.smooth_kind, {"identity", "rotating"}, "coefficients of the smooth case");
  s.integer("smooth_n", P.smooth_n, 32, 1024, "grid of the smooth case");
  s.real("smooth_r0", P.smooth_r0, 0, 0.5, "largest radius of the smooth case", true);
  s.integer("smooth_fit_k_max", P.smooth_fit_k_max, 1, 10, "largest k in the smooth fit");
  s.reals("smooth_window", P.smooth_window, 0, 10, 2, 2, "accepted alpha interval of the smooth case");
  return s;
}

inline Schema harnack_schema(HarnackParams& P) {
  Schema s("harnack");
  s.seed(P.seed);
  s.integer("instances", P.instances, 0, 200, "rough-coefficient Harnack instances");
  s.integer("n_coarse", P.n_coarse, 8, 256, "coarse cells per phase axis");
  s.integer("n_fine", P.n_fine, 8, 256, "fine cells per phase axis");
  s.real("ratio", P.ratio, 0, 1, "ellipticity ratio lambda/Lambda (1: identity)", true);
  s.integer("tiles", P.tiles, 1, 64, "coefficient tiles per axis");
  s.choice("initial", P.initial, {"bump", "constant", "kernel", "signed"}, "initial datum at t0");
  s.real("omega", P.omega, 0, 1, "cylinder radius omega", true);
  s.real("R0", P.R0, 0, 10, "radius of the positivity cylinder", true);
  s.real("x_half", P.x_half, 0.5, 20, "x box is [-x_half, x_half] (periodic)");
  s.real("v_max", P.v_max, 0.5, 20, "v box is [-v_max, v_max] (periodic)");
  s.real("t0", P.t0, -10, -1, "initial time (solution saved on [t0, 0])", true);
  s.integer("steps_per_unit", P.steps_per_unit, 8, 1024, "time steps per unit time at n_fine");
  s.real("stability", P.stability, 0, 1, "allowed relative change of the quotient, coarse vs fine", true);
  s.integer("expansion_instances", P.expansion_instances, 0, 200, "expansion-of-positivity instances");
  s.real("eta0", P.eta0, 0, 1, "time gap eta0", true);
  s.integer("expansion_n", P.expansion_n, 16, 256, "cells per phase axis of the expansion runs");
  s.real("expansion_x_half", P.expansion_x_half, 1, 20, "x half-width of the expansion runs");
  s.real("source_eps", P.source_eps, 0, 1, "source bound epsilon (instances above it are excluded)");
  return s;
}

// ---------------------------------------------------------------- commands

struct Command {
  std::string name;
  std::string summary;
  std::function<RunReport(const json& cfg, unsigned jobs)> run;
  std::function<std::vector<Field>()> fields;  // defaults for documentation
};

template <class P>
Command make_command(std::string name, std::string summary, Schema (*schema)(P&), SuiteResult (*run)(const P&, unsigned),
                     std::function<void(const P&)> validate) {
  Command c;
  c.name = name;
  c.summary = std::move(summary);
  c.run = [name, schema, run, validate](const json& cfg, unsigned jobs) {
    P p;
    const json resolved = schema(p).apply(cfg);
    validate(p);
    RunReport r;
    r.command = name;
    r.config = resolved;
    r.hash = config_hash(resolved);
    r.seed = p.seed;
    const auto t0 = std::chrono::steady_clock::now();
    r.result = run(p, jobs);
    r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  c.fields = [schema] {
    auto p = std::make_shared<P>();
    auto fs = schema(*p).fields();
    // Bind defaults now; the getters reference *p.
    for (auto& f : fs) {
      const json v = f.get();
      f.get = [v] { return v; };
    }
    return fs;
  };
  return c;
}

inline const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      make_command<GeometryParams>("verify-geometry", "group axioms, distance bounds, triangle, optimality, membership scaling",
                                   geometry_schema, geometry_suite, [](const GeometryParams&) {}),
      make_command<KernelParams>("verify-kernel", "kernel mass, residual order, adjoint identity, Young, weak Lp", kernel_schema,
                                 kernel_suite, [](const KernelParams& p) {
                                   if (p.d == 2 && p.mass_n > 128) throw ConfigError("mass_n is capped at 128 for d = 2");
                                   for (std::size_t i = 1; i < p.residual_meshes.size(); ++i)
                                     if (p.residual_meshes[i] <= p.residual_meshes[i - 1])
                                       throw ConfigError("residual_meshes must increase");
                                 }),
      make_command<HolderParams>("holder-scan", "rough elliptic ensemble, oscillation profiles, fitted exponents", holder_schema,
                                 holder_scan, [](const HolderParams& p) {
                                   if (p.fit_k_max > p.k_max) throw ConfigError("fit_k_max exceeds k_max");
                                   if (p.smooth_window[0] >= p.smooth_window[1]) throw ConfigError("smooth_window must be increasing");
                                   if (p.refine && p.n > 256) throw ConfigError("n is capped at 256 when refine is on");
                                 }),
      make_command<HarnackParams>("harnack", "Harnack quotients over a rough kinetic ensemble, expansion of positivity",
                                  harnack_schema, harnack_experiment, [](const HarnackParams& p) {
                                    if (p.n_coarse > p.n_fine) throw ConfigError("n_coarse exceeds n_fine");
                                    if (p.t0 > -1 - p.omega * p.omega) throw ConfigError("t0 must lie below the past cylinder");
                                  }),
      make_command<CoveringParams>("covering", "Vitali, maximal inequality, interval stacking, ink spots", covering_schema,
                                   covering_suite, [](const CoveringParams&) {}),
  };
  return list;
}

inline const Command& find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace kinlab::lab
