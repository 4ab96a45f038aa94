#pragma once

#include <string>
#include <vector>

#include "hpwmsn/dual.hpp"
#include "hpwmsn/env.hpp"
#include "hpwmsn/lyapunov.hpp"
#include "hpwmsn/queues.hpp"
#include "hpwmsn/sim.hpp"
#include "hpwmsn/trace_io.hpp"

namespace hpwmsn::verify {

// Brute-force oracles and theorem checkers. Oracle code re-derives every
// objective from the printed formulas and shares no solver routines with
// the implementation it checks.

struct OracleReport {
  std::string instance;
  double solver_value = 0.0;
  double oracle_value = 0.0;
  double gap = 0.0;  // |solver - oracle|
  bool pass = false;
};

enum class SubproblemKind {
  EhHarvest,
  MeHarvestCharge,
  MeDischargePurchase,
  Eg,
  Distortion,
  SourceRate,
  Power1Link,
  Power2Link,
};

// Draws a random instance of the given kind, solves it with the production
// solver, grid-searches the same objective independently, and compares
// objective values at the stated resolution.
OracleReport grid_oracle_subproblem(SubproblemKind kind, Rng& rng, double resolution,
                                    double tolerance);

// Scans a recorded trace for Theorem 2 bound violations: data queues vs
// beta V + R_max, energy queues vs their class caps, and the in-run
// availability counter.
std::vector<std::string> check_theorem2_bounds(const NetworkConfig& cfg,
                                               const LyapunovParams& params,
                                               const TraceTable& trace);

// Dual-variable bounds: lambda_n <= beta V / sigma and the per-source rho
// sums <= beta V, with slack 1e-3 beta V for finite-iteration effects.
std::vector<std::string> check_lemma1(const NetworkConfig& cfg, const LyapunovParams& params,
                                      const TraceTable& trace);

// Independent evaluation of the per-slot Lagrangian (drift expression plus
// multiplier terms), used by the finite-difference gradient oracle.
double lagrangian_value(const NetworkConfig& cfg, const LyapunovParams& params,
                        const EnvironmentState& env, const DataQueueBank& data,
                        const EnergyQueueBank& energy, const ControlDecision& decision,
                        const DualState& dual);

struct GradientReport {
  double max_rel_error = 0.0;
  bool pass = false;
};

// Compares the analytic lambda/rho gradients against centered finite
// differences of the Lagrangian at step h on one random instance.
GradientReport finite_difference_gradient(const NetworkConfig& cfg,
                                          const LyapunovParams& params, Rng& rng,
                                          double h = 1e-5, double rel_tol = 1e-6);

// Samples concavity of log(gamma~) in the log-power vector: returns the
// worst (most negative) concavity slack over the given number of triples.
double concavity_slack(const NetworkConfig& cfg, Rng& rng, int triples);

// Random inputs for gradient instances: decision within boxes, queues and
// energies within Theorem 2 ranges. Exposed for tests.
struct GradientInstance {
  EnvironmentState env;
  DataQueueBank data;
  EnergyQueueBank energy;
  ControlDecision decision;
  DualState dual;
};
GradientInstance random_gradient_instance(const NetworkConfig& cfg,
                                          const LyapunovParams& params, Rng& rng);

}  // namespace hpwmsn::verify
