#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/dual.hpp"
#include "hpwmsn/env.hpp"
#include "hpwmsn/lyapunov.hpp"
#include "hpwmsn/queues.hpp"
#include "hpwmsn/radio.hpp"

namespace hpwmsn {

struct SimError : std::runtime_error {
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Everything observable about one slot: state at slot start, the committed
// decision, the duals it was computed at, and solver diagnostics.
struct SlotTrace {
  long slot = 0;
  EnvironmentState env;
  ControlDecision decision;
  DataQueueBank data;      // Q(t), before the update
  EnergyQueueBank energy;  // E(t), before the update
  DualState dual;
  double objective = 0.0;  // O(t)
  int dual_iters = 0;
  int bcd_sweeps = 0;
  bool power_converged = true;
  std::vector<Violation> violations;  // expected empty
};

struct RunSummary {
  double v = 0.0;
  long slots = 0;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.0;

  double avg_objective = 0.0;
  double avg_objective_postwarmup = 0.0;
  double avg_total_backlog = 0.0;            // time-average of sum_q Q
  double avg_total_backlog_postwarmup = 0.0;
  double max_data_queue = 0.0;
  double max_energy_eh = 0.0, max_energy_eg = 0.0, max_energy_em = 0.0;
  double total_utility = 0.0;
  double total_grid_cost = 0.0;
  std::vector<double> delivered;  // per commodity, bits
  long availability_violations = 0;
  long bound_violations = 0;
  long lemma1_violations = 0;
  long defensive_clamps = 0;
};

struct RunOptions {
  double warmup_fraction = 0.1;
  bool tolerate = false;       // log violations instead of aborting
  bool check_bounds = true;    // Theorem 2 / Lemma 1 runtime assertions
  // Called after each slot with the full slot trace.
  std::function<void(const SlotTrace&)> on_slot;
};

// Runs Algorithm 1 for the given horizon: per slot, observe Z(t), run the
// dual-decomposed subproblem stack to chi*(t), commit, update queues, and
// assert the theorem bounds.
RunSummary run(const NetworkConfig& cfg, double v, long slots, std::uint64_t seed,
               const RunOptions& opts = {});

struct SweepPoint {
  double v;
  std::uint64_t seed;
};

// Independent runs, parallelized across hardware threads; summaries are
// returned in the order of the input points.
std::vector<RunSummary> sweep(const NetworkConfig& cfg, const std::vector<SweepPoint>& points,
                              long slots, const RunOptions& opts = {}, int threads = 0);

// One dual-decomposition pass: solves subproblems (energy, distortion, rate,
// power, scheduling) at fixed multipliers. Exposed for tests and oracles.
struct SlotSolveContext {
  const NetworkConfig* cfg;
  const RadioTables* tables;
  const LyapunovParams* params;
  const EnvironmentState* env;
  const DataQueueBank* data;
  const EnergyQueueBank* energy;
};

struct SlotSolveResult {
  ControlDecision decision;
  std::vector<double> a_coef;
  std::vector<double> weight;    // W* per link
  std::vector<double> capacity;  // C~ per link at the solved powers
  double power_objective = 0.0;
  int bcd_sweeps = 0;
  bool power_converged = true;
};

SlotSolveResult solve_slot(const SlotSolveContext& ctx, const DualState& dual,
                           const std::vector<double>& power_warm, bool multi_start);

}  // namespace hpwmsn
