#pragma once

#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/env.hpp"
#include "hpwmsn/radio.hpp"

namespace hpwmsn {

// Transmission power allocation: approximately maximize
//   sum_{(n,b)} W*_nb C~_nb(p) + A_n p_nb   s.t.  sum_b p_nb <= P_n^max, p >= 0
// by cyclic per-node block coordinate descent. Each block runs a projected
// gradient refinement (gradient taken in the log-power domain, where the
// unclamped problem is concave) from a few deterministic starting points;
// candidates are scored with the exact clamped objective, so the sweep
// objective never decreases.
struct PowerResult {
  std::vector<double> power;  // per link, linear units
  double objective = 0.0;
  int sweeps = 0;
  bool converged = false;
};

struct PowerProblem {
  const NetworkConfig* cfg;
  const RadioTables* tables;
  const EnvironmentState* env;
  std::vector<double> weight;  // W*_nb per link, >= 0
  std::vector<double> a_coef;  // A_n per node, <= 0 for contributing nodes

  double objective(const std::vector<double>& power) const;
};

PowerResult solve_power_allocation(const PowerProblem& prob,
                                   const std::vector<double>& warm_start,
                                   int max_sweeps, double improve_tol, int pg_iters,
                                   bool multi_start = true);

}  // namespace hpwmsn
