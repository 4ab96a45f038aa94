#pragma once

#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/queues.hpp"

namespace hpwmsn {

// Lagrange multipliers: lambda_n >= 0 for grid-connected nodes (energy
// supply relaxation) and rho_m^f >= 0 per session and nonempty source
// subset (rate-distortion region).
struct DualState {
  std::vector<double> lambda;           // per node; 0 and unused off N_G u N_M
  std::vector<std::vector<double>> rho; // per session, size 2^k - 1 (mask-1 indexing)

  static DualState zeros(const NetworkConfig& cfg) {
    DualState d;
    d.lambda.assign(cfg.num_nodes(), 0.0);
    d.rho.resize(cfg.num_sessions());
    for (const auto& s : cfg.sessions) d.rho[s.id].assign(s.num_subsets(), 0.0);
    return d;
  }

  // sum_{m : n in subset_m} rho_m^f for the source at position src_idx.
  double rho_sum(const NetworkConfig& cfg, SessionId f, int src_idx) const {
    double acc = 0.0;
    const auto& r = rho[f];
    for (int mask = 1; mask <= cfg.sessions[f].num_subsets(); ++mask) {
      if (mask & (1 << src_idx)) acc += r[mask - 1];
    }
    return acc;
  }
};

// Analytic dual gradients; exact partial derivatives of the Lagrangian.
//   d L / d lambda_n = g_n - d_n + p_n^Total - y_n
//   d L / d rho_m^f  = H(S_m | comp) - sum_{n in S_m} r_n
//                      - log2((2 pi e)^|S_m| prod_{n in S_m} D_n)
double lambda_gradient(const NetworkConfig& cfg, NodeId n, const ControlDecision& d);
double rho_gradient(const NetworkConfig& cfg, SessionId f, int subset_mask,
                    const ControlDecision& d);

// One projected gradient-ascent step with step sizes kappa.
DualState dual_update(const NetworkConfig& cfg, const DualState& dual,
                      const ControlDecision& decision, double kappa_lambda,
                      double kappa_rho);

}  // namespace hpwmsn
