#include "hpwmsn/dual.hpp"

#include <algorithm>
#include <cmath>

namespace hpwmsn {

double lambda_gradient(const NetworkConfig& cfg, NodeId n, const ControlDecision& d) {
  return d.charge[n] - d.discharge[n] + total_energy_consumption(cfg, n, d) -
         d.grid_draw[n];
}

double rho_gradient(const NetworkConfig& cfg, SessionId f, int subset_mask,
                    const ControlDecision& d) {
  const SessionSpec& s = cfg.sessions[f];
  const double log2_2pie = std::log2(2.0 * M_PI * std::exp(1.0));
  double grad = s.entropy(subset_mask);
  for (size_t i = 0; i < s.sources.size(); ++i) {
    if (subset_mask & (1 << i)) {
      int slot = cfg.source_slot_index(f, static_cast<int>(i));
      grad -= d.rate[slot];
      grad -= log2_2pie + std::log2(d.distortion[slot]);
    }
  }
  return grad;
}

DualState dual_update(const NetworkConfig& cfg, const DualState& dual,
                      const ControlDecision& decision, double kappa_lambda,
                      double kappa_rho) {
  DualState next = dual;
  for (const auto& n : cfg.nodes) {
    if (!n.grid_connected()) continue;
    double g = lambda_gradient(cfg, n.id, decision);
    next.lambda[n.id] = std::max(0.0, dual.lambda[n.id] + kappa_lambda * g);
  }
  for (const auto& s : cfg.sessions) {
    for (int mask = 1; mask <= s.num_subsets(); ++mask) {
      double g = rho_gradient(cfg, s.id, mask, decision);
      next.rho[s.id][mask - 1] = std::max(0.0, dual.rho[s.id][mask - 1] + kappa_rho * g);
    }
  }
  return next;
}

}  // namespace hpwmsn
