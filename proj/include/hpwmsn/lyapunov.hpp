#pragma once

#include <functional>
#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/queues.hpp"

namespace hpwmsn {

// Derived constants of the drift-plus-penalty machinery.
struct LyapunovParams {
  double v = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;  // l_max X_max + R_max
  double delta = 0.0;
  double b_const = 0.0;            // drift bound constant B
  std::vector<double> theta;       // perturbation per node (0 for class None)
  std::vector<double> p_total_max; // P^Total_{n,max} per node

  // Theorem bounds derived from the above.
  double q_bound() const { return beta * v; }  // + R_max added by callers
};

struct DualState;  // defined in dual.hpp

// beta = varpi1 * sup_{D in [D_min, D_max]} (U(D) - U(D_max)) / (log2 D_max - log2 D).
// Dense grid plus the endpoint limit -U'(D_max) D_max ln 2. The utility and
// the denominator use the same log base, which makes the ratio base-free.
double compute_beta(const SessionSpec& session, const Utility& utility, double varpi1);
double compute_beta_fn(double d_min, double d_max, double varpi1,
                       const std::function<double(double)>& u,
                       const std::function<double(double)>& u_prime);

// Endpoint limit alone (the L'Hopital value at D -> D_max).
double beta_endpoint_limit(const SessionSpec& session, const Utility& utility, double varpi1);

// sigma = min{ min_f P_S, min_n P_R, 1 }; must be positive.
double compute_sigma(const NetworkConfig& cfg);

// epsilon = l_max X_max + R_max.
double compute_epsilon(const NetworkConfig& cfg);

// Drift bound B = sum over queues of B_Q + per-class energy terms.
double compute_b_const(const NetworkConfig& cfg);

// Full parameter bundle for a given V, honoring any theta override.
LyapunovParams compute_perturbations(const NetworkConfig& cfg, double v);

// A_n = 1{n in N_H}(E^H - theta^{eH}) - 1{n in N_G u N_M} lambda_n.
double compute_A(const NetworkConfig& cfg, const LyapunovParams& params, NodeId n,
                 const EnergyQueueBank& energy, const std::vector<double>& lambda);

// Link weights for session f over one link:
//   w = sum_{s,d}(Q_n - Q_b) + A_b P_R(b),  W = [w - N_s^f N_d^f epsilon]^+.
struct LinkWeight {
  double w = 0.0;
  double w_clamped = 0.0;  // W
};
LinkWeight link_weights(const NetworkConfig& cfg, const LyapunovParams& params, LinkId link,
                        SessionId f, const DataQueueBank& data,
                        const std::vector<double>& a_coef);

}  // namespace hpwmsn
