#pragma once

#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/env.hpp"

namespace hpwmsn {

// Random-access success probability
//   alpha_nb = q_nb * prod_{a in I(n)} (1 - q_an) * (1 - sum_{c in O(b)} q_bc)
double success_probability(const NetworkConfig& cfg, LinkId link);

// Precomputed static radio tables for one config: alpha per link and, per
// link, the interference contributions of other links' powers.
struct RadioTables {
  struct InterfererTerm {
    LinkId link;   // interfering link (a, m)
    double coef;   // S_{a,b} * q_am, multiplies p_am in the SINR denominator
  };
  std::vector<double> alpha;                             // per link
  std::vector<std::vector<InterfererTerm>> interference;  // per link
  // Transpose: for each link j, the links whose SINR j's power degrades.
  std::vector<std::vector<InterfererTerm>> affects;  // term.link = affected, coef as above

  static RadioTables build(const NetworkConfig& cfg);
};

// SINR of one link under the log-transformed power vector (natural log;
// -inf encodes zero power):
//   gamma~ = S_nb e^{p^_nb} / (N_nb + sum_{(a,m)} S_ab e^{p^_am} q_am)
double sinr(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
            const std::vector<double>& log_powers, const EnvironmentState& env);

// Same in the linear power domain (powers >= 0).
double sinr_linear(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                   const std::vector<double>& powers, const EnvironmentState& env);

// Link capacity C~ = clamp(BW * alpha * log2(gamma~), 0, X_max).
// The lower clamp drops the meaningless negative range (gamma~ <= 1) and the
// upper clamp realizes the finite rate bound X_max.
double link_capacity(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                     const std::vector<double>& log_powers, const EnvironmentState& env);
double link_capacity_linear(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                            const std::vector<double>& powers, const EnvironmentState& env);

// Conditional entropy lookup H(subset | sources - subset), bits.
double conditional_entropy(const SessionSpec& session, int subset_mask);

}  // namespace hpwmsn
