#pragma once

#include <string>
#include <vector>

#include "hpwmsn/config.hpp"
#include "hpwmsn/lyapunov.hpp"
#include "hpwmsn/queues.hpp"

namespace hpwmsn {

// Max-weight session selection and flow assignment for one link. The chosen
// session gets the full link capacity as physical (coded) rate; each of its
// (source, sink) pairs rides at that rate iff the per-pair backpressure gate
//   Q_n - Q_b + A_b P_R(b) - epsilon > 0
// passes. Argmax ties resolve to the smallest session id.
struct ScheduleDecision {
  std::vector<int> chosen_session;  // per link, -1 when idle
  std::vector<double> phys_flow;    // per link
  std::vector<double> info_flow;    // [link * num_commodities + commodity]
};

ScheduleDecision schedule(const NetworkConfig& cfg, const LyapunovParams& params,
                          const std::vector<double>& capacity,
                          const DataQueueBank& data, const std::vector<double>& a_coef);

// Network-coding consistency: x~ <= x for every tuple.
std::vector<std::string> coding_consistency_check(const NetworkConfig& cfg,
                                                  const ControlDecision& d);

}  // namespace hpwmsn
