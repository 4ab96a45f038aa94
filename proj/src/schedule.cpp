#include "hpwmsn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hpwmsn {

ScheduleDecision schedule(const NetworkConfig& cfg, const LyapunovParams& params,
                          const std::vector<double>& capacity,
                          const DataQueueBank& data, const std::vector<double>& a_coef) {
  ScheduleDecision out;
  out.chosen_session.assign(cfg.num_links(), -1);
  out.phys_flow.assign(cfg.num_links(), 0.0);
  out.info_flow.assign(cfg.num_links() * cfg.num_commodities(), 0.0);

  for (const auto& l : cfg.links) {
    double best_w = 0.0;
    int best_f = -1;
    for (const auto& s : cfg.sessions) {
      double w = link_weights(cfg, params, l.id, s.id, data, a_coef).w_clamped;
      if (w > best_w) {  // strict: ties keep the smaller session id
        best_w = w;
        best_f = s.id;
      }
    }
    if (best_f < 0 || best_w <= 0.0 || capacity[l.id] <= 0.0) continue;

    out.chosen_session[l.id] = best_f;
    out.phys_flow[l.id] = capacity[l.id];
    const auto& s = cfg.sessions[best_f];
    const int first = cfg.commodity_offset[best_f];
    const int count = static_cast<int>(s.sources.size() * s.sinks.size());
    for (int c = first; c < first + count; ++c) {
      double gate = data.at(cfg, c, l.from) - data.at(cfg, c, l.to) +
                    a_coef[l.to] * cfg.nodes[l.to].p_recv_cost - params.epsilon;
      if (gate > 0.0) {
        out.info_flow[l.id * cfg.num_commodities() + c] = capacity[l.id];
      }
    }
  }
  return out;
}

std::vector<std::string> coding_consistency_check(const NetworkConfig& cfg,
                                                  const ControlDecision& d) {
  std::vector<std::string> out;
  for (const auto& l : cfg.links) {
    for (int c = 0; c < cfg.num_commodities(); ++c) {
      double info = d.info(cfg, l.id, c);
      if (info > d.phys_flow[l.id] + 1e-9) {
        std::ostringstream os;
        os << "link " << cfg.nodes[l.from].name << "->" << cfg.nodes[l.to].name
           << ": information rate " << info << " exceeds physical rate " << d.phys_flow[l.id]
           << " for commodity " << c;
        out.push_back(os.str());
      }
    }
    // One session per link: any nonzero info flow must belong to the chosen
    // session.
    for (int c = 0; c < cfg.num_commodities(); ++c) {
      if (d.info(cfg, l.id, c) > 0 &&
          cfg.commodities[c].session != d.chosen_session[l.id]) {
        std::ostringstream os;
        os << "link " << cfg.nodes[l.from].name << "->" << cfg.nodes[l.to].name
           << ": commodity " << c << " flows outside the scheduled session";
        out.push_back(os.str());
      }
    }
  }
  return out;
}

}  // namespace hpwmsn
