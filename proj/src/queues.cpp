#include "hpwmsn/queues.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hpwmsn {

std::string Violation::describe(const NetworkConfig& cfg) const {
  std::ostringstream os;
  switch (kind) {
    case Kind::EnergyAvailabilityEH: os << "EH energy availability"; break;
    case Kind::EnergyAvailabilityEG: os << "EG energy availability"; break;
    case Kind::EnergyAvailabilityME: os << "ME energy availability"; break;
    case Kind::DataAvailability: os << "data availability"; break;
  }
  if (node >= 0) os << " at node " << cfg.nodes[node].name;
  if (commodity >= 0) {
    const auto& c = cfg.commodities[commodity];
    os << " commodity (f=" << c.session << ", s=" << cfg.nodes[c.source].name
       << ", d=" << cfg.nodes[c.sink].name << ")";
  }
  if (slot >= 0) os << " slot " << slot;
  os << " overdraw " << amount;
  return os.str();
}

double total_energy_consumption(const NetworkConfig& cfg, NodeId n,
                                const ControlDecision& d) {
  double total = 0.0;
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      if (s.sources[si] == n) {
        total += s.sense_cost * d.rate[cfg.source_slot_index(s.id, static_cast<int>(si))];
      }
    }
  }
  for (LinkId l : cfg.out_links[n]) total += d.power[l];
  double recv = 0.0;
  for (LinkId l : cfg.in_links[n]) recv += d.phys_flow[l];
  total += cfg.nodes[n].p_recv_cost * recv;
  return total;
}

double grid_draw_required(const NetworkConfig& cfg, NodeId n, const ControlDecision& d) {
  return d.charge[n] - d.discharge[n] + total_energy_consumption(cfg, n, d);
}

std::vector<Violation> availability_check(const NetworkConfig& cfg,
                                          const DataQueueBank& data,
                                          const EnergyQueueBank& energy,
                                          const ControlDecision& d, long slot) {
  std::vector<Violation> out;
  const double eps = 1e-9;
  for (const auto& n : cfg.nodes) {
    switch (n.power_class) {
      case PowerClass::EH: {
        double need = total_energy_consumption(cfg, n.id, d);
        if (energy.e[n.id] + eps < need) {
          out.push_back({Violation::Kind::EnergyAvailabilityEH, n.id, -1, slot,
                         need - energy.e[n.id]});
        }
        break;
      }
      case PowerClass::EG:
        if (energy.e[n.id] + eps < d.discharge[n.id]) {
          out.push_back({Violation::Kind::EnergyAvailabilityEG, n.id, -1, slot,
                         d.discharge[n.id] - energy.e[n.id]});
        }
        break;
      case PowerClass::ME:
        if (energy.e[n.id] + eps < d.discharge[n.id]) {
          out.push_back({Violation::Kind::EnergyAvailabilityME, n.id, -1, slot,
                         d.discharge[n.id] - energy.e[n.id]});
        }
        break;
      case PowerClass::None:
        break;
    }
  }
  for (int c = 0; c < cfg.num_commodities(); ++c) {
    for (int n = 0; n < cfg.num_nodes(); ++n) {
      double outflow = 0.0;
      for (LinkId l : cfg.out_links[n]) outflow += d.info(cfg, l, c);
      if (outflow > data.at(cfg, c, n) + eps) {
        out.push_back({Violation::Kind::DataAvailability, n, c, slot,
                       outflow - data.at(cfg, c, n)});
      }
    }
  }
  return out;
}

DataQueueBank step_data_queue(const NetworkConfig& cfg, const DataQueueBank& bank,
                              const ControlDecision& d, long slot, int* clamped_flows) {
  DataQueueBank next = bank;
  // Effective per-link information flows; the defensive clamp (ablation
  // mode) may scale a node's outflows down to its backlog.
  std::vector<double> flow = d.info_flow;
  for (int c = 0; c < cfg.num_commodities(); ++c) {
    for (int n = 0; n < cfg.num_nodes(); ++n) {
      double outflow = 0.0;
      for (LinkId l : cfg.out_links[n]) outflow += flow[l * cfg.num_commodities() + c];
      double have = bank.at(cfg, c, n);
      if (outflow > have + 1e-9) {
        if (cfg.params.defensive_clamp) {
          double scale = outflow > 0 ? std::max(have, 0.0) / outflow : 0.0;
          for (LinkId l : cfg.out_links[n]) flow[l * cfg.num_commodities() + c] *= scale;
          if (clamped_flows) ++(*clamped_flows);
        } else {
          Violation v{Violation::Kind::DataAvailability, n, c, slot, outflow - have};
          throw QueueError("step_data_queue: " + v.describe(cfg));
        }
      }
    }
  }
  for (int c = 0; c < cfg.num_commodities(); ++c) {
    const auto& com = cfg.commodities[c];
    for (int n = 0; n < cfg.num_nodes(); ++n) {
      double outflow = 0.0;
      for (LinkId l : cfg.out_links[n]) outflow += flow[l * cfg.num_commodities() + c];
      double inflow = 0.0;
      for (LinkId l : cfg.in_links[n]) inflow += flow[l * cfg.num_commodities() + c];
      double arrivals = 0.0;
      if (n == com.source) {
        arrivals = d.rate[cfg.source_slot_index(com.session, com.source_idx)];
      }
      double have = bank.at(cfg, c, n);
      if (n == com.sink) {
        // Destination absorbs: delivered data leaves the network.
        next.delivered[c] += inflow + arrivals;
        next.at(cfg, c, n) = have - outflow;
      } else {
        next.at(cfg, c, n) = have - outflow + inflow + arrivals;
      }
    }
  }
  return next;
}

EnergyQueueBank step_energy_queue(const NetworkConfig& cfg, const EnergyQueueBank& bank,
                                  const ControlDecision& d, long slot) {
  EnergyQueueBank next = bank;
  for (const auto& n : cfg.nodes) {
    double e = bank.e[n.id];
    switch (n.power_class) {
      case PowerClass::EH: {
        double need = total_energy_consumption(cfg, n.id, d);
        if (e + 1e-9 < need) {
          Violation v{Violation::Kind::EnergyAvailabilityEH, n.id, -1, slot, need - e};
          throw QueueError("step_energy_queue: " + v.describe(cfg));
        }
        next.e[n.id] = e + d.harvest[n.id] - need;
        break;
      }
      case PowerClass::EG: {
        if (e + 1e-9 < d.discharge[n.id]) {
          Violation v{Violation::Kind::EnergyAvailabilityEG, n.id, -1, slot,
                      d.discharge[n.id] - e};
          throw QueueError("step_energy_queue: " + v.describe(cfg));
        }
        next.e[n.id] = e + d.charge[n.id] - d.discharge[n.id];
        break;
      }
      case PowerClass::ME: {
        if (e + 1e-9 < d.discharge[n.id]) {
          Violation v{Violation::Kind::EnergyAvailabilityME, n.id, -1, slot,
                      d.discharge[n.id] - e};
          throw QueueError("step_energy_queue: " + v.describe(cfg));
        }
        next.e[n.id] = e + d.harvest[n.id] + d.charge[n.id] - d.discharge[n.id];
        break;
      }
      case PowerClass::None:
        break;
    }
  }
  return next;
}

}  // namespace hpwmsn
