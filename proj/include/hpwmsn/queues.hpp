#pragma once

#include <string>
#include <vector>

#include "hpwmsn/config.hpp"

namespace hpwmsn {

// Backlogs Q_n^{fsd}(t), indexed [commodity * N + node]. Queues at a
// commodity's own sink absorb arrivals (delivered data leaves the network);
// the absorbed total is tracked for conservation checks.
struct DataQueueBank {
  std::vector<double> q;
  std::vector<double> delivered;  // per commodity, cumulative absorbed bits

  static DataQueueBank zeros(const NetworkConfig& cfg) {
    DataQueueBank b;
    b.q.assign(cfg.num_commodities() * cfg.num_nodes(), 0.0);
    b.delivered.assign(cfg.num_commodities(), 0.0);
    return b;
  }
  double at(const NetworkConfig& cfg, int commodity, NodeId n) const {
    return q[commodity * cfg.num_nodes() + n];
  }
  double& at(const NetworkConfig& cfg, int commodity, NodeId n) {
    return q[commodity * cfg.num_nodes() + n];
  }
};

// Stored energy E_n(t), one entry per node; meaningful only for EH/EG/ME.
struct EnergyQueueBank {
  std::vector<double> e;

  static EnergyQueueBank zeros(const NetworkConfig& cfg) {
    EnergyQueueBank b;
    b.e.assign(cfg.num_nodes(), 0.0);
    return b;
  }
};

// The full decision vector chi(t) for one slot.
struct ControlDecision {
  std::vector<double> harvest;     // e_n, per node
  std::vector<double> rate;        // r_n^f, per source slot
  std::vector<double> distortion;  // D_n^f, per source slot
  std::vector<double> grid_draw;   // y_n, per node
  std::vector<double> charge;      // g_n, per node
  std::vector<double> discharge;   // d_n, per node
  std::vector<double> power;       // p_nb^T, per link (linear power units)
  std::vector<double> phys_flow;   // x_nb^f, per link (chosen session only)
  std::vector<int> chosen_session; // per link, -1 when idle
  std::vector<double> info_flow;   // x~, [link * num_commodities + commodity]

  static ControlDecision zeros(const NetworkConfig& cfg) {
    ControlDecision d;
    d.harvest.assign(cfg.num_nodes(), 0.0);
    d.rate.assign(cfg.num_source_slots(), 0.0);
    d.distortion.assign(cfg.num_source_slots(), 0.0);
    d.grid_draw.assign(cfg.num_nodes(), 0.0);
    d.charge.assign(cfg.num_nodes(), 0.0);
    d.discharge.assign(cfg.num_nodes(), 0.0);
    d.power.assign(cfg.num_links(), 0.0);
    d.phys_flow.assign(cfg.num_links(), 0.0);
    d.chosen_session.assign(cfg.num_links(), -1);
    d.info_flow.assign(cfg.num_links() * cfg.num_commodities(), 0.0);
    return d;
  }
  double info(const NetworkConfig& cfg, LinkId l, int commodity) const {
    return info_flow[l * cfg.num_commodities() + commodity];
  }
  double& info(const NetworkConfig& cfg, LinkId l, int commodity) {
    return info_flow[l * cfg.num_commodities() + commodity];
  }
};

struct Violation {
  enum class Kind {
    EnergyAvailabilityEH,  // E^H < p^Total
    EnergyAvailabilityEG,  // E^G < d
    EnergyAvailabilityME,  // E^M < d
    DataAvailability,      // sum_b x~ > Q
  };
  Kind kind;
  NodeId node = -1;
  int commodity = -1;
  long slot = -1;
  double amount = 0.0;  // overdraw magnitude
  std::string describe(const NetworkConfig& cfg) const;
};

struct QueueError : std::runtime_error {
  explicit QueueError(const std::string& what) : std::runtime_error(what) {}
};

// p^Total_n = sum_f 1{n source} P_S r + sum_b p_nb + P_R sum_a sum_f x_an
double total_energy_consumption(const NetworkConfig& cfg, NodeId n,
                                const ControlDecision& d);

// y required by the supply identity y = g - d + p^Total (may be negative
// when discharge exceeds load; the committed decision clips it to the box).
double grid_draw_required(const NetworkConfig& cfg, NodeId n, const ControlDecision& d);

// Availability predicates Eqs. of the energy/data availability family.
// Empty result means the slot's decision is serviceable from current stores.
std::vector<Violation> availability_check(const NetworkConfig& cfg,
                                          const DataQueueBank& data,
                                          const EnergyQueueBank& energy,
                                          const ControlDecision& d, long slot = -1);

// One-slot data queue update (exact, no truncation). Throws QueueError if
// the data-availability precondition fails, unless the defensive clamp is
// enabled, in which case outflows are capped at the backlog and counted.
DataQueueBank step_data_queue(const NetworkConfig& cfg, const DataQueueBank& bank,
                              const ControlDecision& d, long slot = -1,
                              int* clamped_flows = nullptr);

// One-slot energy queue update for all powered nodes.
EnergyQueueBank step_energy_queue(const NetworkConfig& cfg, const EnergyQueueBank& bank,
                                  const ControlDecision& d, long slot = -1);

}  // namespace hpwmsn
