#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpwmsn {

using NodeId = int;
using LinkId = int;
using SessionId = int;

enum class PowerClass { EH, EG, ME, None };

std::string to_string(PowerClass c);

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NodeSpec {
  std::string name;
  NodeId id = -1;
  PowerClass power_class = PowerClass::None;
  double p_max = 0.0;        // P_n_max, transmit power budget
  double p_recv_cost = 0.0;  // P_R, energy per received unit
  // EH / ME harvesting range (uniform per slot)
  double harvest_min = 0.0;
  double harvest_max = 0.0;  // h_max
  // EG / ME battery and grid caps
  double g_max = 0.0;
  double d_max = 0.0;
  double y_max = 0.0;
  // Optional planar position, used for cross-link interference gains.
  bool has_pos = false;
  double pos_x = 0.0, pos_y = 0.0;

  bool harvests() const { return power_class == PowerClass::EH || power_class == PowerClass::ME; }
  bool grid_connected() const { return power_class == PowerClass::EG || power_class == PowerClass::ME; }
};

struct LinkSpec {
  LinkId id = -1;
  NodeId from = -1;
  NodeId to = -1;
  double distance = 0.0;
  double noise = 0.0;  // N_nb
  double q = 0.0;      // transmission probability q_nb
  // Interference set I_{n,b}: links whose transmitter may corrupt this one.
  // Filled at load time (explicit list or the full-interference default).
  std::vector<LinkId> interferers;
};

struct SessionSpec {
  SessionId id = -1;
  std::vector<NodeId> sources;  // ordered, defines subset bit positions
  std::vector<NodeId> sinks;
  double sense_cost = 0.0;  // P_S
  double r_max = 0.0;
  double d_min = 0.0;
  double d_max_distortion = 0.0;
  // entropy_table[m-1] = H(subset_m | sources - subset_m) in bits, where
  // subset_m for m in [1, 2^k-1] picks sources[i] iff bit i of m is set.
  std::vector<double> entropy_table;

  int num_subsets() const { return (1 << sources.size()) - 1; }
  double entropy(int subset_mask) const { return entropy_table.at(subset_mask - 1); }
};

enum class UtilityKind { Log1mD };

// Session utility U(D). All logarithms in this artifact are base 2 so that
// entropies, capacities, the distortion coupling and the utility live in
// consistent units.
struct Utility {
  UtilityKind kind = UtilityKind::Log1mD;
  double operator()(double d) const;
  double derivative(double d) const;
};

struct ThetaOverride {
  // theta = slope * V + constant
  std::optional<std::pair<double, double>> eh, eg, em;
};

struct SolverParams {
  int dual_iters_max = 50;
  double kappa0_lambda = 0.5;
  double kappa0_rho = 0.5;
  double dual_stop_tol = 1e-9;
  int bcd_sweeps_max = 200;
  double bcd_improve_tol = 1e-6;
  int block_pg_iters = 60;
  double golden_tol = 1e-8;
};

enum class InitialEnergy { Zero, Theta };

struct GlobalParams {
  double bw = 0.0;      // BW
  double x_max = 0.0;   // X_max
  int l_max = 0;        // l_max (validated against the topology)
  double r_max = 0.0;   // R_max (network-wide, also per-session default)
  double d_min = 0.0;
  double d_max = 0.0;
  double varpi1 = 0.0;
  double varpi2 = 0.0;
  double delta = 0.0;   // capacity/power ratio assumption constant
  double s_g_min = 0.0;
  double s_g_max = 0.0;
  bool fading = false;
  double fading_min = 1.0;
  double fading_max = 1.0;
  bool defensive_clamp = false;
  InitialEnergy initial_energy = InitialEnergy::Zero;
  Utility utility;
};

struct NetworkConfig {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<SessionSpec> sessions;
  GlobalParams params;
  SolverParams solver;
  ThetaOverride theta_override;

  // Derived lookups, filled by finalize().
  std::map<std::string, NodeId> node_by_name;
  std::vector<std::vector<LinkId>> out_links;  // per node
  std::vector<std::vector<LinkId>> in_links;   // per node
  // Static channel gain distance^-4 for every (tx, rx) node pair with known
  // geometry; 0 when unknown. Indexed tx * N + rx.
  std::vector<double> pair_gain;
  // Commodity = (session, source, sink) triple; queues exist per (node, commodity).
  struct Commodity {
    SessionId session;
    int source_idx;  // index into session.sources
    int sink_idx;    // index into session.sinks
    NodeId source;
    NodeId sink;
  };
  std::vector<Commodity> commodities;
  std::vector<int> commodity_offset;  // per session, first commodity index
  // (session, source) pairs that control r and D; offset per session.
  std::vector<std::pair<SessionId, int>> source_slots;
  std::vector<int> source_slot_offset;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_links() const { return static_cast<int>(links.size()); }
  int num_sessions() const { return static_cast<int>(sessions.size()); }
  int num_commodities() const { return static_cast<int>(commodities.size()); }
  int num_source_slots() const { return static_cast<int>(source_slots.size()); }

  int commodity_index(SessionId f, int src_idx, int snk_idx) const {
    const auto& s = sessions[f];
    return commodity_offset[f] + src_idx * static_cast<int>(s.sinks.size()) + snk_idx;
  }
  int source_slot_index(SessionId f, int src_idx) const {
    return source_slot_offset[f] + src_idx;
  }
  double gain(NodeId tx, NodeId rx) const { return pair_gain[tx * num_nodes() + rx]; }

  // Network-wide counts used by the perturbation formulas.
  int total_sources() const;
  int total_sinks() const;
  int max_degree() const;  // actual max in/out degree

  double p_total_max(NodeId n) const;  // P^Total_{n,max}

  void finalize();  // builds lookups, applies defaults, validates invariants
};

// Parses and validates a JSON-formatted config file. Table II parameter
// names are preserved verbatim as keys. Throws ConfigError with the
// offending field named.
NetworkConfig load_config(const std::string& path);
NetworkConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// Conditional entropy table for jointly Gaussian sources with common
// correlation rho and unit variance: entry m holds
// H(S_m | complement) = 1/2 log2((2 pi e)^|S_m| det Sigma_{S_m | comp}) bits.
std::vector<double> gaussian_entropy_table(int num_sources, double correlation,
                                           double variance = 1.0);

}  // namespace hpwmsn
