#include "hpwmsn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hpwmsn/power.hpp"
#include "hpwmsn/radio.hpp"
#include "hpwmsn/subproblems.hpp"

namespace hpwmsn::verify {

namespace {

const double kLog2_2PiE = std::log2(2.0 * M_PI * std::exp(1.0));

std::string describe(const char* kind, std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os << kind << "(";
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ", ";
    os << k << "=" << v;
    first = false;
  }
  os << ")";
  return os.str();
}

// ---- linear/1-D subproblem oracles ------------------------------------

OracleReport oracle_eh_harvest(Rng& rng, double resolution, double tol) {
  double theta = rng.uniform(10.0, 1000.0);
  double stored = rng.uniform(0.0, theta * 1.05);
  double h = rng.uniform(0.0, 60.0);
  auto obj = [&](double e) { return (stored - theta) * e; };

  double e_solver = solve_eh_harvest(stored, theta, h);
  double best = 0.0;  // e = 0 is always feasible
  const int steps = std::max(1, static_cast<int>(1.0 / resolution));
  for (int i = 0; i <= steps; ++i) {
    double e = h * i / steps;
    if (stored + e > theta) continue;
    best = std::min(best, obj(e));
  }
  OracleReport r;
  r.instance = describe("eh_harvest", {{"E", stored}, {"theta", theta}, {"h", h}});
  r.solver_value = obj(e_solver);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  bool feasible = e_solver >= 0 && e_solver <= h + 1e-12 && stored + e_solver <= theta + 1e-9;
  r.pass = feasible && r.solver_value <= r.oracle_value + tol;
  return r;
}

OracleReport oracle_me_harvest_charge(Rng& rng, double resolution, double tol) {
  double theta = rng.uniform(10.0, 1000.0);
  double stored = rng.uniform(0.0, theta + 50.0);
  double lambda = rng.uniform(0.0, 100.0);
  double h = rng.uniform(0.0, 60.0);
  double g_max = rng.uniform(0.0, 30.0);
  auto obj = [&](double e, double g) {
    return (stored - theta + lambda) * g + (stored - theta) * e;
  };
  auto sol = solve_me_harvest_charge(stored, theta, lambda, h, g_max);
  double best = obj(0, 0);
  const int steps = std::max(1, static_cast<int>(1.0 / resolution));
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      best = std::min(best, obj(h * i / steps, g_max * j / steps));
    }
  }
  OracleReport r;
  r.instance = describe("me_harvest_charge",
                        {{"E", stored}, {"theta", theta}, {"lambda", lambda}, {"h", h}});
  r.solver_value = obj(sol.harvest, sol.charge);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  bool feasible = sol.harvest >= 0 && sol.harvest <= h + 1e-12 && sol.charge >= 0 &&
                  sol.charge <= g_max + 1e-12;
  r.pass = feasible && r.solver_value <= r.oracle_value + tol;
  return r;
}

OracleReport oracle_me_discharge_purchase(Rng& rng, double resolution, double tol) {
  double theta = rng.uniform(10.0, 1000.0);
  double stored = rng.uniform(0.0, theta + 100.0);
  double lambda = rng.uniform(0.0, 100.0);
  double price = rng.uniform(0.5, 1.0);
  double v = rng.uniform(0.0, 500.0);
  double varpi1 = 0.7, varpi2 = 0.1;
  double d_max = rng.uniform(0.0, 30.0);
  double y_max = rng.uniform(0.0, 40.0);
  auto obj = [&](double d, double y) {
    return (v * (1 - varpi1) * varpi2 * price - lambda) * y - (stored - theta + lambda) * d;
  };
  auto sol = solve_me_discharge_purchase(stored, theta, lambda, price, v, varpi1, varpi2,
                                         d_max, y_max);
  double best = obj(0, 0);
  const int steps = std::max(1, static_cast<int>(1.0 / resolution));
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      best = std::min(best, obj(d_max * i / steps, y_max * j / steps));
    }
  }
  OracleReport r;
  r.instance = describe("me_discharge_purchase",
                        {{"E", stored}, {"theta", theta}, {"lambda", lambda}, {"price", price}});
  r.solver_value = obj(sol.discharge, sol.grid_draw);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  r.pass = r.solver_value <= r.oracle_value + tol;
  return r;
}

OracleReport oracle_eg(Rng& rng, double resolution, double tol) {
  double theta = rng.uniform(10.0, 1000.0);
  double stored = rng.uniform(0.0, theta + 100.0);
  double lambda = rng.uniform(0.0, 100.0);
  double price = rng.uniform(0.5, 1.0);
  double v = rng.uniform(0.0, 500.0);
  double varpi1 = 0.7, varpi2 = 0.1;
  double g_max = rng.uniform(0.0, 30.0);
  double d_max = rng.uniform(0.0, 30.0);
  double y_max = rng.uniform(0.0, 40.0);
  auto obj = [&](double g, double d, double y) {
    return (stored - theta + lambda) * (g - d) +
           (v * (1 - varpi1) * varpi2 * price - lambda) * y;
  };
  auto sol = solve_eg(stored, theta, lambda, price, v, varpi1, varpi2, g_max, d_max, y_max);
  double best = obj(0, 0, 0);
  const int steps = std::max(1, static_cast<int>(1.0 / resolution));
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      for (int k = 0; k <= steps; ++k) {
        best = std::min(best, obj(g_max * i / steps, d_max * j / steps, y_max * k / steps));
      }
    }
  }
  OracleReport r;
  r.instance = describe("eg", {{"E", stored}, {"theta", theta}, {"lambda", lambda}});
  r.solver_value = obj(sol.charge, sol.discharge, sol.grid_draw);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  r.pass = r.solver_value <= r.oracle_value + tol;
  return r;
}

OracleReport oracle_distortion(Rng& rng, double resolution, double tol) {
  double v_varpi1 = rng.uniform(0.0, 500.0);
  double rho_sum = rng.uniform(0.0, 400.0);
  double d_min = 0.01, d_max = 0.8;
  Utility utility;
  auto obj = [&](double d) { return v_varpi1 * std::log2(1.0 - d) + std::log2(d) * rho_sum; };
  double d_solver = solve_distortion(utility, v_varpi1, rho_sum, d_min, d_max);
  double best = obj(d_min);
  const int steps = std::max(1, static_cast<int>((d_max - d_min) / resolution));
  for (int i = 0; i <= steps; ++i) {
    best = std::max(best, obj(d_min + (d_max - d_min) * i / steps));
  }
  OracleReport r;
  r.instance = describe("distortion", {{"V*varpi1", v_varpi1}, {"rho_sum", rho_sum}});
  r.solver_value = obj(d_solver);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  r.pass = d_solver >= d_min && d_solver <= d_max && r.solver_value >= r.oracle_value - tol;
  return r;
}

OracleReport oracle_source_rate(Rng& rng, double /*resolution*/, double tol) {
  double rho_sum = rng.uniform(0.0, 400.0);
  double queue_sum = rng.uniform(0.0, 400.0);
  double a_coef = -rng.uniform(0.0, 300.0);
  double sense_cost = 0.1;
  double r_max = 10.0;
  auto obj = [&](double rr) { return (rho_sum - queue_sum + a_coef * sense_cost) * rr; };
  double r_solver = solve_source_rate(rho_sum, queue_sum, a_coef, sense_cost, r_max);
  double best = std::max(obj(0.0), obj(r_max));
  OracleReport r;
  r.instance = describe("source_rate", {{"rho_sum", rho_sum}, {"Q", queue_sum}, {"A", a_coef}});
  r.solver_value = obj(r_solver);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  r.pass = r.solver_value >= r.oracle_value - tol;
  return r;
}

// ---- power allocation oracles ------------------------------------------
//
// Tiny k-link topologies, one transmitter per link, receivers that never
// transmit. The oracle objective is written out from the printed formulas;
// the solver result is scored with the oracle's own arithmetic.

struct PowerInstance {
  NetworkConfig cfg;
  std::vector<double> weight;
  std::vector<double> a_coef;  // per node
  std::vector<double> own_gain;  // S_i for link i
  std::vector<std::vector<double>> cross;  // cross[i][j]: gain tx_j -> rx_i (j != i)
  std::vector<double> q;
};

PowerInstance make_power_instance(Rng& rng, int links, bool symmetric) {
  PowerInstance inst;
  NetworkConfig& cfg = inst.cfg;
  cfg.params.bw = 10.0;
  cfg.params.x_max = 10.0;
  cfg.params.l_max = 2;
  cfg.params.r_max = 10.0;
  cfg.params.d_min = 0.01;
  cfg.params.d_max = 0.8;
  cfg.params.varpi1 = 0.7;
  cfg.params.varpi2 = 0.1;
  cfg.params.delta = 2.0;

  double sep = rng.uniform(1.0, 3.0);
  double q_common = rng.uniform(0.1, 0.9);
  double w_common = rng.uniform(0.0, 1200.0);
  double a_common = -rng.uniform(0.0, 500.0);
  for (int i = 0; i < links; ++i) {
    NodeSpec tx;
    tx.name = "T" + std::to_string(i);
    tx.id = static_cast<NodeId>(cfg.nodes.size());
    tx.power_class = PowerClass::None;
    tx.p_max = 8.0;
    tx.has_pos = true;
    tx.pos_x = 0.0;
    tx.pos_y = i * sep;
    cfg.node_by_name[tx.name] = tx.id;
    cfg.nodes.push_back(tx);
    NodeSpec rx;
    rx.name = "R" + std::to_string(i);
    rx.id = static_cast<NodeId>(cfg.nodes.size());
    rx.power_class = PowerClass::None;
    rx.p_max = 8.0;
    rx.has_pos = true;
    rx.pos_x = rng.uniform(1.0, 2.0);
    if (symmetric) rx.pos_x = 1.5;
    rx.pos_y = i * sep;
    cfg.node_by_name[rx.name] = rx.id;
    cfg.nodes.push_back(rx);

    LinkSpec l;
    l.id = i;
    l.from = tx.id;
    l.to = rx.id;
    l.distance = rx.pos_x;
    l.noise = 5e-13;
    l.q = symmetric ? q_common : rng.uniform(0.1, 0.9);
    cfg.links.push_back(l);
  }
  cfg.finalize();

  inst.q.resize(links);
  inst.weight.resize(links);
  inst.a_coef.assign(cfg.num_nodes(), 0.0);
  inst.own_gain.resize(links);
  inst.cross.assign(links, std::vector<double>(links, 0.0));
  for (int i = 0; i < links; ++i) {
    inst.q[i] = cfg.links[i].q;
    inst.weight[i] = symmetric ? w_common : rng.uniform(0.0, 1200.0);
    double a = symmetric ? a_common : -rng.uniform(0.0, 500.0);
    inst.a_coef[cfg.links[i].from] = a;
    inst.own_gain[i] = std::pow(cfg.links[i].distance, -4.0);
    for (int j = 0; j < links; ++j) {
      if (j == i) continue;
      double dx = cfg.nodes[cfg.links[j].from].pos_x - cfg.nodes[cfg.links[i].to].pos_x;
      double dy = cfg.nodes[cfg.links[j].from].pos_y - cfg.nodes[cfg.links[i].to].pos_y;
      inst.cross[i][j] = std::pow(std::sqrt(dx * dx + dy * dy), -4.0);
    }
  }
  return inst;
}

double power_oracle_objective(const PowerInstance& inst, const std::vector<double>& p) {
  const auto& cfg = inst.cfg;
  const int links = cfg.num_links();
  double obj = 0.0;
  for (int i = 0; i < links; ++i) {
    double denom = cfg.links[i].noise;
    for (int j = 0; j < links; ++j) {
      if (j != i) denom += inst.cross[i][j] * inst.q[j] * p[j];
    }
    double gamma = inst.own_gain[i] * p[i] / denom;
    double cap = 0.0;
    if (gamma > 1.0) {
      // alpha = q_i here: transmitters have no in-links, receivers no out-links
      cap = std::min(cfg.params.x_max, cfg.params.bw * inst.q[i] * std::log2(gamma));
    }
    obj += inst.weight[i] * cap + inst.a_coef[cfg.links[i].from] * p[i];
  }
  return obj;
}

OracleReport oracle_power(Rng& rng, int links, double resolution, double tol, bool symmetric) {
  PowerInstance inst = make_power_instance(rng, links, symmetric);
  const auto& cfg = inst.cfg;
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env;
  env.channel_gain.resize(links);
  for (int i = 0; i < links; ++i) env.channel_gain[i] = inst.own_gain[i];
  env.harvestable.assign(cfg.num_nodes(), 0.0);
  env.price.assign(cfg.num_nodes(), 0.0);

  PowerProblem prob{&cfg, &tables, &env, inst.weight, inst.a_coef};
  PowerResult res = solve_power_allocation(prob, std::vector<double>(links, 0.0), 200, 1e-9,
                                           80, true);

  const double pmax = 8.0;
  const int steps = std::max(1, static_cast<int>(pmax / resolution));
  double best = 0.0;
  std::vector<double> p(links, 0.0);
  if (links == 1) {
    for (int i = 0; i <= steps; ++i) {
      p[0] = pmax * i / steps;
      best = std::max(best, power_oracle_objective(inst, p));
    }
  } else {
    for (int i = 0; i <= steps; ++i) {
      p[0] = pmax * i / steps;
      for (int j = 0; j <= steps; ++j) {
        p[1] = pmax * j / steps;
        best = std::max(best, power_oracle_objective(inst, p));
      }
    }
  }
  OracleReport r;
  r.instance = describe(links == 1 ? "power_1link" : "power_2link",
                        {{"W0", inst.weight[0]},
                         {"A0", inst.a_coef[cfg.links[0].from]},
                         {"q0", inst.q[0]}});
  r.solver_value = power_oracle_objective(inst, res.power);
  r.oracle_value = best;
  r.gap = std::fabs(r.solver_value - r.oracle_value);
  r.pass = r.solver_value >= r.oracle_value - tol;
  return r;
}

}  // namespace

OracleReport grid_oracle_subproblem(SubproblemKind kind, Rng& rng, double resolution,
                                    double tolerance) {
  switch (kind) {
    case SubproblemKind::EhHarvest: return oracle_eh_harvest(rng, resolution, tolerance);
    case SubproblemKind::MeHarvestCharge:
      return oracle_me_harvest_charge(rng, resolution, tolerance);
    case SubproblemKind::MeDischargePurchase:
      return oracle_me_discharge_purchase(rng, resolution, tolerance);
    case SubproblemKind::Eg: return oracle_eg(rng, resolution, tolerance);
    case SubproblemKind::Distortion: return oracle_distortion(rng, resolution, tolerance);
    case SubproblemKind::SourceRate: return oracle_source_rate(rng, resolution, tolerance);
    case SubproblemKind::Power1Link: return oracle_power(rng, 1, resolution, tolerance, false);
    case SubproblemKind::Power2Link: return oracle_power(rng, 2, resolution, tolerance, false);
  }
  throw std::runtime_error("grid_oracle_subproblem: bad kind");
}

std::vector<std::string> check_theorem2_bounds(const NetworkConfig& cfg,
                                               const LyapunovParams& params,
                                               const TraceTable& trace) {
  std::vector<std::string> out;
  const double q_bound = params.beta * params.v + cfg.params.r_max + 1e-9;
  std::vector<int> q_cols;
  for (size_t i = 0; i < trace.columns.size(); ++i) {
    if (trace.columns[i].rfind("Q_", 0) == 0) q_cols.push_back(static_cast<int>(i));
  }
  struct ECol {
    int col;
    double bound;
  };
  std::vector<ECol> e_cols;
  for (const auto& n : cfg.nodes) {
    if (n.power_class == PowerClass::None) continue;
    double bound = params.theta[n.id];
    if (n.power_class == PowerClass::EG) bound += n.g_max;
    if (n.power_class == PowerClass::ME) bound += n.g_max + n.harvest_max;
    e_cols.push_back({trace.column_index("E_" + n.name), bound + 1e-9});
  }
  int viol_col = trace.column_index("violations");
  for (size_t r = 0; r < trace.rows.size(); ++r) {
    for (int qc : q_cols) {
      if (trace.rows[r][qc] > q_bound) {
        out.push_back("slot " + std::to_string(r) + ": " + trace.columns[qc] + "=" +
                      std::to_string(trace.rows[r][qc]) + " exceeds beta V + R_max");
      }
    }
    for (const auto& ec : e_cols) {
      if (trace.rows[r][ec.col] > ec.bound) {
        out.push_back("slot " + std::to_string(r) + ": " + trace.columns[ec.col] + "=" +
                      std::to_string(trace.rows[r][ec.col]) + " exceeds its energy bound");
      }
    }
    if (trace.rows[r][viol_col] != 0) {
      out.push_back("slot " + std::to_string(r) + ": availability violations recorded in run");
    }
  }
  return out;
}

std::vector<std::string> check_lemma1(const NetworkConfig& cfg, const LyapunovParams& params,
                                      const TraceTable& trace) {
  std::vector<std::string> out;
  const double tol = 1e-3 * params.beta * params.v;
  const double lambda_bound = params.beta * params.v / params.sigma + tol;
  const double rho_bound = params.beta * params.v + tol;
  std::vector<int> lambda_cols, rho_cols;
  for (size_t i = 0; i < trace.columns.size(); ++i) {
    if (trace.columns[i].rfind("lambda_", 0) == 0) lambda_cols.push_back(static_cast<int>(i));
    if (trace.columns[i].rfind("rhosum_", 0) == 0) rho_cols.push_back(static_cast<int>(i));
  }
  for (size_t r = 0; r < trace.rows.size(); ++r) {
    for (int lc : lambda_cols) {
      if (trace.rows[r][lc] > lambda_bound) {
        out.push_back("slot " + std::to_string(r) + ": " + trace.columns[lc] +
                      " exceeds beta V / sigma");
      }
    }
    for (int rc : rho_cols) {
      if (trace.rows[r][rc] > rho_bound) {
        out.push_back("slot " + std::to_string(r) + ": " + trace.columns[rc] +
                      " exceeds beta V");
      }
    }
  }
  return out;
}

double lagrangian_value(const NetworkConfig& cfg, const LyapunovParams& params,
                        const EnvironmentState& env, const DataQueueBank& data,
                        const EnergyQueueBank& energy, const ControlDecision& d,
                        const DualState& dual) {
  const double v = params.v;
  double acc = 0.0;

  // Drift expression: energy-weighted harvest/charge/purchase rows.
  for (const auto& n : cfg.nodes) {
    double diff = energy.e[n.id] - params.theta[n.id];
    switch (n.power_class) {
      case PowerClass::EH:
        acc += diff * d.harvest[n.id];
        break;
      case PowerClass::ME:
        acc += diff * d.harvest[n.id];
        acc += diff * (d.charge[n.id] - d.discharge[n.id]) +
               v * (1 - cfg.params.varpi1) * cfg.params.varpi2 * env.price[n.id] *
                   d.grid_draw[n.id];
        break;
      case PowerClass::EG:
        acc += diff * (d.charge[n.id] - d.discharge[n.id]) +
               v * (1 - cfg.params.varpi1) * cfg.params.varpi2 * env.price[n.id] *
                   d.grid_draw[n.id];
        break;
      case PowerClass::None:
        break;
    }
  }
  // Source rows: utility, source-queue pressure, EH sensing energy.
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      NodeId n = s.sources[si];
      int slot = cfg.source_slot_index(s.id, static_cast<int>(si));
      double qsum = 0.0;
      for (size_t di = 0; di < s.sinks.size(); ++di) {
        qsum += data.at(cfg, cfg.commodity_index(s.id, si, di), n);
      }
      double row = v * cfg.params.varpi1 * cfg.params.utility(d.distortion[slot]) -
                   qsum * d.rate[slot];
      if (cfg.nodes[n].power_class == PowerClass::EH) {
        row += (energy.e[n] - params.theta[n]) * s.sense_cost * d.rate[slot];
      }
      acc -= row;
    }
  }
  // Link rows: differential backlog on information flows, EH reception and
  // transmission energy.
  for (const auto& l : cfg.links) {
    for (int c = 0; c < cfg.num_commodities(); ++c) {
      acc -= d.info(cfg, l.id, c) * (data.at(cfg, c, l.from) - data.at(cfg, c, l.to));
    }
    double row = 0.0;
    if (cfg.nodes[l.to].power_class == PowerClass::EH) {
      row += (energy.e[l.to] - params.theta[l.to]) * cfg.nodes[l.to].p_recv_cost *
             d.phys_flow[l.id];
    }
    if (cfg.nodes[l.from].power_class == PowerClass::EH) {
      row += (energy.e[l.from] - params.theta[l.from]) * d.power[l.id];
    }
    acc -= row;
  }

  // Multiplier terms.
  for (const auto& n : cfg.nodes) {
    if (n.grid_connected()) {
      acc += dual.lambda[n.id] *
             (d.charge[n.id] - d.discharge[n.id] + total_energy_consumption(cfg, n.id, d) -
              d.grid_draw[n.id]);
    }
  }
  for (const auto& s : cfg.sessions) {
    for (int mask = 1; mask <= s.num_subsets(); ++mask) {
      double inner = s.entropy(mask);
      for (size_t i = 0; i < s.sources.size(); ++i) {
        if (mask & (1 << i)) {
          int slot = cfg.source_slot_index(s.id, static_cast<int>(i));
          inner -= d.rate[slot];
          inner -= kLog2_2PiE + std::log2(d.distortion[slot]);
        }
      }
      acc += dual.rho[s.id][mask - 1] * inner;
    }
  }
  return acc;
}

GradientInstance random_gradient_instance(const NetworkConfig& cfg,
                                          const LyapunovParams& params, Rng& rng) {
  GradientInstance inst;
  inst.env.channel_gain.resize(cfg.num_links());
  for (const auto& l : cfg.links) inst.env.channel_gain[l.id] = std::pow(l.distance, -4.0);
  inst.env.harvestable.assign(cfg.num_nodes(), 0.0);
  inst.env.price.assign(cfg.num_nodes(), 0.0);
  for (const auto& n : cfg.nodes) {
    if (n.harvests()) inst.env.harvestable[n.id] = rng.uniform(0.0, 10.0);
    if (n.grid_connected()) inst.env.price[n.id] = rng.uniform(0.5, 1.0);
  }

  inst.data = DataQueueBank::zeros(cfg);
  double q_cap = params.beta * params.v + cfg.params.r_max;
  for (double& q : inst.data.q) q = rng.uniform(0.0, q_cap);
  inst.energy = EnergyQueueBank::zeros(cfg);
  for (const auto& n : cfg.nodes) {
    if (n.power_class != PowerClass::None) {
      inst.energy.e[n.id] = rng.uniform(0.0, params.theta[n.id]);
    }
  }

  inst.decision = ControlDecision::zeros(cfg);
  for (const auto& n : cfg.nodes) {
    if (n.harvests()) inst.decision.harvest[n.id] = rng.uniform(0.0, inst.env.harvestable[n.id]);
    if (n.grid_connected()) {
      inst.decision.charge[n.id] = rng.uniform(0.0, n.g_max);
      inst.decision.discharge[n.id] = rng.uniform(0.0, n.d_max);
      inst.decision.grid_draw[n.id] = rng.uniform(0.0, n.y_max);
    }
  }
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      int slot = cfg.source_slot_index(s.id, static_cast<int>(si));
      inst.decision.rate[slot] = rng.uniform(0.0, s.r_max);
      inst.decision.distortion[slot] = rng.uniform(s.d_min, s.d_max_distortion);
    }
  }
  for (const auto& l : cfg.links) {
    inst.decision.power[l.id] = rng.uniform(0.0, cfg.nodes[l.from].p_max /
                                                     std::max<size_t>(1, cfg.out_links[l.from].size()));
    int f = rng.next_u64() % cfg.num_sessions();
    inst.decision.chosen_session[l.id] = f;
    double flow = rng.uniform(0.0, cfg.params.x_max);
    inst.decision.phys_flow[l.id] = flow;
    const auto& s = cfg.sessions[f];
    const int first = cfg.commodity_offset[f];
    const int count = static_cast<int>(s.sources.size() * s.sinks.size());
    for (int c = first; c < first + count; ++c) {
      if (rng.next_unit() < 0.5) inst.decision.info(cfg, l.id, c) = flow;
    }
  }

  inst.dual = DualState::zeros(cfg);
  for (const auto& n : cfg.nodes) {
    if (n.grid_connected()) inst.dual.lambda[n.id] = rng.uniform(0.0, 20.0);
  }
  for (const auto& s : cfg.sessions) {
    for (int m = 0; m < s.num_subsets(); ++m) {
      inst.dual.rho[s.id][m] = rng.uniform(0.0, params.beta * params.v);
    }
  }
  return inst;
}

GradientReport finite_difference_gradient(const NetworkConfig& cfg,
                                          const LyapunovParams& params, Rng& rng, double h,
                                          double rel_tol) {
  GradientInstance inst = random_gradient_instance(cfg, params, rng);
  GradientReport rep;
  auto eval = [&](const DualState& d) {
    return lagrangian_value(cfg, params, inst.env, inst.data, inst.energy, inst.decision, d);
  };
  for (const auto& n : cfg.nodes) {
    if (!n.grid_connected()) continue;
    DualState up = inst.dual, dn = inst.dual;
    up.lambda[n.id] += h;
    dn.lambda[n.id] -= h;
    double fd = (eval(up) - eval(dn)) / (2 * h);
    double an = lambda_gradient(cfg, n.id, inst.decision);
    double err = std::fabs(fd - an) / std::max(1.0, std::fabs(an));
    rep.max_rel_error = std::max(rep.max_rel_error, err);
  }
  for (const auto& s : cfg.sessions) {
    for (int mask = 1; mask <= s.num_subsets(); ++mask) {
      DualState up = inst.dual, dn = inst.dual;
      up.rho[s.id][mask - 1] += h;
      dn.rho[s.id][mask - 1] -= h;
      double fd = (eval(up) - eval(dn)) / (2 * h);
      double an = rho_gradient(cfg, s.id, mask, inst.decision);
      double err = std::fabs(fd - an) / std::max(1.0, std::fabs(an));
      rep.max_rel_error = std::max(rep.max_rel_error, err);
    }
  }
  rep.pass = rep.max_rel_error <= rel_tol;
  return rep;
}

double concavity_slack(const NetworkConfig& cfg, Rng& rng, int triples) {
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env;
  env.channel_gain.resize(cfg.num_links());
  for (const auto& l : cfg.links) env.channel_gain[l.id] = std::pow(l.distance, -4.0);
  env.harvestable.assign(cfg.num_nodes(), 0.0);
  env.price.assign(cfg.num_nodes(), 0.0);

  const int links = cfg.num_links();
  double worst = 0.0;
  std::vector<double> p1(links), p2(links), mix(links);
  for (int i = 0; i < triples; ++i) {
    for (int l = 0; l < links; ++l) {
      p1[l] = rng.uniform(std::log(1e-3), std::log(8.0));
      p2[l] = rng.uniform(std::log(1e-3), std::log(8.0));
    }
    double t = rng.uniform(0.01, 0.99);
    for (int l = 0; l < links; ++l) mix[l] = t * p1[l] + (1 - t) * p2[l];
    for (int l = 0; l < links; ++l) {
      double lg_mix = std::log(sinr(cfg, tables, l, mix, env));
      double lg_1 = std::log(sinr(cfg, tables, l, p1, env));
      double lg_2 = std::log(sinr(cfg, tables, l, p2, env));
      worst = std::min(worst, lg_mix - t * lg_1 - (1 - t) * lg_2);
    }
  }
  return worst;
}

}  // namespace hpwmsn::verify
