#include "hpwmsn/trace_io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hpwmsn {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> TraceWriter::columns(const NetworkConfig& cfg) {
  std::vector<std::string> cols = {"t", "O", "dual_iters", "bcd_sweeps"};
  for (int c = 0; c < cfg.num_commodities(); ++c) {
    const auto& com = cfg.commodities[c];
    for (const auto& n : cfg.nodes) {
      cols.push_back("Q_" + n.name + "_f" + std::to_string(com.session) + "_" +
                     cfg.nodes[com.source].name + "_" + cfg.nodes[com.sink].name);
    }
  }
  for (const auto& n : cfg.nodes) {
    if (n.power_class != PowerClass::None) cols.push_back("E_" + n.name);
  }
  for (const auto& n : cfg.nodes) {
    if (n.harvests()) cols.push_back("e_" + n.name);
    if (n.grid_connected()) {
      cols.push_back("g_" + n.name);
      cols.push_back("d_" + n.name);
      cols.push_back("y_" + n.name);
      cols.push_back("price_" + n.name);
    }
  }
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      std::string tag = "f" + std::to_string(s.id) + "_" + cfg.nodes[s.sources[si]].name;
      cols.push_back("r_" + tag);
      cols.push_back("D_" + tag);
    }
  }
  for (const auto& n : cfg.nodes) {
    if (n.grid_connected()) cols.push_back("lambda_" + n.name);
  }
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      cols.push_back("rhosum_f" + std::to_string(s.id) + "_" + cfg.nodes[s.sources[si]].name);
    }
  }
  cols.push_back("violations");
  return cols;
}

TraceWriter::TraceWriter(const std::string& path, const NetworkConfig& cfg)
    : cfg_(cfg), out_(path) {
  if (!out_) throw std::runtime_error("cannot open trace file for writing: " + path);
  auto cols = columns(cfg);
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out_ << ',';
    out_ << cols[i];
  }
  out_ << '\n';
}

void TraceWriter::write(const SlotTrace& t) {
  std::string row;
  row.reserve(512);
  auto add = [&](const std::string& s) {
    if (!row.empty()) row += ',';
    row += s;
  };
  add(std::to_string(t.slot));
  add(fmt(t.objective));
  add(std::to_string(t.dual_iters));
  add(std::to_string(t.bcd_sweeps));
  for (int c = 0; c < cfg_.num_commodities(); ++c) {
    for (int n = 0; n < cfg_.num_nodes(); ++n) {
      add(fmt(t.data.at(cfg_, c, n)));
    }
  }
  for (const auto& n : cfg_.nodes) {
    if (n.power_class != PowerClass::None) add(fmt(t.energy.e[n.id]));
  }
  for (const auto& n : cfg_.nodes) {
    if (n.harvests()) add(fmt(t.decision.harvest[n.id]));
    if (n.grid_connected()) {
      add(fmt(t.decision.charge[n.id]));
      add(fmt(t.decision.discharge[n.id]));
      add(fmt(t.decision.grid_draw[n.id]));
      add(fmt(t.env.price[n.id]));
    }
  }
  for (const auto& s : cfg_.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      int slot = cfg_.source_slot_index(s.id, static_cast<int>(si));
      add(fmt(t.decision.rate[slot]));
      add(fmt(t.decision.distortion[slot]));
    }
  }
  for (const auto& n : cfg_.nodes) {
    if (n.grid_connected()) add(fmt(t.dual.lambda[n.id]));
  }
  for (const auto& s : cfg_.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      add(fmt(t.dual.rho_sum(cfg_, s.id, static_cast<int>(si))));
    }
  }
  add(std::to_string(t.violations.size()));
  out_ << row << '\n';
}

void TraceWriter::close() { out_.close(); }

int TraceTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("trace: no column named " + name);
}

double TraceTable::at(size_t row, const std::string& name) const {
  return rows.at(row).at(column_index(name));
}

TraceTable read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  TraceTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace file is empty: " + path);
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) t.columns.push_back(tok);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.columns.size());
    std::stringstream ls(line);
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != t.columns.size()) {
      throw std::runtime_error("trace row has wrong arity: " + path);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string summary_to_json(const NetworkConfig& cfg, const RunSummary& s) {
  json j;
  j["V"] = s.v;
  j["slots"] = s.slots;
  j["seed"] = s.seed;
  j["warmup_fraction"] = s.warmup_fraction;
  j["avg_objective"] = s.avg_objective;
  j["avg_objective_postwarmup"] = s.avg_objective_postwarmup;
  j["avg_total_backlog"] = s.avg_total_backlog;
  j["avg_total_backlog_postwarmup"] = s.avg_total_backlog_postwarmup;
  j["max_data_queue"] = s.max_data_queue;
  j["max_energy_EH"] = s.max_energy_eh;
  j["max_energy_EG"] = s.max_energy_eg;
  j["max_energy_ME"] = s.max_energy_em;
  j["total_utility"] = s.total_utility;
  j["total_grid_cost"] = s.total_grid_cost;
  j["availability_violations"] = s.availability_violations;
  j["bound_violations"] = s.bound_violations;
  j["lemma1_violations"] = s.lemma1_violations;
  j["defensive_clamps"] = s.defensive_clamps;
  json delivered = json::object();
  for (int c = 0; c < cfg.num_commodities(); ++c) {
    const auto& com = cfg.commodities[c];
    std::string key = "f" + std::to_string(com.session) + "_" + cfg.nodes[com.source].name +
                      "_" + cfg.nodes[com.sink].name;
    delivered[key] = s.delivered[c];
  }
  j["delivered_bits"] = delivered;
  return j.dump(2);
}

void write_summary_json(const std::string& path, const NetworkConfig& cfg,
                        const RunSummary& summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open summary file for writing: " + path);
  out << summary_to_json(cfg, summary) << '\n';
}

std::string constants_to_json(const NetworkConfig& cfg, const LyapunovParams& p) {
  json j;
  j["V"] = p.v;
  j["beta"] = p.beta;
  j["sigma"] = p.sigma;
  j["epsilon"] = p.epsilon;
  j["delta"] = p.delta;
  j["B"] = p.b_const;
  json theta = json::object();
  json ptm = json::object();
  for (const auto& n : cfg.nodes) {
    if (n.power_class != PowerClass::None) theta[n.name] = p.theta[n.id];
    ptm[n.name] = p.p_total_max[n.id];
  }
  j["theta"] = theta;
  j["P_Total_max"] = ptm;
  j["Q_bound"] = p.beta * p.v + cfg.params.r_max;
  return j.dump(2);
}

void write_constants_json(const std::string& path, const NetworkConfig& cfg,
                          const LyapunovParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open constants file for writing: " + path);
  out << constants_to_json(cfg, params) << '\n';
}

TraceAggregates aggregate_trace(const NetworkConfig& cfg, const TraceTable& table,
                                double warmup_fraction) {
  TraceAggregates agg;
  const size_t slots = table.rows.size();
  if (slots == 0) return agg;
  const size_t warmup = static_cast<size_t>(warmup_fraction * slots);
  const int o_col = table.column_index("O");
  const int v_col = table.column_index("violations");
  std::vector<int> q_cols;
  for (size_t i = 0; i < table.columns.size(); ++i) {
    if (table.columns[i].rfind("Q_", 0) == 0) q_cols.push_back(static_cast<int>(i));
  }
  double obj = 0, obj_post = 0, backlog = 0, backlog_post = 0;
  for (size_t r = 0; r < slots; ++r) {
    double o = table.rows[r][o_col];
    double b = 0;
    for (int qc : q_cols) b += table.rows[r][qc];
    obj += o;
    backlog += b;
    if (r >= warmup) {
      obj_post += o;
      backlog_post += b;
    }
    agg.violations += static_cast<long>(table.rows[r][v_col]);
  }
  agg.avg_objective = obj / slots;
  agg.avg_total_backlog = backlog / slots;
  size_t post = slots - warmup;
  agg.avg_objective_postwarmup = post ? obj_post / post : 0.0;
  agg.avg_total_backlog_postwarmup = post ? backlog_post / post : 0.0;
  (void)cfg;
  return agg;
}

}  // namespace hpwmsn
