#include "hpwmsn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hpwmsn {

using nlohmann::json;

std::string to_string(PowerClass c) {
  switch (c) {
    case PowerClass::EH: return "EH";
    case PowerClass::EG: return "EG";
    case PowerClass::ME: return "ME";
    case PowerClass::None: return "NONE";
  }
  return "?";
}

double Utility::operator()(double d) const {
  switch (kind) {
    case UtilityKind::Log1mD: return std::log2(1.0 - d);
  }
  return 0.0;
}

double Utility::derivative(double d) const {
  switch (kind) {
    case UtilityKind::Log1mD: return -1.0 / ((1.0 - d) * std::log(2.0));
  }
  return 0.0;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double get_num(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) fail(ctx + ": missing required key '" + key + "'");
  if (!j[key].is_number()) fail(ctx + ": key '" + key + "' must be a number");
  return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  return j[key].get<double>();
}

PowerClass parse_power_class(const json& j, const std::string& ctx) {
  if (!j.contains("power_class")) return PowerClass::None;
  std::string s = j["power_class"].get<std::string>();
  if (s == "EH") return PowerClass::EH;
  if (s == "EG") return PowerClass::EG;
  if (s == "ME") return PowerClass::ME;
  if (s == "NONE" || s == "none") return PowerClass::None;
  fail(ctx + ": unknown power_class '" + s + "'");
}

std::string subset_name(const SessionSpec& s, const std::vector<std::string>& node_names,
                        int mask) {
  std::string out = "{";
  bool first = true;
  for (size_t i = 0; i < s.sources.size(); ++i) {
    if (mask & (1 << i)) {
      if (!first) out += ",";
      out += node_names[s.sources[i]];
      first = false;
    }
  }
  return out + "}";
}

}  // namespace

int NetworkConfig::total_sources() const {
  std::set<NodeId> srcs;
  for (const auto& s : sessions) srcs.insert(s.sources.begin(), s.sources.end());
  return static_cast<int>(srcs.size());
}

int NetworkConfig::total_sinks() const {
  std::set<NodeId> snks;
  for (const auto& s : sessions) snks.insert(s.sinks.begin(), s.sinks.end());
  return static_cast<int>(snks.size());
}

int NetworkConfig::max_degree() const {
  int deg = 0;
  for (int n = 0; n < num_nodes(); ++n) {
    deg = std::max(deg, static_cast<int>(out_links[n].size()));
    deg = std::max(deg, static_cast<int>(in_links[n].size()));
  }
  return deg;
}

double NetworkConfig::p_total_max(NodeId n) const {
  double sense = 0.0;
  for (const auto& s : sessions) {
    if (std::find(s.sources.begin(), s.sources.end(), n) != s.sources.end()) {
      sense += s.sense_cost * s.r_max;
    }
  }
  return sense + nodes[n].p_max + nodes[n].p_recv_cost * params.l_max * params.x_max;
}

void NetworkConfig::finalize() {
  const int n_nodes = num_nodes();
  out_links.assign(n_nodes, {});
  in_links.assign(n_nodes, {});
  for (const auto& l : links) {
    out_links[l.from].push_back(l.id);
    in_links[l.to].push_back(l.id);
  }

  // Static pair gains distance^-4: link distances first, then geometry.
  pair_gain.assign(n_nodes * n_nodes, 0.0);
  for (int a = 0; a < n_nodes; ++a) {
    for (int b = 0; b < n_nodes; ++b) {
      if (a == b) continue;
      if (nodes[a].has_pos && nodes[b].has_pos) {
        double dx = nodes[a].pos_x - nodes[b].pos_x;
        double dy = nodes[a].pos_y - nodes[b].pos_y;
        double dist = std::sqrt(dx * dx + dy * dy);
        if (dist > 0) pair_gain[a * n_nodes + b] = std::pow(dist, -4.0);
      }
    }
  }
  for (const auto& l : links) {
    pair_gain[l.from * n_nodes + l.to] = std::pow(l.distance, -4.0);
  }

  // Full-interference default: every link whose transmitter is neither the
  // sender nor the receiver of this one.
  for (auto& l : links) {
    if (!l.interferers.empty()) continue;
    for (const auto& other : links) {
      if (other.id == l.id) continue;
      if (other.from == l.from || other.from == l.to) continue;
      l.interferers.push_back(other.id);
    }
  }
  for (const auto& l : links) {
    for (LinkId j : l.interferers) {
      if (j == l.id) {
        fail("link " + nodes[l.from].name + "->" + nodes[l.to].name +
             ": interferer set must exclude the link itself");
      }
    }
  }

  commodities.clear();
  commodity_offset.clear();
  source_slots.clear();
  source_slot_offset.clear();
  for (const auto& s : sessions) {
    commodity_offset.push_back(num_commodities());
    for (size_t si = 0; si < s.sources.size(); ++si) {
      for (size_t di = 0; di < s.sinks.size(); ++di) {
        commodities.push_back({s.id, static_cast<int>(si), static_cast<int>(di),
                               s.sources[si], s.sinks[di]});
      }
    }
    source_slot_offset.push_back(num_source_slots());
    for (size_t si = 0; si < s.sources.size(); ++si) {
      source_slots.emplace_back(s.id, static_cast<int>(si));
    }
  }

  // Structural validation.
  std::vector<std::string> names;
  for (const auto& n : nodes) names.push_back(n.name);
  for (const auto& n : nodes) {
    const std::string ctx = "node " + n.name;
    if (n.p_max <= 0) fail(ctx + ": P_n_max must be positive");
    if (n.p_recv_cost < 0) fail(ctx + ": P_R must be nonnegative");
    if (n.power_class == PowerClass::EH &&
        (n.g_max != 0 || n.d_max != 0 || n.y_max != 0)) {
      fail(ctx + ": EH nodes must not set g_max/d_max/y_max");
    }
    if (n.power_class == PowerClass::EG && n.harvest_max != 0) {
      fail(ctx + ": EG nodes have no harvester");
    }
    if (n.grid_connected()) {
      if (n.g_max < 0 || n.d_max < 0 || n.y_max < 0) fail(ctx + ": caps must be nonnegative");
    }
    if (n.harvests()) {
      if (n.harvest_min < 0 || n.harvest_max < n.harvest_min) {
        fail(ctx + ": harvest range invalid");
      }
    }
  }
  for (const auto& l : links) {
    const std::string ctx = "link " + names[l.from] + "->" + names[l.to];
    if (l.from == l.to) fail(ctx + ": from and to must differ");
    if (l.distance <= 0) fail(ctx + ": distance must be positive");
    if (l.noise <= 0) fail(ctx + ": N_nb must be positive");
    if (l.q < 0 || l.q > 1) fail(ctx + ": probability out of range");
  }
  for (int n = 0; n < n_nodes; ++n) {
    double qsum = 0;
    for (LinkId l : out_links[n]) qsum += links[l].q;
    if (qsum > 1.0 + 1e-12) {
      fail("node " + names[n] + ": sum of outgoing q exceeds 1");
    }
  }
  for (const auto& s : sessions) {
    const std::string ctx = "session " + std::to_string(s.id);
    if (s.sources.empty() || s.sinks.empty()) fail(ctx + ": sources and sinks must be nonempty");
    for (NodeId src : s.sources) {
      if (std::find(s.sinks.begin(), s.sinks.end(), src) != s.sinks.end()) {
        fail(ctx + ": sources and sinks must be disjoint");
      }
    }
    if (!(s.d_min > 0) || !(s.d_min <= s.d_max_distortion)) {
      fail(ctx + ": need 0 < D_min <= D_max");
    }
    if (s.r_max <= 0) fail(ctx + ": R_max must be positive");
    if (static_cast<int>(s.entropy_table.size()) != s.num_subsets()) {
      fail(ctx + ": entropy table must have " + std::to_string(s.num_subsets()) + " entries");
    }
    for (int m = 1; m <= s.num_subsets(); ++m) {
      if (std::isnan(s.entropy_table[m - 1])) {
        fail(ctx + ": entropy table missing entry for subset " + subset_name(s, names, m));
      }
      if (s.entropy_table[m - 1] < 0) {
        fail(ctx + ": entropy for subset " + subset_name(s, names, m) + " must be nonnegative");
      }
    }
  }
  if (params.l_max < max_degree()) {
    fail("l_max (" + std::to_string(params.l_max) + ") is below the actual max node degree (" +
         std::to_string(max_degree()) + ")");
  }
  if (params.bw <= 0) fail("params: BW must be positive");
  if (params.x_max < 0) fail("params: X_max must be nonnegative");
  if (!(params.varpi1 > 0 && params.varpi1 < 1)) fail("params: varpi1 must lie in (0,1)");
  if (params.varpi2 < 0) fail("params: varpi2 must be nonnegative");
  if (params.s_g_max < params.s_g_min) fail("params: S_G range invalid");
}

NetworkConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin + ": parse error: " + e.what());
  }

  NetworkConfig cfg;
  const json& p = j.contains("params") ? j["params"] : json::object();
  cfg.params.bw = get_num(p, "BW", "params");
  cfg.params.x_max = get_num(p, "X_max", "params");
  cfg.params.l_max = static_cast<int>(get_num(p, "l_max", "params"));
  cfg.params.r_max = get_num(p, "R_max", "params");
  cfg.params.d_min = get_num(p, "D_min", "params");
  cfg.params.d_max = get_num(p, "D_max", "params");
  cfg.params.varpi1 = get_num(p, "varpi1", "params");
  cfg.params.varpi2 = get_num(p, "varpi2", "params");
  cfg.params.delta = get_num(p, "delta", "params");
  cfg.params.s_g_min = get_num_or(p, "S_G_min", 0.5);
  cfg.params.s_g_max = get_num_or(p, "S_G_max", 1.0);
  cfg.params.fading = p.value("fading", false);
  cfg.params.fading_min = get_num_or(p, "fading_min", 0.5);
  cfg.params.fading_max = get_num_or(p, "fading_max", 1.5);
  cfg.params.defensive_clamp = p.value("defensive_clamp", false);
  std::string init = p.value("initial_energy", std::string("zero"));
  if (init == "zero") {
    cfg.params.initial_energy = InitialEnergy::Zero;
  } else if (init == "theta") {
    cfg.params.initial_energy = InitialEnergy::Theta;
  } else {
    fail("params: initial_energy must be 'zero' or 'theta'");
  }
  std::string util = p.value("utility", std::string("log1mD"));
  if (util != "log1mD") fail("params: unknown utility '" + util + "'");
  cfg.params.utility.kind = UtilityKind::Log1mD;

  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.dual_iters_max = static_cast<int>(get_num_or(s, "dual_iters_max", 50));
    cfg.solver.kappa0_lambda = get_num_or(s, "kappa0_lambda", 0.5);
    cfg.solver.kappa0_rho = get_num_or(s, "kappa0_rho", 0.5);
    cfg.solver.bcd_sweeps_max = static_cast<int>(get_num_or(s, "bcd_sweeps_max", 200));
    cfg.solver.bcd_improve_tol = get_num_or(s, "bcd_improve_tol", 1e-6);
    cfg.solver.dual_stop_tol = get_num_or(s, "dual_stop_tol", 1e-9);
    cfg.solver.block_pg_iters = static_cast<int>(get_num_or(s, "block_pg_iters", 60));
  }

  if (j.contains("theta_override")) {
    const json& t = j["theta_override"];
    auto read_pair = [&](const char* key) -> std::optional<std::pair<double, double>> {
      if (!t.contains(key)) return std::nullopt;
      const json& v = t[key];
      if (!v.is_array() || v.size() != 2) fail("theta_override: entry must be [slope, constant]");
      return std::make_pair(v[0].get<double>(), v[1].get<double>());
    };
    cfg.theta_override.eh = read_pair("eH");
    cfg.theta_override.eg = read_pair("eG");
    cfg.theta_override.em = read_pair("eM");
  }

  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty()) {
    fail("config: needs a nonempty 'nodes' array");
  }
  for (const auto& jn : j["nodes"]) {
    NodeSpec n;
    n.name = jn.at("id").get<std::string>();
    const std::string ctx = "node " + n.name;
    if (cfg.node_by_name.count(n.name)) fail(ctx + ": duplicate id");
    n.id = static_cast<NodeId>(cfg.nodes.size());
    n.power_class = parse_power_class(jn, ctx);
    n.p_max = get_num(jn, "P_n_max", ctx);
    n.p_recv_cost = get_num_or(jn, "P_R", 0.0);
    if (jn.contains("harvest")) {
      const json& h = jn["harvest"];
      if (!h.is_array() || h.size() != 2) fail(ctx + ": harvest must be [min, max]");
      n.harvest_min = h[0].get<double>();
      n.harvest_max = h[1].get<double>();
    }
    n.g_max = get_num_or(jn, "g_max", 0.0);
    n.d_max = get_num_or(jn, "d_max", 0.0);
    n.y_max = get_num_or(jn, "y_max", 0.0);
    if (jn.contains("pos")) {
      const json& q = jn["pos"];
      if (!q.is_array() || q.size() != 2) fail(ctx + ": pos must be [x, y]");
      n.has_pos = true;
      n.pos_x = q[0].get<double>();
      n.pos_y = q[1].get<double>();
    }
    cfg.node_by_name[n.name] = n.id;
    cfg.nodes.push_back(n);
  }

  auto node_ref = [&](const json& v, const std::string& ctx) -> NodeId {
    std::string name = v.get<std::string>();
    auto it = cfg.node_by_name.find(name);
    if (it == cfg.node_by_name.end()) fail(ctx + ": unknown node '" + name + "'");
    return it->second;
  };

  if (!j.contains("links") || !j["links"].is_array()) fail("config: needs a 'links' array");
  for (const auto& jl : j["links"]) {
    LinkSpec l;
    l.id = static_cast<LinkId>(cfg.links.size());
    l.from = node_ref(jl.at("from"), "links");
    l.to = node_ref(jl.at("to"), "links");
    const std::string ctx = "link " + cfg.nodes[l.from].name + "->" + cfg.nodes[l.to].name;
    l.distance = get_num(jl, "distance", ctx);
    l.noise = get_num(jl, "N_nb", ctx);
    l.q = get_num(jl, "q", ctx);
    if (l.q < 0 || l.q > 1) fail(ctx + ": probability out of range");
    cfg.links.push_back(l);
  }
  // Explicit interferer lists resolve after all links exist.
  {
    int li = 0;
    for (const auto& jl : j["links"]) {
      if (jl.contains("interferers")) {
        auto& l = cfg.links[li];
        for (const auto& pair : jl["interferers"]) {
          NodeId a = node_ref(pair.at(0), "interferers");
          NodeId m = node_ref(pair.at(1), "interferers");
          bool found = false;
          for (const auto& other : cfg.links) {
            if (other.from == a && other.to == m) {
              l.interferers.push_back(other.id);
              found = true;
              break;
            }
          }
          if (!found) {
            fail("link " + cfg.nodes[l.from].name + "->" + cfg.nodes[l.to].name +
                 ": interferer references unknown link");
          }
        }
      }
      ++li;
    }
  }

  if (!j.contains("sessions") || !j["sessions"].is_array() || j["sessions"].empty()) {
    fail("config: needs a nonempty 'sessions' array");
  }
  for (const auto& js : j["sessions"]) {
    SessionSpec s;
    s.id = static_cast<SessionId>(cfg.sessions.size());
    const std::string ctx = "session " + std::to_string(s.id);
    for (const auto& v : js.at("sources")) s.sources.push_back(node_ref(v, ctx));
    for (const auto& v : js.at("sinks")) s.sinks.push_back(node_ref(v, ctx));
    s.sense_cost = get_num(js, "P_S", ctx);
    s.r_max = get_num_or(js, "R_max", cfg.params.r_max);
    s.d_min = get_num_or(js, "D_min", cfg.params.d_min);
    s.d_max_distortion = get_num_or(js, "D_max", cfg.params.d_max);
    if (s.sources.size() > 16) fail(ctx + ": at most 16 sources supported");

    s.entropy_table.assign((1 << s.sources.size()) - 1, std::nan(""));
    if (js.contains("entropy_gaussian_correlation")) {
      double rho = js["entropy_gaussian_correlation"].get<double>();
      s.entropy_table = gaussian_entropy_table(static_cast<int>(s.sources.size()), rho);
    }
    if (js.contains("entropy")) {
      for (const auto& [key, val] : js["entropy"].items()) {
        // Key is a comma-joined list of source node names.
        int mask = 0;
        std::stringstream ss(key);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          auto it = cfg.node_by_name.find(tok);
          if (it == cfg.node_by_name.end()) fail(ctx + ": entropy key names unknown node '" + tok + "'");
          auto pos = std::find(s.sources.begin(), s.sources.end(), it->second);
          if (pos == s.sources.end()) fail(ctx + ": entropy key '" + key + "' names a non-source");
          mask |= 1 << (pos - s.sources.begin());
        }
        if (mask == 0) fail(ctx + ": empty entropy subset key");
        s.entropy_table[mask - 1] = val.get<double>();
      }
    }
    cfg.sessions.push_back(s);
  }

  cfg.finalize();
  return cfg;
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::vector<double> gaussian_entropy_table(int num_sources, double correlation,
                                           double variance) {
  if (num_sources < 1 || num_sources > 16) fail("gaussian_entropy_table: bad source count");
  if (correlation <= -1.0 || correlation >= 1.0) fail("gaussian_entropy_table: |rho| must be < 1");
  const int k = num_sources;
  const int n_subsets = (1 << k) - 1;
  std::vector<double> table(n_subsets);

  auto log2det_conditional = [&](int mask) {
    // Sigma = variance ((1-rho) I + rho 1 1^T); conditional covariance of the
    // subset given the complement via Schur complement, determinant by LU.
    std::vector<int> sel, comp;
    for (int i = 0; i < k; ++i) ((mask >> i) & 1 ? sel : comp).push_back(i);
    const int a = static_cast<int>(sel.size());
    const int c = static_cast<int>(comp.size());
    auto cov = [&](int i, int j) { return i == j ? variance : variance * correlation; };
    // S = Sigma_ss - Sigma_sc Sigma_cc^{-1} Sigma_cs
    std::vector<double> scc(c * c), scs(c * a);
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) scc[i * c + j] = cov(comp[i], comp[j]);
      for (int j = 0; j < a; ++j) scs[i * a + j] = cov(comp[i], sel[j]);
    }
    // Solve Sigma_cc X = Sigma_cs by Gaussian elimination with partial pivot.
    for (int col = 0; col < c; ++col) {
      int piv = col;
      for (int r = col + 1; r < c; ++r) {
        if (std::fabs(scc[r * c + col]) > std::fabs(scc[piv * c + col])) piv = r;
      }
      for (int cc = 0; cc < c; ++cc) std::swap(scc[col * c + cc], scc[piv * c + cc]);
      for (int cc = 0; cc < a; ++cc) std::swap(scs[col * a + cc], scs[piv * a + cc]);
      double diag = scc[col * c + col];
      for (int r = 0; r < c; ++r) {
        if (r == col) continue;
        double f = scc[r * c + col] / diag;
        for (int cc = col; cc < c; ++cc) scc[r * c + cc] -= f * scc[col * c + cc];
        for (int cc = 0; cc < a; ++cc) scs[r * a + cc] -= f * scs[col * a + cc];
      }
    }
    std::vector<double> x(c * a);
    for (int r = 0; r < c; ++r) {
      for (int cc = 0; cc < a; ++cc) x[r * a + cc] = scs[r * a + cc] / scc[r * c + r];
    }
    std::vector<double> s(a * a);
    for (int i = 0; i < a; ++i) {
      for (int jj = 0; jj < a; ++jj) {
        double dot = 0;
        for (int r = 0; r < c; ++r) dot += cov(sel[i], comp[r]) * x[r * a + jj];
        s[i * a + jj] = cov(sel[i], sel[jj]) - dot;
      }
    }
    // log2 det via LU.
    double log2det = 0;
    for (int col = 0; col < a; ++col) {
      int piv = col;
      for (int r = col + 1; r < a; ++r) {
        if (std::fabs(s[r * a + col]) > std::fabs(s[piv * a + col])) piv = r;
      }
      if (piv != col) {
        for (int cc = 0; cc < a; ++cc) std::swap(s[col * a + cc], s[piv * a + cc]);
      }
      double diag = s[col * a + col];
      if (diag <= 0) fail("gaussian_entropy_table: conditional covariance not positive definite");
      log2det += std::log2(diag);
      for (int r = col + 1; r < a; ++r) {
        double f = s[r * a + col] / diag;
        for (int cc = col; cc < a; ++cc) s[r * a + cc] -= f * s[col * a + cc];
      }
    }
    return log2det;
  };

  const double log2_2pie = std::log2(2.0 * M_PI * std::exp(1.0));
  for (int mask = 1; mask <= n_subsets; ++mask) {
    int sz = __builtin_popcount(static_cast<unsigned>(mask));
    table[mask - 1] = 0.5 * (sz * log2_2pie + log2det_conditional(mask));
  }
  return table;
}

}  // namespace hpwmsn
