#include <cmath>

#include "doctest.h"
#include "hpwmsn/power.hpp"
#include "test_helpers.hpp"

using namespace hpwmsn;

namespace {

// Single transmitter/receiver pair; distance 2 gives gain 0.0625.
NetworkConfig one_link_config() {
  return parse_config_text(R"({
    "params": {"BW": 10, "X_max": 10, "l_max": 2, "R_max": 10,
               "D_min": 0.01, "D_max": 0.8, "varpi1": 0.7, "varpi2": 0.1, "delta": 2},
    "nodes": [
      {"id": "T", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "R", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05}
    ],
    "links": [{"from": "T", "to": "R", "distance": 2.0, "N_nb": 5e-13, "q": 0.5}],
    "sessions": [{"sources": ["T"], "sinks": ["R"], "P_S": 0.1, "entropy": {"T": 2.0}}]
  })");
}

// Two parallel transmitter/receiver pairs that interfere with each other.
NetworkConfig two_link_config() {
  return parse_config_text(R"({
    "params": {"BW": 10, "X_max": 10, "l_max": 2, "R_max": 10,
               "D_min": 0.01, "D_max": 0.8, "varpi1": 0.7, "varpi2": 0.1, "delta": 2},
    "nodes": [
      {"id": "T1", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50],
       "pos": [0, 0]},
      {"id": "R1", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05, "pos": [1.5, 0]},
      {"id": "T2", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50],
       "pos": [0, 2]},
      {"id": "R2", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05, "pos": [1.5, 2]}
    ],
    "links": [
      {"from": "T1", "to": "R1", "distance": 1.5, "N_nb": 5e-13, "q": 0.4},
      {"from": "T2", "to": "R2", "distance": 1.5, "N_nb": 5e-13, "q": 0.4}
    ],
    "sessions": [{"sources": ["T1"], "sinks": ["R1"], "P_S": 0.1, "entropy": {"T1": 2.0}}]
  })");
}

EnvironmentState static_env(const NetworkConfig& cfg) {
  EnvironmentState env;
  env.channel_gain.resize(cfg.num_links());
  for (const auto& l : cfg.links) env.channel_gain[l.id] = std::pow(l.distance, -4.0);
  env.harvestable.assign(cfg.num_nodes(), 0.0);
  env.price.assign(cfg.num_nodes(), 0.0);
  return env;
}

}  // namespace

TEST_CASE("pure power penalty keeps the radio silent") {
  NetworkConfig cfg = one_link_config();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  PowerProblem prob{&cfg, &tables, &env, {0.0}, {-1.0, 0.0}};
  PowerResult res = solve_power_allocation(prob, {0.0}, 200, 1e-9, 60);
  CHECK(res.power[0] == 0.0);
}

TEST_CASE("single link matches a fine brute-force sweep") {
  NetworkConfig cfg = one_link_config();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  std::vector<double> a_coef = {-224.0, 0.0};
  PowerProblem prob{&cfg, &tables, &env, {30.0}, a_coef};
  PowerResult res = solve_power_allocation(prob, {0.0}, 200, 1e-9, 60);

  double best = 0.0;
  const double gain = std::pow(2.0, -4.0);
  const double alpha = tables.alpha[0];
  for (int i = 0; i <= 8000; ++i) {
    double p = 8.0 * i / 8000.0;
    double gamma = gain * p / 5e-13;
    double cap = gamma > 1.0 ? std::min(10.0, 10.0 * alpha * std::log2(gamma)) : 0.0;
    best = std::max(best, 30.0 * cap - 224.0 * p);
  }
  CHECK(res.objective >= best - 1e-3);
  CHECK(res.power[0] >= 0.0);
  CHECK(res.power[0] <= 8.0 + 1e-12);
}

TEST_CASE("symmetric interfering links get symmetric powers") {
  NetworkConfig cfg = two_link_config();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  std::vector<double> a_coef(cfg.num_nodes(), 0.0);
  a_coef[cfg.node_by_name.at("T1")] = -50.0;
  a_coef[cfg.node_by_name.at("T2")] = -50.0;
  PowerProblem prob{&cfg, &tables, &env, {200.0, 200.0}, a_coef};
  PowerResult res = solve_power_allocation(prob, {0.0, 0.0}, 200, 1e-12, 80);
  CHECK(std::fabs(res.power[0] - res.power[1]) < 1e-6);
  CHECK(res.power[0] > 0.0);
}

TEST_CASE("sweeps never decrease the objective and respect the power budget") {
  NetworkConfig cfg = test::fig2();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> weight(cfg.num_links());
    for (auto& w : weight) w = rng.uniform(0.0, 1200.0);
    std::vector<double> a_coef(cfg.num_nodes(), 0.0);
    for (const auto& n : cfg.nodes) {
      if (!cfg.out_links[n.id].empty()) a_coef[n.id] = -rng.uniform(0.0, 300.0);
    }
    PowerProblem prob{&cfg, &tables, &env, weight, a_coef};

    std::vector<double> warm(cfg.num_links(), 0.0);
    double prev = prob.objective(warm);
    for (int stage = 0; stage < 3; ++stage) {
      PowerResult res = solve_power_allocation(prob, warm, 5, 1e-12, 30, stage == 0);
      CHECK(res.objective >= prev - 1e-9);
      prev = res.objective;
      warm = res.power;
    }
    for (const auto& n : cfg.nodes) {
      double sum = 0.0;
      for (LinkId l : cfg.out_links[n.id]) {
        CHECK(warm[l] >= 0.0);
        sum += warm[l];
      }
      CHECK(sum <= n.p_max + 1e-9);
    }
  }
}
