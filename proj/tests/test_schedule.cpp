#include <cmath>

#include "doctest.h"
#include "hpwmsn/env.hpp"
#include "hpwmsn/schedule.hpp"
#include "test_helpers.hpp"

using namespace hpwmsn;

namespace {

// Two sessions sharing one relay link so the per-link argmax is exercised.
NetworkConfig two_session_config() {
  return parse_config_text(R"({
    "params": {"BW": 10, "X_max": 10, "l_max": 2, "R_max": 10,
               "D_min": 0.01, "D_max": 0.8, "varpi1": 0.7, "varpi2": 0.1, "delta": 2},
    "nodes": [
      {"id": "n", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "b", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05},
      {"id": "s1", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "s2", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]}
    ],
    "links": [
      {"from": "n", "to": "b", "distance": 1.0, "N_nb": 5e-13, "q": 0.5},
      {"from": "s1", "to": "n", "distance": 1.0, "N_nb": 5e-13, "q": 0.2},
      {"from": "s2", "to": "n", "distance": 1.0, "N_nb": 5e-13, "q": 0.2}
    ],
    "sessions": [
      {"sources": ["s1"], "sinks": ["b"], "P_S": 0.1, "entropy": {"s1": 2.0}},
      {"sources": ["s2"], "sinks": ["b"], "P_S": 0.1, "entropy": {"s2": 2.0}}
    ]
  })");
}

}  // namespace

TEST_CASE("max-weight session selection") {
  NetworkConfig cfg = two_session_config();
  LyapunovParams params = compute_perturbations(cfg, 1.0);
  REQUIRE(params.epsilon == doctest::Approx(30.0));
  NodeId n = cfg.node_by_name.at("n");
  DataQueueBank data = DataQueueBank::zeros(cfg);
  std::vector<double> a_coef(cfg.num_nodes(), 0.0);
  std::vector<double> capacity = {9.0, 0.0, 0.0};

  SUBCASE("session with W = 30 wins and gets the full capacity") {
    // session 0 weight: 0; session 1: Q_n - Q_b = 60 -> W = 30.
    data.at(cfg, 1, n) = 60.0;
    ScheduleDecision out = schedule(cfg, params, capacity, data, a_coef);
    CHECK(out.chosen_session[0] == 1);
    CHECK(out.phys_flow[0] == doctest::Approx(9.0));
    CHECK(out.info_flow[0 * cfg.num_commodities() + 1] == doctest::Approx(9.0));
    CHECK(out.info_flow[0 * cfg.num_commodities() + 0] == 0.0);
  }
  SUBCASE("all weights zero means no transmission") {
    ScheduleDecision out = schedule(cfg, params, capacity, data, a_coef);
    CHECK(out.chosen_session[0] == -1);
    CHECK(out.phys_flow[0] == 0.0);
  }
  SUBCASE("argmax tie goes to the smaller session id") {
    data.at(cfg, 0, n) = 60.0;
    data.at(cfg, 1, n) = 60.0;
    ScheduleDecision out = schedule(cfg, params, capacity, data, a_coef);
    CHECK(out.chosen_session[0] == 0);
  }
}

TEST_CASE("per-pair gate can zero the information flow while the physical flow runs") {
  // One session, two sources: pair gates act per (source, sink).
  NetworkConfig cfg = parse_config_text(R"({
    "params": {"BW": 10, "X_max": 10, "l_max": 2, "R_max": 10,
               "D_min": 0.01, "D_max": 0.8, "varpi1": 0.7, "varpi2": 0.1, "delta": 2},
    "nodes": [
      {"id": "n", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "b", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "s1", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "s2", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "t", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05}
    ],
    "links": [
      {"from": "n", "to": "b", "distance": 1.0, "N_nb": 5e-13, "q": 0.5},
      {"from": "s1", "to": "n", "distance": 1.0, "N_nb": 5e-13, "q": 0.2},
      {"from": "s2", "to": "n", "distance": 1.0, "N_nb": 5e-13, "q": 0.2},
      {"from": "b", "to": "t", "distance": 1.0, "N_nb": 5e-13, "q": 0.3}
    ],
    "sessions": [
      {"sources": ["s1", "s2"], "sinks": ["t"], "P_S": 0.1,
       "entropy": {"s1": 2.0, "s2": 2.0, "s1,s2": 4.0}}
    ]
  })");
  LyapunovParams params = compute_perturbations(cfg, 1.0);
  NodeId n = cfg.node_by_name.at("n");
  NodeId b = cfg.node_by_name.at("b");
  DataQueueBank data = DataQueueBank::zeros(cfg);
  std::vector<double> a_coef(cfg.num_nodes(), 0.0);
  a_coef[b] = -224.0;  // A_b P_R = -11.2 at the receiver

  // Commodity 0 = (s1, t): differential 100 passes its gate.
  // Commodity 1 = (s2, t): differential 25; 25 - 11.2 - 30 < 0 fails.
  data.at(cfg, 0, n) = 100.0;
  data.at(cfg, 1, n) = 25.0;
  std::vector<double> capacity = {9.0, 0.0, 0.0, 0.0};
  ScheduleDecision out = schedule(cfg, params, capacity, data, a_coef);
  CHECK(out.chosen_session[0] == 0);
  CHECK(out.phys_flow[0] == doctest::Approx(9.0));
  CHECK(out.info_flow[0 * cfg.num_commodities() + 0] == doctest::Approx(9.0));
  CHECK(out.info_flow[0 * cfg.num_commodities() + 1] == 0.0);
}

TEST_CASE("coding consistency check") {
  NetworkConfig cfg = test::fig2();
  ControlDecision d = ControlDecision::zeros(cfg);
  d.chosen_session[0] = 0;
  d.phys_flow[0] = 9.0;

  SUBCASE("coded pairs at the physical rate are consistent") {
    d.info(cfg, 0, 0) = 9.0;
    d.info(cfg, 0, 1) = 9.0;
    CHECK(coding_consistency_check(cfg, d).empty());
  }
  SUBCASE("partial service is consistent") {
    d.info(cfg, 0, 0) = 9.0;
    CHECK(coding_consistency_check(cfg, d).empty());
  }
  SUBCASE("information above the physical rate is flagged") {
    d.info(cfg, 0, 0) = 10.0;
    auto v = coding_consistency_check(cfg, d);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("exceeds physical rate") != std::string::npos);
  }
}

TEST_CASE("scheduling properties on random instances") {
  NetworkConfig cfg = test::fig2();
  LyapunovParams params = compute_perturbations(cfg, 10.0);
  Rng rng(77);
  const double floor_q = cfg.params.l_max * cfg.params.x_max;
  for (int trial = 0; trial < 100; ++trial) {
    DataQueueBank data = DataQueueBank::zeros(cfg);
    for (double& q : data.q) q = rng.uniform(0.0, params.beta * 10.0 + 10.0);
    std::vector<double> a_coef(cfg.num_nodes(), 0.0);
    for (const auto& n : cfg.nodes) {
      if (n.power_class != PowerClass::None) a_coef[n.id] = -rng.uniform(0.0, 50.0);
    }
    std::vector<double> capacity(cfg.num_links());
    for (auto& c : capacity) c = rng.uniform(0.0, 10.0);

    ScheduleDecision out = schedule(cfg, params, capacity, data, a_coef);
    ScheduleDecision again = schedule(cfg, params, capacity, data, a_coef);
    CHECK(out.phys_flow == again.phys_flow);
    CHECK(out.info_flow == again.info_flow);

    for (const auto& l : cfg.links) {
      for (int c = 0; c < cfg.num_commodities(); ++c) {
        double info = out.info_flow[l.id * cfg.num_commodities() + c];
        CHECK(info <= out.phys_flow[l.id] + 1e-12);
        if (info > 0) {
          // the gate implies the Part D backlog floor
          CHECK(data.at(cfg, c, l.from) > floor_q);
          CHECK(cfg.commodities[c].session == out.chosen_session[l.id]);
        }
      }
    }
  }
}
