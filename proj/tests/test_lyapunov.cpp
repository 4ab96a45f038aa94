#include <cmath>

#include "doctest.h"
#include "hpwmsn/lyapunov.hpp"
#include "test_helpers.hpp"

using namespace hpwmsn;

TEST_CASE("beta for the log(1-D) utility") {
  NetworkConfig cfg = test::fig2();
  const auto& s = cfg.sessions[0];
  double beta = compute_beta(s, cfg.params.utility, cfg.params.varpi1);
  // varpi1 * D_max / (1 - D_max) = 0.7 * 4; the table value.
  CHECK(beta == doctest::Approx(2.8).epsilon(1e-9));

  SUBCASE("grid ratio near the endpoint agrees with the analytic limit") {
    double limit = beta_endpoint_limit(s, cfg.params.utility, cfg.params.varpi1);
    CHECK(limit == doctest::Approx(2.8).epsilon(1e-12));
    double d = s.d_max_distortion - 1e-9;
    double ratio = cfg.params.varpi1 *
                   (cfg.params.utility(d) - cfg.params.utility(s.d_max_distortion)) /
                   (std::log2(s.d_max_distortion) - std::log2(d));
    CHECK(std::fabs(ratio - limit) < 1e-6);
  }
}

TEST_CASE("beta degenerate cases") {
  SUBCASE("constant utility") {
    double beta = compute_beta_fn(
        0.01, 0.8, 0.7, [](double) { return 1.0; }, [](double) { return 0.0; });
    CHECK(beta == doctest::Approx(0.0));
  }
  SUBCASE("shrinking interval approaches the endpoint limit") {
    auto u = [](double d) { return std::log2(1.0 - d); };
    auto up = [](double d) { return -1.0 / ((1.0 - d) * std::log(2.0)); };
    double beta = compute_beta_fn(0.8 - 1e-9, 0.8, 0.7, u, up);
    CHECK(beta == doctest::Approx(2.8).epsilon(1e-6));
  }
}

TEST_CASE("sigma") {
  NetworkConfig cfg = test::fig2();
  CHECK(compute_sigma(cfg) == doctest::Approx(0.05));

  SUBCASE("capped at 1 when all costs exceed it") {
    NetworkConfig big = test::fig2();
    for (auto& n : big.nodes) n.p_recv_cost = 2.0;
    for (auto& s : big.sessions) s.sense_cost = 3.0;
    CHECK(compute_sigma(big) == doctest::Approx(1.0));
  }
  SUBCASE("zero reception cost is rejected") {
    NetworkConfig bad = test::fig2();
    bad.nodes[0].p_recv_cost = 0.0;
    CHECK_THROWS_WITH(compute_sigma(bad), doctest::Contains("sigma must be positive"));
  }
}

TEST_CASE("epsilon") {
  NetworkConfig cfg = test::fig2();
  CHECK(compute_epsilon(cfg) == doctest::Approx(30.0));
  SUBCASE("zero X_max leaves R_max") {
    NetworkConfig c = test::fig2();
    c.params.x_max = 0.0;
    CHECK(compute_epsilon(c) == doctest::Approx(c.params.r_max));
  }
  SUBCASE("linear in X_max") {
    NetworkConfig c = test::fig2();
    double base = compute_epsilon(c);
    c.params.x_max *= 2.0;
    CHECK(compute_epsilon(c) - base ==
          doctest::Approx(c.params.l_max * c.params.x_max / 2.0));
  }
}

TEST_CASE("drift bound constant") {
  NetworkConfig cfg = test::fig2();
  // Per-tuple queue term: 1.5 * l_max^2 X_max^2 + 0.5 R_max^2 = 650,
  // 24 (node, commodity) tuples; energy terms from the class formulas.
  double b_q = 1.5 * 4 * 100 + 0.5 * 100;
  CHECK(b_q == doctest::Approx(650.0));
  double expect = 24 * b_q;
  expect += 0.5 * 50 * 50 + 0.5 * 10 * 10;  // A: h_max 50, P_total_max 10
  expect += 0.5 * 50 * 50 + 0.5 * 9 * 9;    // D: not a source, P_total_max 9
  expect += 0.5 * (10 + 15) * (10 + 15) + 0.5 * 15 * 15;  // C (ME)
  expect += 0.5 * 15 * 15 + 0.5 * 15 * 15;                // B (EG)
  CHECK(compute_b_const(cfg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("perturbations") {
  NetworkConfig cfg = test::fig2();
  NodeId a = cfg.node_by_name.at("A");
  NodeId b = cfg.node_by_name.at("B");
  NodeId c = cfg.node_by_name.at("C");

  SUBCASE("grid-node theta matches the published closed form 56V + 15") {
    LyapunovParams p1 = compute_perturbations(cfg, 1.0);
    CHECK(p1.theta[b] == doctest::Approx(71.0).epsilon(1e-9));
    CHECK(p1.theta[c] == doctest::Approx(71.0).epsilon(1e-9));
    LyapunovParams p100 = compute_perturbations(cfg, 100.0);
    CHECK(p100.theta[b] == doctest::Approx(56.0 * 100 + 15).epsilon(1e-9));
  }
  SUBCASE("EH theta slope 224") {
    LyapunovParams p1 = compute_perturbations(cfg, 1.0);
    LyapunovParams p2 = compute_perturbations(cfg, 2.0);
    CHECK(p2.theta[a] - p1.theta[a] == doctest::Approx(224.0).epsilon(1e-9));
    // computed constant term is P^Total_max
    CHECK(p1.theta[a] - 224.0 == doctest::Approx(cfg.p_total_max(a)).epsilon(1e-9));
  }
  SUBCASE("V = 0 leaves only the additive terms") {
    LyapunovParams p0 = compute_perturbations(cfg, 0.0);
    CHECK(p0.theta[b] == doctest::Approx(15.0));
  }
  SUBCASE("theta override reproduces the published constants") {
    NetworkConfig o = test::fig2();
    o.theta_override.eh = {{224.0, 38.0}};
    LyapunovParams p1 = compute_perturbations(o, 1.0);
    CHECK(p1.theta[a] == doctest::Approx(262.0));
  }
  SUBCASE("premises hold for a V sweep") {
    for (double v : {0.5, 1.0, 50.0, 100.0, 500.0, 3500.0}) {
      LyapunovParams p = compute_perturbations(cfg, v);
      for (const auto& n : cfg.nodes) {
        if (n.power_class == PowerClass::EH) CHECK(p.theta[n.id] > p.p_total_max[n.id]);
        if (n.grid_connected()) CHECK(p.theta[n.id] > n.d_max);
      }
    }
  }
}

TEST_CASE("node coefficient A_n") {
  NetworkConfig cfg = test::fig2();
  NetworkConfig o = cfg;
  o.theta_override.eh = {{224.0, 38.0}};
  LyapunovParams params = compute_perturbations(o, 1.0);
  EnergyQueueBank energy = EnergyQueueBank::zeros(o);
  std::vector<double> lambda(o.num_nodes(), 0.0);

  NodeId a = o.node_by_name.at("A");
  NodeId b = o.node_by_name.at("B");
  NodeId e = o.node_by_name.at("E");
  energy.e[a] = 38.0;
  lambda[b] = 7.0;
  CHECK(compute_A(o, params, a, energy, lambda) == doctest::Approx(-224.0));
  CHECK(compute_A(o, params, b, energy, lambda) == doctest::Approx(-7.0));
  CHECK(compute_A(o, params, e, energy, lambda) == 0.0);

  SUBCASE("EH coefficient nonpositive whenever E <= theta") {
    energy.e[a] = params.theta[a];
    CHECK(compute_A(o, params, a, energy, lambda) <= 0.0);
  }
}

TEST_CASE("link weights") {
  // Single source/sink session so the pair count is 1 and epsilon = 30.
  NetworkConfig cfg = test::line_config();
  LyapunovParams params = compute_perturbations(cfg, 1.0);
  REQUIRE(params.epsilon == doctest::Approx(30.0));
  DataQueueBank data = DataQueueBank::zeros(cfg);
  std::vector<double> a_coef(cfg.num_nodes(), 0.0);

  NodeId p = cfg.node_by_name.at("P");
  NodeId t = cfg.node_by_name.at("T");
  // Link 2 is P -> T; commodity 0 is (P -> T).
  data.at(cfg, 0, p) = 100.0;
  // Sink queues absorb, but the weight formula reads whatever is stored.
  data.at(cfg, 0, t) = 40.0;

  SUBCASE("positive part of the differential backlog") {
    LinkWeight w = link_weights(cfg, params, 2, 0, data, a_coef);
    CHECK(w.w == doctest::Approx(60.0));
    CHECK(w.w_clamped == doctest::Approx(30.0));
  }
  SUBCASE("clamp at zero") {
    data.at(cfg, 0, p) = 50.0;
    LinkWeight w = link_weights(cfg, params, 2, 0, data, a_coef);
    CHECK(w.w == doctest::Approx(10.0));
    CHECK(w.w_clamped == 0.0);
  }
  SUBCASE("receiver energy coefficient shifts the weight") {
    a_coef[t] = -224.0;
    LinkWeight w = link_weights(cfg, params, 2, 0, data, a_coef);
    CHECK(w.w == doctest::Approx(60.0 - 11.2));
  }
  SUBCASE("W nonnegative always") {
    a_coef[t] = -1e6;
    LinkWeight w = link_weights(cfg, params, 2, 0, data, a_coef);
    CHECK(w.w_clamped == 0.0);
  }
}
