#include <cmath>
#include <limits>

#include "doctest.h"
#include "hpwmsn/env.hpp"
#include "hpwmsn/radio.hpp"
#include "hpwmsn/verify.hpp"
#include "test_helpers.hpp"

using namespace hpwmsn;

namespace {

// n -> b with q = 0.5, plus b -> c with q = 0.4 so the receiver transmits
// itself 40% of the time. distance chosen so the n->b gain is 5e-13.
NetworkConfig alpha_config(double q_nb, double q_bc) {
  double dist = std::pow(5e-13, -0.25);
  char buf[1024];
  std::snprintf(buf, sizeof(buf), R"({
    "params": {"BW": 10, "X_max": 10, "l_max": 2, "R_max": 10,
               "D_min": 0.01, "D_max": 0.8, "varpi1": 0.7, "varpi2": 0.1, "delta": 2},
    "nodes": [
      {"id": "n", "power_class": "EH", "P_n_max": 8, "P_R": 0.05, "harvest": [0, 50]},
      {"id": "b", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05},
      {"id": "c", "power_class": "NONE", "P_n_max": 8, "P_R": 0.05}
    ],
    "links": [
      {"from": "n", "to": "b", "distance": %.17g, "N_nb": 5e-13, "q": %.17g},
      {"from": "b", "to": "c", "distance": 1.0, "N_nb": 5e-13, "q": %.17g}
    ],
    "sessions": [{"sources": ["n"], "sinks": ["b"], "P_S": 0.1, "entropy": {"n": 2.0}}]
  })", dist, q_nb, q_bc);
  return parse_config_text(buf);
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

TEST_CASE("success probability") {
  SUBCASE("q=0.5 with a busy receiver") {
    NetworkConfig cfg = alpha_config(0.5, 0.4);
    CHECK(success_probability(cfg, 0) == doctest::Approx(0.30).epsilon(1e-12));
  }
  SUBCASE("zero q gives zero") {
    NetworkConfig cfg = alpha_config(0.0, 0.4);
    CHECK(success_probability(cfg, 0) == 0.0);
  }
  SUBCASE("certain transmission, idle receiver") {
    NetworkConfig cfg = alpha_config(1.0, 0.0);
    CHECK(success_probability(cfg, 0) == 1.0);
  }
  SUBCASE("always within [0,1] on the bundled topology") {
    NetworkConfig cfg = test::fig2();
    for (const auto& l : cfg.links) {
      double a = success_probability(cfg, l.id);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
}

TEST_CASE("sinr in the log-power domain") {
  NetworkConfig cfg = alpha_config(0.5, 0.4);
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  // Gain 5e-13, noise 5e-13: the second link transmits nothing here.
  std::vector<double> logp = {std::log(8.0), -std::numeric_limits<double>::infinity()};
  SUBCASE("direct evaluation") {
    CHECK(sinr(cfg, tables, 0, logp, env) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("zero power gives zero sinr") {
    logp[0] = -std::numeric_limits<double>::infinity();
    CHECK(sinr(cfg, tables, 0, logp, env) == 0.0);
  }
}

TEST_CASE("interference makes sinr sublinear in a uniform power scale-up") {
  NetworkConfig cfg = test::fig2();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  std::vector<double> p(cfg.num_links());
  Rng rng(11);
  for (auto& v : p) v = std::log(rng.uniform(0.5, 4.0));
  // link 4 is C->D, which has interferers in the default model
  REQUIRE(!tables.interference[4].empty());
  double base = sinr(cfg, tables, 4, p, env);
  std::vector<double> doubled = p;
  for (auto& v : doubled) v += std::log(2.0);
  CHECK(sinr(cfg, tables, 4, doubled, env) < 2.0 * base);
}

TEST_CASE("sinr monotonicity in own and interfering powers") {
  NetworkConfig cfg = test::fig2();
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(cfg.num_links());
    for (auto& v : p) v = std::log(rng.uniform(1e-3, 8.0));
    int link = static_cast<int>(rng.next_u64() % cfg.num_links());
    double base = sinr(cfg, tables, link, p, env);
    auto up = p;
    up[link] += 0.1;
    CHECK(sinr(cfg, tables, link, up, env) > base);
    for (const auto& term : tables.interference[link]) {
      auto worse = p;
      worse[term.link] += 0.1;
      CHECK(sinr(cfg, tables, link, worse, env) <= base + 1e-15);
    }
  }
}

TEST_CASE("link capacity") {
  // alpha = 0.3 from the config, gamma = 8 at p = 8 as above.
  NetworkConfig cfg = alpha_config(0.5, 0.4);
  RadioTables tables = RadioTables::build(cfg);
  EnvironmentState env = static_env(cfg);
  std::vector<double> p = {8.0, 0.0};
  SUBCASE("BW alpha log2(gamma)") {
    CHECK(link_capacity_linear(cfg, tables, 0, p, env) == doctest::Approx(9.0).epsilon(1e-12));
  }
  SUBCASE("clamped to zero at gamma <= 1") {
    p[0] = 1.0;  // gamma = 1
    CHECK(link_capacity_linear(cfg, tables, 0, p, env) == 0.0);
    p[0] = 0.5;  // gamma = 0.5
    CHECK(link_capacity_linear(cfg, tables, 0, p, env) == 0.0);
  }
  SUBCASE("clamped above at X_max") {
    // push gamma very high via a short link in the bundled config
    NetworkConfig f = test::fig2();
    RadioTables ft = RadioTables::build(f);
    EnvironmentState fe = static_env(f);
    std::vector<double> fp(f.num_links(), 0.0);
    fp[4] = 8.0;  // C->D alone, no interference power
    CHECK(link_capacity_linear(f, ft, 4, fp, fe) == f.params.x_max);
  }
}

TEST_CASE("log-sinr concavity in the log-power vector") {
  NetworkConfig cfg = test::fig2();
  Rng rng(17);
  double worst = verify::concavity_slack(cfg, rng, 1000);
  CHECK(worst >= -1e-9);
}

TEST_CASE("conditional entropy lookup") {
  NetworkConfig cfg = test::fig2();
  const auto& s = cfg.sessions[0];
  CHECK(conditional_entropy(s, 3) == doctest::Approx(s.entropy(3)));  // full set
  CHECK(conditional_entropy(s, 1) < conditional_entropy(s, 3));
  CHECK_THROWS_AS(conditional_entropy(s, 4), ConfigError);
  CHECK_THROWS_AS(conditional_entropy(s, 0), ConfigError);
}

TEST_CASE("environment sampling") {
  NetworkConfig cfg = test::fig2();
  SUBCASE("deterministic replay") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
      EnvironmentState ea = sample_environment(cfg, a);
      EnvironmentState eb = sample_environment(cfg, b);
      CHECK(ea.harvestable == eb.harvestable);
      CHECK(ea.price == eb.price);
      CHECK(ea.channel_gain == eb.channel_gain);
    }
  }
  SUBCASE("static gains are distance^-4") {
    Rng rng(1);
    EnvironmentState env = sample_environment(cfg, rng);
    for (const auto& l : cfg.links) {
      CHECK(env.channel_gain[l.id] == doctest::Approx(std::pow(l.distance, -4.0)));
    }
    // distance 2 -> 0.0625
    CHECK(std::pow(2.0, -4.0) == doctest::Approx(0.0625));
  }
  SUBCASE("harvest range statistics at an EH node") {
    Rng rng(7);
    NodeId a = cfg.node_by_name.at("A");
    double lo = 1e300, hi = -1e300, mean = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      EnvironmentState env = sample_environment(cfg, rng);
      double h = env.harvestable[a];
      lo = std::min(lo, h);
      hi = std::max(hi, h);
      mean += h;
    }
    mean /= n;
    CHECK(lo >= 0.0);
    CHECK(hi <= 50.0);
    CHECK(mean == doctest::Approx(25.0).epsilon(0.02));
  }
  SUBCASE("prices stay in the configured band") {
    Rng rng(9);
    NodeId b = cfg.node_by_name.at("B");
    for (int i = 0; i < 10000; ++i) {
      EnvironmentState env = sample_environment(cfg, rng);
      CHECK(env.price[b] >= 0.5);
      CHECK(env.price[b] <= 1.0);
    }
  }
}
