#include <cmath>

#include "doctest.h"
#include "hpwmsn/dual.hpp"
#include "hpwmsn/verify.hpp"
#include "test_helpers.hpp"

using namespace hpwmsn;

TEST_CASE("lambda projection at zero") {
  NetworkConfig cfg = test::line_config();
  NodeId y = cfg.node_by_name.at("Y");
  DualState dual = DualState::zeros(cfg);
  dual.lambda[y] = 5.0;
  ControlDecision d = ControlDecision::zeros(cfg);
  d.grid_draw[y] = 60.0;  // gradient g - d + p^Total - y = -60
  CHECK(lambda_gradient(cfg, y, d) == doctest::Approx(-60.0));
  DualState next = dual_update(cfg, dual, d, 0.1, 0.0);
  CHECK(next.lambda[y] == 0.0);  // [5 - 6]^+
}

TEST_CASE("balanced supply leaves lambda unchanged") {
  NetworkConfig cfg = test::line_config();
  NodeId y = cfg.node_by_name.at("Y");
  DualState dual = DualState::zeros(cfg);
  dual.lambda[y] = 3.0;
  ControlDecision d = ControlDecision::zeros(cfg);
  d.charge[y] = 10.0;
  d.grid_draw[y] = 10.0;  // g - d + 0 - y = 0
  DualState next = dual_update(cfg, dual, d, 0.5, 0.0);
  CHECK(next.lambda[y] == doctest::Approx(3.0));
}

TEST_CASE("lambda gradient with a bare supply decision") {
  NetworkConfig cfg = test::line_config();
  NodeId y = cfg.node_by_name.at("Y");
  ControlDecision d = ControlDecision::zeros(cfg);
  d.charge[y] = 4.0;
  d.discharge[y] = 1.5;
  d.grid_draw[y] = 7.0;
  CHECK(lambda_gradient(cfg, y, d) == doctest::Approx(4.0 - 1.5 - 7.0));
}

TEST_CASE("rho gradient closed forms") {
  NetworkConfig cfg = test::fig2();
  const auto& s = cfg.sessions[0];
  ControlDecision d = ControlDecision::zeros(cfg);
  const double log2_2pie = std::log2(2.0 * M_PI * std::exp(1.0));

  SUBCASE("at D = D_max with zero rates") {
    for (auto& dist : d.distortion) dist = 0.8;
    for (int mask = 1; mask <= s.num_subsets(); ++mask) {
      int size = __builtin_popcount(static_cast<unsigned>(mask));
      double expect = s.entropy(mask) - size * (log2_2pie + std::log2(0.8));
      CHECK(rho_gradient(cfg, s.id, mask, d) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("rates reduce the gradient one-for-one") {
    for (auto& dist : d.distortion) dist = 0.5;
    double before = rho_gradient(cfg, s.id, 1, d);
    d.rate[0] = 4.0;  // source A is in subset {A}
    CHECK(rho_gradient(cfg, s.id, 1, d) == doctest::Approx(before - 4.0));
  }
}

TEST_CASE("dual gradients match finite differences of the Lagrangian") {
  NetworkConfig cfg = test::fig2();
  LyapunovParams params = compute_perturbations(cfg, 2.0);
  Rng rng(31);
  for (int i = 0; i < 10; ++i) {
    auto rep = verify::finite_difference_gradient(cfg, params, rng);
    CHECK(rep.pass);
    CHECK(rep.max_rel_error <= 1e-6);
  }
}

TEST_CASE("a corrupted analytic gradient is caught by the oracle") {
  NetworkConfig cfg = test::fig2();
  LyapunovParams params = compute_perturbations(cfg, 2.0);
  Rng rng(37);
  auto inst = verify::random_gradient_instance(cfg, params, rng);
  NodeId b = cfg.node_by_name.at("B");
  double h = 1e-5;
  DualState up = inst.dual, dn = inst.dual;
  up.lambda[b] += h;
  dn.lambda[b] -= h;
  double fd = (verify::lagrangian_value(cfg, params, inst.env, inst.data, inst.energy,
                                        inst.decision, up) -
               verify::lagrangian_value(cfg, params, inst.env, inst.data, inst.energy,
                                        inst.decision, dn)) /
              (2 * h);
  double wrong = lambda_gradient(cfg, b, inst.decision) + 0.1;
  CHECK(std::fabs(fd - wrong) / std::max(1.0, std::fabs(wrong)) > 1e-6);
}

TEST_CASE("warm-started updates stay nonnegative") {
  NetworkConfig cfg = test::fig2();
  Rng rng(41);
  DualState dual = DualState::zeros(cfg);
  for (int t = 0; t < 200; ++t) {
    ControlDecision d = ControlDecision::zeros(cfg);
    for (const auto& n : cfg.nodes) {
      if (n.grid_connected()) {
        d.charge[n.id] = rng.uniform(0.0, 15.0);
        d.discharge[n.id] = rng.uniform(0.0, 15.0);
        d.grid_draw[n.id] = rng.uniform(0.0, 25.0);
      }
    }
    for (auto& dist : d.distortion) dist = rng.uniform(0.01, 0.8);
    for (auto& r : d.rate) r = rng.uniform(0.0, 10.0);
    dual = dual_update(cfg, dual, d, 0.5, 0.5);
    for (double l : dual.lambda) CHECK(l >= 0.0);
    for (const auto& rho : dual.rho) {
      for (double r : rho) CHECK(r >= 0.0);
    }
  }
}
