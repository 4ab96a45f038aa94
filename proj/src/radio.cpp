#include "hpwmsn/radio.hpp"

#include <algorithm>
#include <cmath>

namespace hpwmsn {

double success_probability(const NetworkConfig& cfg, LinkId link) {
  const LinkSpec& l = cfg.links[link];
  double alpha = l.q;
  for (LinkId in : cfg.in_links[l.from]) {
    alpha *= 1.0 - cfg.links[in].q;
  }
  double q_out = 0.0;
  for (LinkId out : cfg.out_links[l.to]) q_out += cfg.links[out].q;
  alpha *= 1.0 - q_out;
  return std::clamp(alpha, 0.0, 1.0);
}

RadioTables RadioTables::build(const NetworkConfig& cfg) {
  RadioTables t;
  t.alpha.resize(cfg.num_links());
  t.interference.resize(cfg.num_links());
  t.affects.resize(cfg.num_links());
  for (const auto& l : cfg.links) {
    t.alpha[l.id] = success_probability(cfg, l.id);
    for (LinkId j : l.interferers) {
      const LinkSpec& other = cfg.links[j];
      // Static tx->rx gain; interference paths do not fade.
      double gain = cfg.gain(other.from, l.to);
      if (gain <= 0.0) continue;  // no known path from interferer to receiver
      InterfererTerm term{j, gain * other.q};
      t.interference[l.id].push_back(term);
      t.affects[j].push_back({l.id, term.coef});
    }
  }
  return t;
}

namespace {

double interference_power(const RadioTables& tables, LinkId link,
                          const std::vector<double>& powers) {
  double acc = 0.0;
  for (const auto& term : tables.interference[link]) {
    acc += term.coef * powers[term.link];
  }
  return acc;
}

}  // namespace

double sinr_linear(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                   const std::vector<double>& powers, const EnvironmentState& env) {
  const LinkSpec& l = cfg.links[link];
  double denom = l.noise + interference_power(tables, link, powers);
  return env.channel_gain[link] * powers[link] / denom;
}

double sinr(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
            const std::vector<double>& log_powers, const EnvironmentState& env) {
  std::vector<double> powers(log_powers.size());
  for (size_t i = 0; i < log_powers.size(); ++i) powers[i] = std::exp(log_powers[i]);
  return sinr_linear(cfg, tables, link, powers, env);
}

double link_capacity_linear(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                            const std::vector<double>& powers, const EnvironmentState& env) {
  double gamma = sinr_linear(cfg, tables, link, powers, env);
  if (gamma <= 1.0) return 0.0;
  double c = cfg.params.bw * tables.alpha[link] * std::log2(gamma);
  return std::min(c, cfg.params.x_max);
}

double link_capacity(const NetworkConfig& cfg, const RadioTables& tables, LinkId link,
                     const std::vector<double>& log_powers, const EnvironmentState& env) {
  std::vector<double> powers(log_powers.size());
  for (size_t i = 0; i < log_powers.size(); ++i) powers[i] = std::exp(log_powers[i]);
  return link_capacity_linear(cfg, tables, link, powers, env);
}

double conditional_entropy(const SessionSpec& session, int subset_mask) {
  if (subset_mask < 1 || subset_mask > session.num_subsets()) {
    throw ConfigError("conditional_entropy: unknown subset mask " + std::to_string(subset_mask));
  }
  return session.entropy(subset_mask);
}

}  // namespace hpwmsn
