#include "hpwmsn/env.hpp"

#include <cmath>

namespace hpwmsn {

EnvironmentState sample_environment(const NetworkConfig& cfg, Rng& rng) {
  EnvironmentState env;
  env.channel_gain.resize(cfg.num_links());
  for (const auto& l : cfg.links) {
    double gain = std::pow(l.distance, -4.0);
    if (cfg.params.fading) {
      gain *= rng.uniform(cfg.params.fading_min, cfg.params.fading_max);
    }
    env.channel_gain[l.id] = gain;
  }
  env.harvestable.assign(cfg.num_nodes(), 0.0);
  for (const auto& n : cfg.nodes) {
    if (n.harvests()) {
      env.harvestable[n.id] = rng.uniform(n.harvest_min, n.harvest_max);
    }
  }
  env.price.assign(cfg.num_nodes(), 0.0);
  for (const auto& n : cfg.nodes) {
    if (n.grid_connected()) {
      env.price[n.id] = rng.uniform(cfg.params.s_g_min, cfg.params.s_g_max);
    }
  }
  return env;
}

}  // namespace hpwmsn
