#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hpwmsn/config.hpp"

namespace hpwmsn {

// Deterministic RNG. mt19937_64 output is pinned by the standard and the
// double mapping is explicit, so traces replay bit-identically for a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double next_unit() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Exogenous part of Z(t): channel gains S^C, harvestable energy S^H,
// electricity prices S^G. Entries for nodes outside the relevant class are 0.
struct EnvironmentState {
  std::vector<double> channel_gain;  // per link
  std::vector<double> harvestable;   // per node (EH/ME)
  std::vector<double> price;         // per node (EG/ME)
};

// Draws one slot of environment state. Gains are distance^-4, optionally
// scaled by an i.i.d. fading factor when the config enables it. Harvest and
// price entries are sampled in node-index order.
EnvironmentState sample_environment(const NetworkConfig& cfg, Rng& rng);

}  // namespace hpwmsn
