#include "hpwmsn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpwmsn {

double beta_endpoint_limit(const SessionSpec& session, const Utility& utility,
                           double varpi1) {
  // L'Hopital at D -> D_max: numerator' = U'(D), denominator' = -1/(D ln 2).
  double dmax = session.d_max_distortion;
  return varpi1 * (-utility.derivative(dmax) * dmax * std::log(2.0));
}

double compute_beta_fn(double d_min, double d_max, double varpi1,
                       const std::function<double(double)>& u,
                       const std::function<double(double)>& u_prime) {
  double umax = u(d_max);
  double sup = 0.0;
  const int grid = 4096;
  for (int i = 0; i < grid; ++i) {
    double d = d_min + (d_max - d_min) * i / grid;
    double denom = std::log2(d_max) - std::log2(d);
    if (denom <= 0) continue;
    sup = std::max(sup, varpi1 * (u(d) - umax) / denom);
  }
  // Refine toward the endpoint, where the supremum lives for decreasing U.
  // Stop well before the floating-point cancellation floor of the ratio.
  for (int k = 1; k <= 20; ++k) {
    double d = d_max - (d_max - d_min) * std::pow(0.5, k);
    double denom = std::log2(d_max) - std::log2(d);
    if (denom <= 0) continue;
    sup = std::max(sup, varpi1 * (u(d) - umax) / denom);
  }
  sup = std::max(sup, varpi1 * (-u_prime(d_max) * d_max * std::log(2.0)));
  if (!std::isfinite(sup)) throw std::runtime_error("compute_beta: non-finite supremum");
  return sup;
}

double compute_beta(const SessionSpec& session, const Utility& utility, double varpi1) {
  return compute_beta_fn(
      session.d_min, session.d_max_distortion, varpi1,
      [&](double d) { return utility(d); }, [&](double d) { return utility.derivative(d); });
}

double compute_sigma(const NetworkConfig& cfg) {
  double sigma = 1.0;
  for (const auto& s : cfg.sessions) sigma = std::min(sigma, s.sense_cost);
  for (const auto& n : cfg.nodes) sigma = std::min(sigma, n.p_recv_cost);
  if (sigma <= 0) throw std::runtime_error("sigma must be positive");
  return sigma;
}

double compute_epsilon(const NetworkConfig& cfg) {
  return cfg.params.l_max * cfg.params.x_max + cfg.params.r_max;
}

double compute_b_const(const NetworkConfig& cfg) {
  const double lmax = cfg.params.l_max;
  const double xmax = cfg.params.x_max;
  const double b_q = 1.5 * lmax * lmax * xmax * xmax + 0.5 * cfg.params.r_max * cfg.params.r_max;
  double b = static_cast<double>(cfg.num_commodities()) * cfg.num_nodes() * b_q;
  for (const auto& n : cfg.nodes) {
    switch (n.power_class) {
      case PowerClass::EH: {
        double pt = cfg.p_total_max(n.id);
        b += 0.5 * n.harvest_max * n.harvest_max + 0.5 * pt * pt;
        break;
      }
      case PowerClass::ME: {
        double in = n.harvest_max + n.g_max;
        b += 0.5 * in * in + 0.5 * n.d_max * n.d_max;
        break;
      }
      case PowerClass::EG:
        b += 0.5 * n.g_max * n.g_max + 0.5 * n.d_max * n.d_max;
        break;
      case PowerClass::None:
        break;
    }
  }
  return b;
}

LyapunovParams compute_perturbations(const NetworkConfig& cfg, double v) {
  LyapunovParams p;
  p.v = v;
  p.delta = cfg.params.delta;
  double beta = 0.0;
  for (const auto& s : cfg.sessions) {
    beta = std::max(beta, compute_beta(s, cfg.params.utility, cfg.params.varpi1));
  }
  p.beta = beta;
  p.sigma = compute_sigma(cfg);
  p.epsilon = compute_epsilon(cfg);
  p.b_const = compute_b_const(cfg);

  const double ns = cfg.total_sources();
  const double nd = cfg.total_sinks();
  const double eh_slope = std::max(1.0 / p.sigma, p.delta * cfg.params.bw) * ns * nd * beta;
  const double gm_slope = beta / p.sigma;

  p.theta.assign(cfg.num_nodes(), 0.0);
  p.p_total_max.assign(cfg.num_nodes(), 0.0);
  for (const auto& n : cfg.nodes) {
    p.p_total_max[n.id] = cfg.p_total_max(n.id);
    switch (n.power_class) {
      case PowerClass::EH:
        if (cfg.theta_override.eh) {
          p.theta[n.id] = cfg.theta_override.eh->first * v + cfg.theta_override.eh->second;
        } else {
          p.theta[n.id] = eh_slope * v + p.p_total_max[n.id];
        }
        break;
      case PowerClass::EG:
        if (cfg.theta_override.eg) {
          p.theta[n.id] = cfg.theta_override.eg->first * v + cfg.theta_override.eg->second;
        } else {
          p.theta[n.id] = gm_slope * v + n.d_max;
        }
        break;
      case PowerClass::ME:
        if (cfg.theta_override.em) {
          p.theta[n.id] = cfg.theta_override.em->first * v + cfg.theta_override.em->second;
        } else {
          p.theta[n.id] = gm_slope * v + n.d_max;
        }
        break;
      case PowerClass::None:
        break;
    }
  }

  // Theorem premises; violated only by a pathological override.
  for (const auto& n : cfg.nodes) {
    if (n.power_class == PowerClass::EH && v > 0 && p.theta[n.id] <= p.p_total_max[n.id]) {
      throw std::runtime_error("theta^eH must exceed P^Total_max at node " + n.name);
    }
    if (n.grid_connected() && v > 0 && p.theta[n.id] <= n.d_max) {
      throw std::runtime_error("theta^eG/eM must exceed d_max at node " + n.name);
    }
  }
  return p;
}

double compute_A(const NetworkConfig& cfg, const LyapunovParams& params, NodeId n,
                 const EnergyQueueBank& energy, const std::vector<double>& lambda) {
  switch (cfg.nodes[n].power_class) {
    case PowerClass::EH: return energy.e[n] - params.theta[n];
    case PowerClass::EG:
    case PowerClass::ME: return -lambda[n];
    case PowerClass::None: return 0.0;
  }
  return 0.0;
}

LinkWeight link_weights(const NetworkConfig& cfg, const LyapunovParams& params, LinkId link,
                        SessionId f, const DataQueueBank& data,
                        const std::vector<double>& a_coef) {
  const LinkSpec& l = cfg.links[link];
  const SessionSpec& s = cfg.sessions[f];
  const int first = cfg.commodity_offset[f];
  const int count = static_cast<int>(s.sources.size() * s.sinks.size());
  double w = 0.0;
  for (int c = first; c < first + count; ++c) {
    w += data.at(cfg, c, l.from) - data.at(cfg, c, l.to);
  }
  w += a_coef[l.to] * cfg.nodes[l.to].p_recv_cost;
  double pairs = static_cast<double>(s.sources.size()) * static_cast<double>(s.sinks.size());
  double clamped = std::max(0.0, w - pairs * params.epsilon);
  return {w, clamped};
}

}  // namespace hpwmsn
