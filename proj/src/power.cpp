#include "hpwmsn/power.hpp"

#include <algorithm>
#include <cmath>

namespace hpwmsn {

namespace {

constexpr double kTinyPower = 1e-12;
constexpr double kLn2 = 0.6931471805599453;

struct LinkState {
  double denom;  // N + interference
  double cap;    // clamped capacity
  bool smooth;   // capacity strictly inside (0, X_max)
};

void eval_links(const PowerProblem& prob, const std::vector<double>& power,
                std::vector<LinkState>& state) {
  const auto& cfg = *prob.cfg;
  const auto& tables = *prob.tables;
  const auto& env = *prob.env;
  for (int l = 0; l < cfg.num_links(); ++l) {
    double denom = cfg.links[l].noise;
    for (const auto& term : tables.interference[l]) denom += term.coef * power[term.link];
    double gamma = env.channel_gain[l] * power[l] / denom;
    double raw = gamma > 1.0 ? cfg.params.bw * tables.alpha[l] * std::log2(gamma) : 0.0;
    state[l].denom = denom;
    state[l].cap = std::min(raw, cfg.params.x_max);
    state[l].smooth = gamma > 1.0 && raw < cfg.params.x_max;
  }
}

}  // namespace

double PowerProblem::objective(const std::vector<double>& power) const {
  std::vector<LinkState> state(cfg->num_links());
  eval_links(*this, power, state);
  double obj = 0.0;
  for (int l = 0; l < cfg->num_links(); ++l) {
    obj += weight[l] * state[l].cap + a_coef[cfg->links[l].from] * power[l];
  }
  return obj;
}

namespace {

// Gradient of the objective with respect to the log-powers of node n's
// outgoing links, evaluated at the current (linear) power vector.
void block_log_gradient(const PowerProblem& prob, NodeId n,
                        const std::vector<double>& power,
                        const std::vector<LinkState>& state,
                        std::vector<double>& grad_out) {
  const auto& cfg = *prob.cfg;
  const auto& tables = *prob.tables;
  grad_out.assign(cfg.out_links[n].size(), 0.0);
  for (size_t i = 0; i < cfg.out_links[n].size(); ++i) {
    LinkId l = cfg.out_links[n][i];
    double g = prob.a_coef[n];  // d/dp of A_n p
    if (power[l] > 0 && state[l].smooth) {
      g += prob.weight[l] * cfg.params.bw * tables.alpha[l] / (power[l] * kLn2);
    }
    for (const auto& term : tables.affects[l]) {
      if (!state[term.link].smooth || prob.weight[term.link] == 0) continue;
      g -= prob.weight[term.link] * cfg.params.bw * tables.alpha[term.link] * term.coef /
           (kLn2 * state[term.link].denom);
    }
    grad_out[i] = g * power[l];  // chain rule to the log domain
  }
}

void project_block(const NetworkConfig& cfg, NodeId n, std::vector<double>& power) {
  double pmax = cfg.nodes[n].p_max;
  double sum = 0.0;
  for (LinkId l : cfg.out_links[n]) {
    power[l] = std::clamp(power[l], 0.0, pmax);
    sum += power[l];
  }
  if (sum > pmax) {
    double scale = pmax / sum;
    for (LinkId l : cfg.out_links[n]) power[l] *= scale;
  }
}

// Refine node n's block by projected gradient ascent with backtracking.
// Returns the objective of the refined point.
double refine_block(const PowerProblem& prob, NodeId n, std::vector<double>& power,
                    int pg_iters) {
  const auto& cfg = *prob.cfg;
  std::vector<LinkState> state(cfg.num_links());
  std::vector<double> grad;
  double obj = prob.objective(power);
  double step = 1.0;
  for (int it = 0; it < pg_iters; ++it) {
    eval_links(prob, power, state);
    block_log_gradient(prob, n, power, state, grad);
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
    if (gnorm < 1e-13) break;

    bool improved = false;
    while (step >= 1e-10) {
      std::vector<double> trial = power;
      for (size_t i = 0; i < cfg.out_links[n].size(); ++i) {
        LinkId l = cfg.out_links[n][i];
        if (trial[l] > 0) trial[l] *= std::exp(step * grad[i] / (1.0 + gnorm));
      }
      project_block(cfg, n, trial);
      double trial_obj = prob.objective(trial);
      if (trial_obj > obj + 1e-14) {
        power.swap(trial);
        obj = trial_obj;
        improved = true;
        step = std::min(step * 1.5, 8.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return obj;
}

}  // namespace

PowerResult solve_power_allocation(const PowerProblem& prob,
                                   const std::vector<double>& warm_start,
                                   int max_sweeps, double improve_tol, int pg_iters,
                                   bool multi_start) {
  const auto& cfg = *prob.cfg;
  PowerResult res;
  res.power = warm_start;
  if (static_cast<int>(res.power.size()) != cfg.num_links()) {
    res.power.assign(cfg.num_links(), 0.0);
  }
  for (int l = 0; l < cfg.num_links(); ++l) res.power[l] = std::max(res.power[l], 0.0);
  for (int n = 0; n < cfg.num_nodes(); ++n) project_block(cfg, n, res.power);

  double obj = prob.objective(res.power);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double sweep_start = obj;
    for (int n = 0; n < cfg.num_nodes(); ++n) {
      if (cfg.out_links[n].empty()) continue;
      const auto& out = cfg.out_links[n];

      std::vector<std::vector<double>> starts;
      {
        std::vector<double> cur;
        for (LinkId l : out) cur.push_back(res.power[l]);
        starts.push_back(cur);
      }
      if (multi_start) {
        double pmax = cfg.nodes[n].p_max;
        starts.push_back(std::vector<double>(out.size(), pmax / out.size()));
        for (size_t i = 0; i < out.size(); ++i) {
          if (prob.weight[out[i]] <= 0) continue;
          std::vector<double> s(out.size(), 0.0);
          s[i] = pmax;
          starts.push_back(s);
        }
        starts.push_back(std::vector<double>(out.size(), 0.0));
      }

      std::vector<double> best = res.power;
      double best_obj = obj;
      for (const auto& start : starts) {
        std::vector<double> trial = res.power;
        for (size_t i = 0; i < out.size(); ++i) trial[out[i]] = start[i];
        project_block(cfg, n, trial);
        double trial_obj = refine_block(prob, n, trial, pg_iters);
        if (trial_obj > best_obj + 1e-14) {
          best = trial;
          best_obj = trial_obj;
        }
      }
      if (best_obj > obj) {
        res.power = best;
        obj = best_obj;
      }
    }
    res.sweeps = sweep + 1;
    if (obj - sweep_start < improve_tol) {
      res.converged = true;
      break;
    }
  }

  for (double& p : res.power) {
    if (p < kTinyPower) p = 0.0;
  }
  res.objective = prob.objective(res.power);
  return res;
}

}  // namespace hpwmsn
