#include "hpwmsn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "hpwmsn/power.hpp"
#include "hpwmsn/schedule.hpp"
#include "hpwmsn/subproblems.hpp"

namespace hpwmsn {

SlotSolveResult solve_slot(const SlotSolveContext& ctx, const DualState& dual,
                           const std::vector<double>& power_warm, bool multi_start) {
  const NetworkConfig& cfg = *ctx.cfg;
  const LyapunovParams& params = *ctx.params;
  SlotSolveResult out;
  out.decision = ControlDecision::zeros(cfg);
  ControlDecision& d = out.decision;

  out.a_coef.resize(cfg.num_nodes());
  for (int n = 0; n < cfg.num_nodes(); ++n) {
    out.a_coef[n] = compute_A(cfg, params, n, *ctx.energy, dual.lambda);
  }

  // Energy-side subproblems: bang-bang in each scalar.
  for (const auto& n : cfg.nodes) {
    double stored = ctx.energy->e[n.id];
    switch (n.power_class) {
      case PowerClass::EH:
        d.harvest[n.id] = solve_eh_harvest(stored, params.theta[n.id],
                                           ctx.env->harvestable[n.id]);
        break;
      case PowerClass::ME: {
        auto hc = solve_me_harvest_charge(stored, params.theta[n.id], dual.lambda[n.id],
                                          ctx.env->harvestable[n.id], n.g_max);
        d.harvest[n.id] = hc.harvest;
        d.charge[n.id] = hc.charge;
        auto dp = solve_me_discharge_purchase(stored, params.theta[n.id], dual.lambda[n.id],
                                              ctx.env->price[n.id], params.v,
                                              cfg.params.varpi1, cfg.params.varpi2,
                                              n.d_max, n.y_max);
        d.discharge[n.id] = dp.discharge;
        d.grid_draw[n.id] = dp.grid_draw;
        break;
      }
      case PowerClass::EG: {
        auto eg = solve_eg(stored, params.theta[n.id], dual.lambda[n.id],
                           ctx.env->price[n.id], params.v, cfg.params.varpi1,
                           cfg.params.varpi2, n.g_max, n.d_max, n.y_max);
        d.charge[n.id] = eg.charge;
        d.discharge[n.id] = eg.discharge;
        d.grid_draw[n.id] = eg.grid_draw;
        break;
      }
      case PowerClass::None:
        break;
    }
  }

  // Distortion and source rate, per (session, source).
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      int slot = cfg.source_slot_index(s.id, static_cast<int>(si));
      NodeId n = s.sources[si];
      double rho_sum = dual.rho_sum(cfg, s.id, static_cast<int>(si));
      d.distortion[slot] =
          solve_distortion(cfg.params.utility, params.v * cfg.params.varpi1, rho_sum,
                           s.d_min, s.d_max_distortion, cfg.solver.golden_tol);
      double queue_sum = 0.0;
      for (size_t di = 0; di < s.sinks.size(); ++di) {
        int c = cfg.commodity_index(s.id, static_cast<int>(si), static_cast<int>(di));
        queue_sum += ctx.data->at(cfg, c, n);
      }
      d.rate[slot] = solve_source_rate(rho_sum, queue_sum, out.a_coef[n], s.sense_cost,
                                       s.r_max);
    }
  }

  // Max-weight link weights, then the power allocation.
  out.weight.assign(cfg.num_links(), 0.0);
  for (const auto& l : cfg.links) {
    double best = 0.0;
    for (const auto& s : cfg.sessions) {
      best = std::max(best,
                      link_weights(cfg, params, l.id, s.id, *ctx.data, out.a_coef).w_clamped);
    }
    out.weight[l.id] = best;
  }
  PowerProblem prob{&cfg, ctx.tables, ctx.env, out.weight, out.a_coef};
  PowerResult pres = solve_power_allocation(prob, power_warm, cfg.solver.bcd_sweeps_max,
                                            cfg.solver.bcd_improve_tol,
                                            cfg.solver.block_pg_iters, multi_start);
  d.power = pres.power;
  out.power_objective = pres.objective;
  out.bcd_sweeps = pres.sweeps;
  out.power_converged = pres.converged;

  out.capacity.resize(cfg.num_links());
  for (int l = 0; l < cfg.num_links(); ++l) {
    out.capacity[l] = link_capacity_linear(cfg, *ctx.tables, l, d.power, *ctx.env);
  }

  ScheduleDecision sched = schedule(cfg, params, out.capacity, *ctx.data, out.a_coef);
  d.chosen_session = sched.chosen_session;
  d.phys_flow = sched.phys_flow;
  d.info_flow = sched.info_flow;
  return out;
}

namespace {

double objective_value(const NetworkConfig& cfg, const EnvironmentState& env,
                       const ControlDecision& d) {
  double utility = 0.0;
  for (const auto& s : cfg.sessions) {
    for (size_t si = 0; si < s.sources.size(); ++si) {
      utility += cfg.params.utility(d.distortion[cfg.source_slot_index(s.id, si)]);
    }
  }
  double cost = 0.0;
  for (const auto& n : cfg.nodes) {
    if (n.grid_connected()) cost += env.price[n.id] * d.grid_draw[n.id];
  }
  return cfg.params.varpi1 * utility - (1.0 - cfg.params.varpi1) * cfg.params.varpi2 * cost;
}

struct BoundChecker {
  const NetworkConfig& cfg;
  const LyapunovParams& params;

  std::vector<std::string> check_queues(const DataQueueBank& data,
                                        const EnergyQueueBank& energy, long slot) const {
    std::vector<std::string> out;
    const double qb = params.beta * params.v + cfg.params.r_max + 1e-9;
    for (int c = 0; c < cfg.num_commodities(); ++c) {
      for (int n = 0; n < cfg.num_nodes(); ++n) {
        if (data.at(cfg, c, n) > qb) {
          std::ostringstream os;
          os << "slot " << slot << ": Q[" << cfg.nodes[n].name << ",c" << c << "]="
             << data.at(cfg, c, n) << " exceeds beta V + R_max=" << qb;
          out.push_back(os.str());
        }
      }
    }
    for (const auto& n : cfg.nodes) {
      double e = energy.e[n.id];
      double cap = 0.0;
      switch (n.power_class) {
        case PowerClass::EH: cap = params.theta[n.id]; break;
        case PowerClass::EG: cap = params.theta[n.id] + n.g_max; break;
        case PowerClass::ME: cap = params.theta[n.id] + n.g_max + n.harvest_max; break;
        case PowerClass::None: continue;
      }
      if (e > cap + 1e-9) {
        std::ostringstream os;
        os << "slot " << slot << ": E[" << n.name << "]=" << e << " exceeds bound " << cap;
        out.push_back(os.str());
      }
    }
    return out;
  }

  std::vector<std::string> check_lemma1(const DualState& dual, long slot) const {
    std::vector<std::string> out;
    const double tol = 1e-3 * params.beta * params.v;
    const double lambda_bound = params.beta * params.v / params.sigma + tol;
    for (const auto& n : cfg.nodes) {
      if (n.grid_connected() && dual.lambda[n.id] > lambda_bound) {
        std::ostringstream os;
        os << "slot " << slot << ": lambda[" << n.name << "]=" << dual.lambda[n.id]
           << " exceeds beta V / sigma";
        out.push_back(os.str());
      }
    }
    const double rho_bound = params.beta * params.v + tol;
    for (const auto& s : cfg.sessions) {
      for (size_t si = 0; si < s.sources.size(); ++si) {
        double sum = dual.rho_sum(cfg, s.id, static_cast<int>(si));
        if (sum > rho_bound) {
          std::ostringstream os;
          os << "slot " << slot << ": rho sum for (f=" << s.id << ", src "
             << cfg.nodes[s.sources[si]].name << ")=" << sum << " exceeds beta V";
          out.push_back(os.str());
        }
      }
    }
    return out;
  }

  // Theorem 2 Part D made executable: every positive information flow
  // originates from a backlog above l_max X_max.
  std::vector<std::string> check_part_d(const DataQueueBank& data,
                                        const ControlDecision& d, long slot) const {
    std::vector<std::string> out;
    const double floor_q = cfg.params.l_max * cfg.params.x_max;
    for (const auto& l : cfg.links) {
      for (int c = 0; c < cfg.num_commodities(); ++c) {
        if (d.info(cfg, l.id, c) > 0 && data.at(cfg, c, l.from) <= floor_q - 1e-9) {
          std::ostringstream os;
          os << "slot " << slot << ": flow on " << cfg.nodes[l.from].name << "->"
             << cfg.nodes[l.to].name << " with backlog " << data.at(cfg, c, l.from)
             << " <= l_max X_max";
          out.push_back(os.str());
        }
      }
    }
    return out;
  }
};

}  // namespace

RunSummary run(const NetworkConfig& cfg, double v, long slots, std::uint64_t seed,
               const RunOptions& opts) {
  if (slots < 1) throw SimError("run: slots must be >= 1");
  LyapunovParams params = compute_perturbations(cfg, v);
  RadioTables tables = RadioTables::build(cfg);
  Rng rng(seed);

  DataQueueBank data = DataQueueBank::zeros(cfg);
  EnergyQueueBank energy = EnergyQueueBank::zeros(cfg);
  if (cfg.params.initial_energy == InitialEnergy::Theta) {
    for (const auto& n : cfg.nodes) {
      if (n.power_class != PowerClass::None) energy.e[n.id] = params.theta[n.id];
    }
  }
  DualState dual = DualState::zeros(cfg);
  std::vector<double> power_warm(cfg.num_links(), 0.0);

  RunSummary sum;
  sum.v = v;
  sum.slots = slots;
  sum.seed = seed;
  sum.warmup_fraction = opts.warmup_fraction;
  sum.delivered.assign(cfg.num_commodities(), 0.0);
  const long warmup = static_cast<long>(opts.warmup_fraction * slots);

  BoundChecker checker{cfg, params};
  double obj_acc = 0.0, obj_acc_post = 0.0;
  double backlog_acc = 0.0, backlog_acc_post = 0.0;

  auto handle = [&](const std::vector<std::string>& problems, long& counter) {
    counter += static_cast<long>(problems.size());
    if (!problems.empty() && !opts.tolerate) {
      throw SimError(problems.front());
    }
  };

  for (long t = 0; t < slots; ++t) {
    EnvironmentState env = sample_environment(cfg, rng);
    SlotSolveContext ctx{&cfg, &tables, &params, &env, &data, &energy};

    // Inner dual loop. The linear rate subproblem chatters between its box
    // vertices around the multiplier fixed point, so the committed rate is
    // the running average of the primal iterates (every averaged r > 0 still
    // implies some iterate passed the backpressure gate at this slot's
    // queue state, which is what the queue-bound argument needs). The
    // committed distortion is re-solved at the iteration-averaged rho.
    int iters = 0;
    SlotSolveResult solved;
    std::vector<double> rate_acc(cfg.num_source_slots(), 0.0);
    std::vector<double> rho_acc(cfg.num_source_slots(), 0.0);
    for (; iters < cfg.solver.dual_iters_max; ++iters) {
      solved = solve_slot(ctx, dual, power_warm, iters == 0);
      power_warm = solved.decision.power;
      for (int i = 0; i < cfg.num_source_slots(); ++i) {
        rate_acc[i] += solved.decision.rate[i];
      }
      for (const auto& s : cfg.sessions) {
        for (size_t si = 0; si < s.sources.size(); ++si) {
          rho_acc[cfg.source_slot_index(s.id, static_cast<int>(si))] +=
              dual.rho_sum(cfg, s.id, static_cast<int>(si));
        }
      }
      double k_l = cfg.solver.kappa0_lambda / std::sqrt(iters + 1.0);
      double k_r = cfg.solver.kappa0_rho / std::sqrt(iters + 1.0);
      DualState next = dual_update(cfg, dual, solved.decision, k_l, k_r);
      double move_max = 0.0;
      for (int n = 0; n < cfg.num_nodes(); ++n) {
        move_max = std::max(move_max, std::fabs(next.lambda[n] - dual.lambda[n]));
      }
      for (const auto& s : cfg.sessions) {
        for (int m = 0; m < s.num_subsets(); ++m) {
          move_max = std::max(move_max, std::fabs(next.rho[s.id][m] - dual.rho[s.id][m]));
        }
      }
      dual = next;
      if (move_max <= cfg.solver.dual_stop_tol * (1.0 + params.beta * v)) {
        ++iters;
        break;
      }
    }
    // Commit at the final multipliers, with averaged rates and distortions.
    solved = solve_slot(ctx, dual, power_warm, true);
    power_warm = solved.decision.power;
    ControlDecision& d = solved.decision;
    for (const auto& s : cfg.sessions) {
      for (size_t si = 0; si < s.sources.size(); ++si) {
        int slot_idx = cfg.source_slot_index(s.id, static_cast<int>(si));
        d.rate[slot_idx] = rate_acc[slot_idx] / iters;
        d.distortion[slot_idx] =
            solve_distortion(cfg.params.utility, params.v * cfg.params.varpi1,
                             rho_acc[slot_idx] / iters, s.d_min, s.d_max_distortion,
                             cfg.solver.golden_tol);
      }
    }

    // Physical grid accounting: y covers g - d + p^Total within its box.
    for (const auto& n : cfg.nodes) {
      if (n.grid_connected()) {
        double need = grid_draw_required(cfg, n.id, d);
        d.grid_draw[n.id] = std::clamp(need, 0.0, n.y_max);
      }
    }

    SlotTrace trace;
    trace.slot = t;
    trace.objective = objective_value(cfg, env, d);
    trace.dual_iters = iters;
    trace.bcd_sweeps = solved.bcd_sweeps;
    trace.power_converged = solved.power_converged;
    trace.violations = availability_check(cfg, data, energy, d, t);

    sum.availability_violations += static_cast<long>(trace.violations.size());
    if (!trace.violations.empty() && !opts.tolerate) {
      throw SimError("slot " + std::to_string(t) + ": " +
                     trace.violations.front().describe(cfg));
    }
    if (opts.check_bounds) {
      handle(checker.check_part_d(data, d, t), sum.bound_violations);
      handle(checker.check_lemma1(dual, t), sum.lemma1_violations);
    }

    // Accumulate with Q(t), E(t) snapshots, then advance.
    double backlog = 0.0;
    for (double q : data.q) backlog += q;
    obj_acc += trace.objective;
    backlog_acc += backlog;
    if (t >= warmup) {
      obj_acc_post += trace.objective;
      backlog_acc_post += backlog;
    }
    for (double q : data.q) sum.max_data_queue = std::max(sum.max_data_queue, q);
    for (const auto& n : cfg.nodes) {
      double e = energy.e[n.id];
      if (n.power_class == PowerClass::EH) sum.max_energy_eh = std::max(sum.max_energy_eh, e);
      if (n.power_class == PowerClass::EG) sum.max_energy_eg = std::max(sum.max_energy_eg, e);
      if (n.power_class == PowerClass::ME) sum.max_energy_em = std::max(sum.max_energy_em, e);
    }
    double util = 0.0;
    for (const auto& s : cfg.sessions) {
      for (size_t si = 0; si < s.sources.size(); ++si) {
        util += cfg.params.utility(d.distortion[cfg.source_slot_index(s.id, si)]);
      }
    }
    sum.total_utility += util;
    for (const auto& n : cfg.nodes) {
      if (n.grid_connected()) sum.total_grid_cost += env.price[n.id] * d.grid_draw[n.id];
    }

    if (opts.on_slot) {
      trace.env = env;
      trace.decision = d;
      trace.data = data;
      trace.energy = energy;
      trace.dual = dual;
      opts.on_slot(trace);
    }

    int clamped = 0;
    data = step_data_queue(cfg, data, d, t, &clamped);
    sum.defensive_clamps += clamped;
    energy = step_energy_queue(cfg, energy, d, t);

    if (opts.check_bounds) {
      handle(checker.check_queues(data, energy, t + 1), sum.bound_violations);
    }
  }

  for (int c = 0; c < cfg.num_commodities(); ++c) sum.delivered[c] = data.delivered[c];
  sum.avg_objective = obj_acc / slots;
  sum.avg_total_backlog = backlog_acc / slots;
  long post = slots - warmup;
  sum.avg_objective_postwarmup = post > 0 ? obj_acc_post / post : 0.0;
  sum.avg_total_backlog_postwarmup = post > 0 ? backlog_acc_post / post : 0.0;
  return sum;
}

std::vector<RunSummary> sweep(const NetworkConfig& cfg, const std::vector<SweepPoint>& points,
                              long slots, const RunOptions& opts, int threads) {
  std::vector<RunSummary> out(points.size());
  std::vector<std::string> errors(points.size());
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));

  std::mutex m;
  size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(m);
        if (next >= points.size()) return;
        i = next++;
      }
      try {
        out[i] = run(cfg, points[i].v, slots, points[i].seed, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) {
      throw SimError("sweep point (v=" + std::to_string(points[i].v) + ", seed=" +
                     std::to_string(points[i].seed) + "): " + errors[i]);
    }
  }
  return out;
}

}  // namespace hpwmsn
