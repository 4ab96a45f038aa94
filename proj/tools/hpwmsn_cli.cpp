// Command-line front end: run / sweep / verify / derive-constants.
//
// Outputs per run: trace.csv (one row per slot), summary.json, constants.json.
// Sweeps additionally write tradeoff.csv with one row per (V, seed).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "hpwmsn/lyapunov.hpp"
#include "hpwmsn/sim.hpp"
#include "hpwmsn/trace_io.hpp"
#include "hpwmsn/verify.hpp"

namespace fs = std::filesystem;
using namespace hpwmsn;

namespace {

std::vector<double> parse_v_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

void apply_theta_override(NetworkConfig& cfg, const std::vector<std::string>& specs) {
  for (const auto& spec : specs) {
    auto eq = spec.find('=');
    auto comma = spec.find(',', eq);
    if (eq == std::string::npos || comma == std::string::npos) {
      throw ConfigError("--theta-override expects KEY=SLOPE,CONST (e.g. eH=224,38)");
    }
    std::string key = spec.substr(0, eq);
    double slope = std::stod(spec.substr(eq + 1, comma - eq - 1));
    double cnst = std::stod(spec.substr(comma + 1));
    if (key == "eH") {
      cfg.theta_override.eh = {slope, cnst};
    } else if (key == "eG") {
      cfg.theta_override.eg = {slope, cnst};
    } else if (key == "eM") {
      cfg.theta_override.em = {slope, cnst};
    } else {
      throw ConfigError("--theta-override key must be eH, eG or eM");
    }
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("HPWMSN_OUT");
  return env ? env : "out";
}

int do_run(const NetworkConfig& cfg, double v, long slots, std::uint64_t seed,
           const std::string& out_dir, const RunOptions& opts) {
  fs::create_directories(out_dir);
  LyapunovParams params = compute_perturbations(cfg, v);
  write_constants_json(out_dir + "/constants.json", cfg, params);
  std::cout << constants_to_json(cfg, params) << std::endl;

  TraceWriter writer(out_dir + "/trace.csv", cfg);
  RunOptions local = opts;
  local.on_slot = [&](const SlotTrace& t) { writer.write(t); };
  RunSummary summary = run(cfg, v, slots, seed, local);
  writer.close();
  write_summary_json(out_dir + "/summary.json", cfg, summary);

  std::cout << "run complete: V=" << v << " slots=" << slots << " seed=" << seed
            << "\n  avg objective (post-warmup) = " << summary.avg_objective_postwarmup
            << "\n  avg total backlog (post-warmup) = " << summary.avg_total_backlog_postwarmup
            << "\n  violations: availability=" << summary.availability_violations
            << " bounds=" << summary.bound_violations
            << " lemma1=" << summary.lemma1_violations << std::endl;
  bool clean = summary.availability_violations == 0 && summary.bound_violations == 0 &&
               summary.lemma1_violations == 0;
  return clean ? 0 : 1;
}

int do_sweep(const NetworkConfig& cfg, const std::vector<double>& v_list,
             const std::vector<std::uint64_t>& seeds, long slots, const std::string& out_dir,
             const RunOptions& opts) {
  fs::create_directories(out_dir);
  std::vector<SweepPoint> points;
  for (double v : v_list) {
    for (auto seed : seeds) points.push_back({v, seed});
  }
  std::vector<RunSummary> summaries = sweep(cfg, points, slots, opts);

  std::ofstream trade(out_dir + "/tradeoff.csv");
  trade << "V,seed,avg_objective_postwarmup,avg_total_backlog_postwarmup,"
           "avg_objective,avg_total_backlog,violations\n";
  bool clean = true;
  for (size_t i = 0; i < points.size(); ++i) {
    const RunSummary& s = summaries[i];
    long viol = s.availability_violations + s.bound_violations + s.lemma1_violations;
    clean = clean && viol == 0;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%ld\n", s.v,
                  static_cast<unsigned long long>(s.seed), s.avg_objective_postwarmup,
                  s.avg_total_backlog_postwarmup, s.avg_objective, s.avg_total_backlog, viol);
    trade << buf;
    std::ostringstream name;
    name << out_dir << "/summary_v" << s.v << "_s" << s.seed << ".json";
    write_summary_json(name.str(), cfg, s);
  }
  std::cout << "sweep complete: " << points.size() << " runs, results in " << out_dir
            << "/tradeoff.csv" << std::endl;
  return clean ? 0 : 1;
}

int do_verify(const NetworkConfig& cfg, double v, const std::string& trace_path,
              double warmup_fraction, const std::string& summary_path) {
  LyapunovParams params = compute_perturbations(cfg, v);
  TraceTable trace = read_trace(trace_path);
  auto bound_problems = verify::check_theorem2_bounds(cfg, params, trace);
  auto lemma_problems = verify::check_lemma1(cfg, params, trace);
  for (const auto& p : bound_problems) std::cerr << "bound: " << p << '\n';
  for (const auto& p : lemma_problems) std::cerr << "lemma1: " << p << '\n';

  int mismatches = 0;
  if (!summary_path.empty()) {
    TraceAggregates agg = aggregate_trace(cfg, trace, warmup_fraction);
    std::ifstream in(summary_path);
    if (!in) {
      std::cerr << "cannot open summary: " << summary_path << '\n';
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto j = nlohmann::json::parse(buf.str());
    auto check = [&](const char* key, double got) {
      double want = j.at(key).get<double>();
      if (!(std::fabs(want - got) <= 1e-12 * std::max(1.0, std::fabs(want)))) {
        std::cerr << "summary mismatch for " << key << ": summary=" << want
                  << " recomputed=" << got << '\n';
        ++mismatches;
      }
    };
    check("avg_objective", agg.avg_objective);
    check("avg_objective_postwarmup", agg.avg_objective_postwarmup);
    check("avg_total_backlog", agg.avg_total_backlog);
    check("avg_total_backlog_postwarmup", agg.avg_total_backlog_postwarmup);
  }

  bool ok = bound_problems.empty() && lemma_problems.empty() && mismatches == 0;
  std::cout << "verify: " << trace.rows.size() << " slots, "
            << bound_problems.size() + lemma_problems.size() << " bound violations, "
            << mismatches << " summary mismatches -> " << (ok ? "OK" : "FAIL") << std::endl;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-layer control simulator for heterogeneously powered multimedia sensor networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir = default_out_dir(), trace_path, summary_path;
  double v = 100.0;
  std::string v_list_text = "50,100,200,500";
  std::string seeds_text = "1";
  long slots = 20000;
  std::uint64_t seed = 1;
  double warmup = 0.1;
  bool tolerate = false, defensive = false;
  std::vector<std::string> theta_specs;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "network config file")->required();
    cmd->add_option("--theta-override", theta_specs,
                    "override theta as KEY=SLOPE,CONST (repeatable; keys eH/eG/eM)");
    cmd->add_flag("--defensive-clamp", defensive,
                  "cap information outflows at the backlog instead of aborting");
    cmd->add_flag("--tolerate", tolerate, "log violations instead of aborting");
    cmd->add_option("--warmup-fraction", warmup, "fraction of slots excluded from averages");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "single simulation run");
  add_config(cmd_run);
  cmd_run->add_option("--v", v, "penalty parameter V")->required();
  cmd_run->add_option("--slots", slots, "number of time slots");
  cmd_run->add_option("--seed", seed, "rng seed");
  cmd_run->add_option("--out", out_dir, "output directory");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "V sweep");
  add_config(cmd_sweep);
  cmd_sweep->add_option("--v", v_list_text, "comma-separated V list");
  cmd_sweep->add_option("--seeds", seeds_text, "comma-separated seed list");
  cmd_sweep->add_option("--slots", slots, "number of time slots");
  cmd_sweep->add_option("--out", out_dir, "output directory");

  CLI::App* cmd_verify = app.add_subcommand("verify", "check a recorded trace");
  add_config(cmd_verify);
  cmd_verify->add_option("--v", v, "V the trace was produced with")->required();
  cmd_verify->add_option("--trace", trace_path, "trace.csv to verify")->required();
  cmd_verify->add_option("--summary", summary_path, "summary.json to cross-check");

  CLI::App* cmd_const = app.add_subcommand("derive-constants", "print derived constants");
  add_config(cmd_const);
  cmd_const->add_option("--v", v, "penalty parameter V");

  CLI11_PARSE(app, argc, argv);

  try {
    NetworkConfig cfg = load_config(config_path);
    apply_theta_override(cfg, theta_specs);
    if (defensive) cfg.params.defensive_clamp = true;

    RunOptions opts;
    opts.warmup_fraction = warmup;
    opts.tolerate = tolerate;

    if (cmd_run->parsed()) return do_run(cfg, v, slots, seed, out_dir, opts);
    if (cmd_sweep->parsed()) {
      std::vector<std::uint64_t> seeds;
      for (double s : parse_v_list(seeds_text)) seeds.push_back(static_cast<std::uint64_t>(s));
      return do_sweep(cfg, parse_v_list(v_list_text), seeds, slots, out_dir, opts);
    }
    if (cmd_verify->parsed()) return do_verify(cfg, v, trace_path, warmup, summary_path);
    if (cmd_const->parsed()) {
      LyapunovParams params = compute_perturbations(cfg, v);
      std::cout << constants_to_json(cfg, params) << std::endl;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
