#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "hpwmsn/lyapunov.hpp"
#include "hpwmsn/sim.hpp"

namespace hpwmsn {

// Streaming CSV trace writer. One row per slot; doubles are printed with
// %.17g so values round-trip bit-exactly through the file. Column order is
// stable: t, O, diagnostics, queues, energies, energy decisions, prices,
// rates, distortions, multipliers, violations.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, const NetworkConfig& cfg);
  void write(const SlotTrace& trace);
  void close();

  static std::vector<std::string> columns(const NetworkConfig& cfg);

 private:
  const NetworkConfig& cfg_;
  std::ofstream out_;
};

struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;
  double at(size_t row, const std::string& name) const;
};

TraceTable read_trace(const std::string& path);

std::string summary_to_json(const NetworkConfig& cfg, const RunSummary& summary);
void write_summary_json(const std::string& path, const NetworkConfig& cfg,
                        const RunSummary& summary);

std::string constants_to_json(const NetworkConfig& cfg, const LyapunovParams& params);
void write_constants_json(const std::string& path, const NetworkConfig& cfg,
                          const LyapunovParams& params);

// Recomputes the summary aggregates from a trace table; used by the
// round-trip check in the verify subcommand.
struct TraceAggregates {
  double avg_objective = 0.0;
  double avg_objective_postwarmup = 0.0;
  double avg_total_backlog = 0.0;
  double avg_total_backlog_postwarmup = 0.0;
  long violations = 0;
};
TraceAggregates aggregate_trace(const NetworkConfig& cfg, const TraceTable& table,
                                double warmup_fraction);

}  // namespace hpwmsn
