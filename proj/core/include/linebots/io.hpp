#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linebots/chains.hpp"
#include "linebots/configuration.hpp"
#include "linebots/engine.hpp"
#include "linebots/limits.hpp"

namespace linebots {

// Shortest form that is guaranteed to round-trip: 17 significant digits.
std::string format_double(double value);

// Instance file (JSON):
//   {"label": "...", "V": 1.0, "origin": 0.0,
//    "positions": [...], "faulty": [indices...]}
// Positions are shifted so the leftmost fault sits at 0; `origin` accumulates
// the shift so the original coordinates are position + origin.
struct Instance {
  Configuration config;
  std::string label;
  double origin = 0.0;
};

// Throws ConfigurationError on a malformed document and IndexError on an
// out-of-range fault index. Validation is left to the caller.
Instance parse_instance(std::string_view text,
                        double tolerance = kDefaultEqualityTolerance);
std::string serialize_instance(const Instance& instance);
Instance load_instance(const std::filesystem::path& path,
                       double tolerance = kDefaultEqualityTolerance);
void save_instance(const std::filesystem::path& path, const Instance& instance);

// Trace CSV: `t,robot_id,position,faulty,multiplicity`, one row per robot per
// step in index order.
void write_trace_csv(std::ostream& out, const Trace& trace);
std::vector<Configuration> read_trace_csv(std::istream& in, double visibility,
                                          double tolerance);

// Event CSV: `t,kind,subject_a,subject_b`; subject_b empty for singletons.
void write_events_csv(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_events_csv(std::istream& in);

// Activation CSV: `t,robot_id`, one row per activated robot (SSYNCH only).
void write_activations_csv(std::ostream& out, const Trace& trace);
std::vector<std::vector<RobotId>> read_activations_csv(std::istream& in,
                                                       std::size_t steps);

struct RunSummary {
  std::string label;
  Rule rule = Rule::kConvergence1D;
  Scheduler scheduler = Scheduler::kFsynch;
  std::uint64_t seed = 0;
  double visibility = 1.0;
  double tolerance = kDefaultEqualityTolerance;
  double origin = 0.0;
  std::size_t steps = 0;
  std::size_t fairness_window = 0;
  double final_displacement = 0.0;
  StopReason stop_reason = StopReason::kStepBudget;
  std::map<std::string, std::size_t> event_counts;
};

RunSummary summarize(const Trace& trace, std::string label, double origin);
std::string serialize_summary(const RunSummary& summary);
RunSummary parse_summary(std::string_view text);

// A run directory holds trace.csv, events.csv, summary.json and, under
// SSYNCH, activations.csv.
void write_run(const std::filesystem::path& dir, const Trace& trace,
               const RunSummary& summary);

struct LoadedRun {
  Trace trace;
  RunSummary summary;
  std::filesystem::path dir;
};

// Accepts the run directory or the trace.csv inside it.
LoadedRun load_run(const std::filesystem::path& path);

std::string hierarchy_to_json(const Configuration& config,
                              const Hierarchy& hierarchy);

// Verification record: label, steps, max displacement, max deviation,
// per-chain spacing errors, pass/fail, and the predicted limits.
std::string verification_to_json(const std::string& label,
                                 const LimitPattern& pattern,
                                 const LimitReport& report);
// Predicted limits from a verification record, keyed by robot id.
std::map<RobotId, double> read_predicted_limits(std::string_view text);

}  // namespace linebots
