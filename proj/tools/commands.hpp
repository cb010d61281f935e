#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linebots/engine.hpp"
#include "linebots/io.hpp"
#include "linebots/limits.hpp"

namespace linebots::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitVerifyFailed = 2;
inline constexpr int kExitUsage = 64;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --out wins, then $LINEBOTS_OUT, then "linebots_out".
std::filesystem::path output_root(const std::optional<std::string>& flag);

struct GenOptions {
  std::size_t n = 10;
  // two-extremal | single | none | comma-separated indices
  std::string faults = "two-extremal";
  double visibility = 1.0;
  std::uint64_t seed = 0;
  std::string label;
};

// Random connected instance. Gaps are drawn uniformly from
// [0.05 V, 1.02 V) and the whole draw is repeated until connected.
Instance generate_instance(const GenOptions& options);

struct SimulateOptions {
  std::filesystem::path instance;
  Rule rule = Rule::kConvergence1D;
  Scheduler scheduler = Scheduler::kFsynch;
  std::uint64_t seed = 0;
  std::size_t max_steps = 100000;
  double stop_displacement = 1e-12;
  std::size_t fairness_window = 0;
  double tau = kDefaultEqualityTolerance;
  std::optional<std::string> out;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_gen(const GenOptions& options, const std::optional<std::string>& out,
            Streams io);
int cmd_simulate(const SimulateOptions& options, Streams io);
// Every seed goes to its own run directory `<root>/seed-<seed>`.
int cmd_sweep(const SimulateOptions& options,
              const std::vector<std::uint64_t>& seeds, std::size_t jobs,
              Streams io);
int cmd_analyze(const std::filesystem::path& trace, Streams io);
// Accepts an instance file or a run directory / trace.
int cmd_predict(const std::filesystem::path& input, Streams io);
// `tol` is relative to the fault span (or the initial span without two
// faults).
int cmd_verify(const std::filesystem::path& trace, double tol, Streams io);
int cmd_plot(const std::filesystem::path& trace,
             const std::optional<std::string>& out, Streams io);

// Pattern used by predict and verify: the chain hierarchy with two faults,
// the fault itself with one, the common gathering point (measured at the
// final step) with none, equidistance for the spreading rule.
LimitPattern prediction_for(const Trace& trace, std::size_t step);

// Step from which predictions are made: the earliest certified size-stable
// step, or the final step when the trace does not certify.
std::size_t prediction_step(const Trace& trace);

double reference_span(const Configuration& config);

struct PlotOptions {
  std::size_t max_points = 2000;
  int width = 960;
  int height = 540;
};

// Time-vs-position SVG. Each polyline keeps its first and last points and a
// uniform stride in between.
std::string render_svg(const Trace& trace,
                       const std::optional<std::map<RobotId, double>>& limits,
                       const PlotOptions& options = {});

// Sample indices into [0, count) honouring the cap.
std::vector<std::size_t> downsample(std::size_t count, std::size_t max_points);

}  // namespace linebots::cli
