#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linebots/configuration.hpp"

namespace linebots {

enum class Rule { kConvergence1D, kSpreading };
enum class Scheduler { kFsynch, kSsynch };
enum class EventKind { kCrossing, kMerging, kInclusion, kSegmentEntry };

std::string_view to_string(Rule rule);
std::string_view to_string(Scheduler scheduler);
std::string_view to_string(EventKind kind);
std::optional<Rule> parse_rule(std::string_view text);
std::optional<Scheduler> parse_scheduler(std::string_view text);
std::optional<EventKind> parse_event_kind(std::string_view text);

// Something that happened during the transition from step `time` to
// `time + 1`. Subjects are robot ids.
struct Event {
  std::size_t time = 0;
  EventKind kind = EventKind::kCrossing;
  RobotId subject_a = 0;
  std::optional<RobotId> subject_b;

  friend bool operator==(const Event&, const Event&) = default;
};

// Every active non-faulty robot moves to the midpoint of its farthest visible
// robots; destinations come from the pre-step snapshot. The result is
// re-sorted by position (stable), robot ids carry identity.
Configuration step_convergence1d(const Configuration& config,
                                 std::span<const std::size_t> active);

struct AnchorPositions {
  double left = 0.0;
  double right = 0.0;
};

// Every active interior robot moves to the midpoint of its index neighbours.
// Robots 0 and n never follow the rule: they stay put, or jump to `anchors`
// when given. Throws ConfigurationError with fewer than 3 robots.
Configuration step_spreading(const Configuration& config,
                             std::span<const std::size_t> active,
                             std::optional<AnchorPositions> anchors = {});

// Events between two consecutive snapshots, matched by robot id. `next` must
// be the raw step image of `prev` (before merging). With `check_order`, throws
// InvariantViolation if two non-faulty robots swap order. Order is only
// guaranteed under FSYNCH: with SSYNCH an active Convergence1D robot may pass
// an inactive one.
std::vector<Event> detect_events(const Configuration& prev,
                                 const Configuration& next,
                                 std::size_t time = 0, bool check_order = true);

// Collapses non-faulty robots within the tolerance of each other into the
// lowest-index one, summing multiplicities. Faulty robots never collapse.
Configuration merge_colocated(const Configuration& config);

// Largest |x(t+1) - x(t)| over ids present in both snapshots.
double max_displacement(const Configuration& prev, const Configuration& next);

struct StopCriterion {
  enum class Kind { kDisplacement, kStepBudget, kLimitProximity };

  Kind kind = Kind::kDisplacement;
  double threshold = 1e-12;
  // Consecutive below-threshold steps required; 0 picks 2 under FSYNCH and
  // the fairness window under SSYNCH.
  std::size_t quiet_steps = 0;
  std::vector<std::pair<RobotId, double>> target;

  static StopCriterion Displacement(double threshold = 1e-12,
                                    std::size_t quiet_steps = 0);
  static StopCriterion StepBudget();
  static StopCriterion LimitProximity(
      std::vector<std::pair<RobotId, double>> target, double tolerance);
};

// Anchor positions for the spreading rule at step t (t >= 1).
using AnchorMotion = std::function<AnchorPositions(std::size_t)>;

struct RunOptions {
  Rule rule = Rule::kConvergence1D;
  Scheduler scheduler = Scheduler::kFsynch;
  std::size_t max_steps = 100000;
  StopCriterion stop;
  std::uint64_t seed = 0;
  // 0 means 3n.
  std::size_t fairness_window = 0;
  AnchorMotion anchor_motion;
  // Collapse co-located non-faulty robots after every step. Only meaningful
  // for Convergence1D; the spreading rule never merges.
  bool merge = true;
};

enum class StopReason { kConverged, kStepBudget, kLimitReached };
std::string_view to_string(StopReason reason);

struct Trace {
  std::vector<Configuration> configurations;
  std::vector<Event> events;
  Rule rule = Rule::kConvergence1D;
  Scheduler scheduler = Scheduler::kFsynch;
  std::uint64_t seed = 0;
  std::size_t fairness_window = 0;
  // Robot ids activated at each step; only filled under SSYNCH.
  std::vector<std::vector<RobotId>> activation_log;
  // displacement[t] is the max displacement of the step t -> t+1.
  std::vector<double> displacement;
  StopReason stop_reason = StopReason::kStepBudget;

  std::size_t steps() const {
    return configurations.empty() ? 0 : configurations.size() - 1;
  }
  const Configuration& initial() const { return configurations.front(); }
  const Configuration& last() const { return configurations.back(); }
  double final_displacement() const {
    return displacement.empty() ? 0.0 : displacement.back();
  }
};

// Seeded activation sets for SSYNCH: a uniformly drawn nonempty subset of the
// movable robots, patched so every robot is active at least once in any
// window of `window` consecutive steps.
class ActivationScheduler {
 public:
  ActivationScheduler(std::uint64_t seed, std::size_t window);

  // Ids to activate at step t among `candidates` (ascending ids).
  std::vector<RobotId> Next(std::size_t t, std::span<const RobotId> candidates);

  std::size_t window() const { return window_; }

 private:
  std::mt19937_64 rng_;
  std::size_t window_;
  // Last activation step + 1 per id (0 means never).
  std::vector<std::size_t> last_active_;
};

// Throws ConfigurationError if `config` does not validate, InvariantViolation
// if a proven invariant breaks during the run.
Trace run(const Configuration& config, const RunOptions& options);

// Indices that move under `rule` (non-faulty, and interior for spreading).
std::vector<std::size_t> movable_indices(const Configuration& config, Rule rule);

}  // namespace linebots
