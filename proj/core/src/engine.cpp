#include "linebots/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "linebots/errors.hpp"

namespace linebots {
namespace {

constexpr std::ptrdiff_t kAbsent = -1;

// next-index of every id, kAbsent when the id is not in `config`.
std::vector<std::ptrdiff_t> IndexById(const Configuration& config,
                                      RobotId max_id) {
  std::vector<std::ptrdiff_t> index(static_cast<std::size_t>(max_id) + 1,
                                    kAbsent);
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config[i].id <= max_id) {
      index[config[i].id] = static_cast<std::ptrdiff_t>(i);
    }
  }
  return index;
}

RobotId MaxId(const Configuration& config) {
  RobotId m = 0;
  for (const Robot& r : config.robots()) m = std::max(m, r.id);
  return m;
}

std::vector<Robot> SortedByPosition(std::vector<Robot> robots) {
  std::stable_sort(robots.begin(), robots.end(),
                   [](const Robot& a, const Robot& b) {
                     return a.position < b.position;
                   });
  return robots;
}

int Sign(double x) { return (x > 0.0) - (x < 0.0); }

Event Pair(std::size_t time, EventKind kind, RobotId a, RobotId b) {
  if (b < a) std::swap(a, b);
  return Event{time, kind, a, b};
}

}  // namespace

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kConvergence1D: return "convergence1d";
    case Rule::kSpreading: return "spreading";
  }
  return "?";
}

std::string_view to_string(Scheduler scheduler) {
  switch (scheduler) {
    case Scheduler::kFsynch: return "fsynch";
    case Scheduler::kSsynch: return "ssynch";
  }
  return "?";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kCrossing: return "crossing";
    case EventKind::kMerging: return "merging";
    case EventKind::kInclusion: return "inclusion";
    case EventKind::kSegmentEntry: return "segment_entry";
  }
  return "?";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged: return "converged";
    case StopReason::kStepBudget: return "step_budget";
    case StopReason::kLimitReached: return "limit_reached";
  }
  return "?";
}

std::optional<Rule> parse_rule(std::string_view text) {
  if (text == "convergence1d") return Rule::kConvergence1D;
  if (text == "spreading") return Rule::kSpreading;
  return std::nullopt;
}

std::optional<Scheduler> parse_scheduler(std::string_view text) {
  if (text == "fsynch") return Scheduler::kFsynch;
  if (text == "ssynch") return Scheduler::kSsynch;
  return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (EventKind k : {EventKind::kCrossing, EventKind::kMerging,
                      EventKind::kInclusion, EventKind::kSegmentEntry}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

Configuration step_convergence1d(const Configuration& config,
                                 std::span<const std::size_t> active) {
  std::vector<Robot> next(config.robots().begin(), config.robots().end());
  for (std::size_t i : active) {
    if (i >= config.size()) {
      throw IndexError("active index " + std::to_string(i) + " out of range");
    }
    if (config.is_faulty(i)) continue;
    const Neighborhood n = visible_set(config, i);
    next[i].position =
        (config.position(n.leftmost) + config.position(n.rightmost)) / 2;
  }
  return config.WithRobots(SortedByPosition(std::move(next)));
}

Configuration step_spreading(const Configuration& config,
                             std::span<const std::size_t> active,
                             std::optional<AnchorPositions> anchors) {
  if (config.size() < 3) {
    throw ConfigurationError("spreading needs at least 3 robots, got " +
                             std::to_string(config.size()));
  }
  const std::size_t last = config.size() - 1;
  std::vector<Robot> next(config.robots().begin(), config.robots().end());
  for (std::size_t i : active) {
    if (i > last) {
      throw IndexError("active index " + std::to_string(i) + " out of range");
    }
    if (i == 0 || i == last || config.is_faulty(i)) continue;
    next[i].position = (config.position(i - 1) + config.position(i + 1)) / 2;
  }
  if (anchors) {
    next.front().position = anchors->left;
    next.back().position = anchors->right;
  }
  return config.WithRobots(SortedByPosition(std::move(next)));
}

std::vector<Event> detect_events(const Configuration& prev,
                                 const Configuration& next, std::size_t time,
                                 bool check_order) {
  const RobotId max_id = std::max(MaxId(prev), MaxId(next));
  const auto next_index = IndexById(next, max_id);
  const double tol = next.tolerance();
  const double v = next.visibility();

  // Robots present in both snapshots, in prev order.
  struct Tracked {
    RobotId id;
    bool faulty;
    double before;
    double after;
    std::size_t next_index;
  };
  std::vector<Tracked> tracked;
  tracked.reserve(prev.size());
  for (const Robot& r : prev.robots()) {
    const std::ptrdiff_t j = next_index[r.id];
    if (j == kAbsent) continue;
    tracked.push_back({r.id, r.faulty, r.position,
                       next[static_cast<std::size_t>(j)].position,
                       static_cast<std::size_t>(j)});
  }

  // No two non-faulty robots may swap order: for a before b (strictly) in
  // prev, after(a) <= after(b).
  if (check_order) {
    double best = -std::numeric_limits<double>::infinity();
    const Tracked* best_robot = nullptr;
    double group_best = best;
    const Tracked* group_robot = nullptr;
    double group_pos = std::numeric_limits<double>::quiet_NaN();
    for (const Tracked& t : tracked) {
      if (t.faulty) continue;
      if (t.before != group_pos) {
        if (group_robot && group_best > best) {
          best = group_best;
          best_robot = group_robot;
        }
        group_pos = t.before;
        group_best = -std::numeric_limits<double>::infinity();
        group_robot = nullptr;
      }
      if (best_robot && t.after < best) {
        std::ostringstream msg;
        msg << "non-faulty robots " << best_robot->id << " and " << t.id
            << " swapped order at step " << time;
        throw InvariantViolation(msg.str(), time, {best_robot->id, t.id});
      }
      if (t.after > group_best) {
        group_best = t.after;
        group_robot = &t;
      }
    }
  }

  std::vector<Event> events;

  for (const Tracked& f : tracked) {
    if (!f.faulty) continue;
    for (const Tracked& x : tracked) {
      if (x.faulty) continue;
      if (Sign(x.before - f.before) * Sign(x.after - f.after) < 0) {
        events.push_back({time, EventKind::kCrossing, x.id, f.id});
      }
    }
  }

  const auto prev_index = IndexById(prev, max_id);
  auto before = [&](RobotId id) {
    return prev[static_cast<std::size_t>(prev_index[id])].position;
  };
  auto in_prev = [&](RobotId id) { return prev_index[id] != kAbsent; };

  // Merging: within the tolerance now, apart before. Two faults never move.
  for (std::size_t i = 0; i < next.size(); ++i) {
    const Robot& a = next[i];
    if (!in_prev(a.id)) continue;
    for (std::size_t j = i + 1;
         j < next.size() && next[j].position - a.position <= tol; ++j) {
      const Robot& b = next[j];
      if (!in_prev(b.id) || (a.faulty && b.faulty)) continue;
      if (std::abs(before(a.id) - before(b.id)) > tol) {
        events.push_back(Pair(time, EventKind::kMerging, a.id, b.id));
      }
    }
  }

  // Inclusion: visible now, invisible before. Reported once per pair.
  for (std::size_t i = 0; i < next.size(); ++i) {
    const Robot& a = next[i];
    if (!in_prev(a.id)) continue;
    for (std::size_t j = i + 1;
         j < next.size() && next[j].position - a.position <= v; ++j) {
      const Robot& b = next[j];
      if (!in_prev(b.id)) continue;
      if (std::abs(before(a.id) - before(b.id)) > v) {
        events.push_back(Pair(time, EventKind::kInclusion, a.id, b.id));
      }
    }
  }

  const auto faults = prev.faulty_indices();
  if (faults.size() >= 2) {
    const double x0 = prev.position(faults.front());
    const double xn = prev.position(faults.back());
    for (const Tracked& t : tracked) {
      if (t.faulty) continue;
      const bool was_inside = x0 <= t.before && t.before <= xn;
      const bool is_inside = x0 <= t.after && t.after <= xn;
      if (!was_inside && is_inside) {
        events.push_back({time, EventKind::kSegmentEntry, t.id, std::nullopt});
      }
    }
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.subject_a != b.subject_a) return a.subject_a < b.subject_a;
    return a.subject_b.value_or(0) < b.subject_b.value_or(0);
  });
  return events;
}

Configuration merge_colocated(const Configuration& config) {
  const auto robots = config.robots();
  const double tol = config.tolerance();
  std::vector<bool> absorbed(robots.size(), false);
  std::vector<Robot> out;
  out.reserve(robots.size());
  for (std::size_t i = 0; i < robots.size(); ++i) {
    if (absorbed[i]) continue;
    Robot r = robots[i];
    if (!r.faulty) {
      for (std::size_t j = i + 1;
           j < robots.size() && robots[j].position - r.position <= tol; ++j) {
        if (robots[j].faulty || absorbed[j]) continue;
        r.multiplicity += robots[j].multiplicity;
        absorbed[j] = true;
      }
    }
    out.push_back(r);
  }
  return config.WithRobots(std::move(out));
}

double max_displacement(const Configuration& prev, const Configuration& next) {
  const auto index = IndexById(next, std::max(MaxId(prev), MaxId(next)));
  double d = 0.0;
  for (const Robot& r : prev.robots()) {
    const std::ptrdiff_t j = index[r.id];
    if (j == kAbsent) continue;
    d = std::max(d, std::abs(next[static_cast<std::size_t>(j)].position -
                             r.position));
  }
  return d;
}

StopCriterion StopCriterion::Displacement(double threshold,
                                          std::size_t quiet_steps) {
  StopCriterion s;
  s.kind = Kind::kDisplacement;
  s.threshold = threshold;
  s.quiet_steps = quiet_steps;
  return s;
}

StopCriterion StopCriterion::StepBudget() {
  StopCriterion s;
  s.kind = Kind::kStepBudget;
  return s;
}

StopCriterion StopCriterion::LimitProximity(
    std::vector<std::pair<RobotId, double>> target, double tolerance) {
  StopCriterion s;
  s.kind = Kind::kLimitProximity;
  s.threshold = tolerance;
  s.target = std::move(target);
  return s;
}

ActivationScheduler::ActivationScheduler(std::uint64_t seed,
                                         std::size_t window)
    : rng_(seed), window_(std::max<std::size_t>(window, 1)) {}

std::vector<RobotId> ActivationScheduler::Next(
    std::size_t t, std::span<const RobotId> candidates) {
  std::vector<RobotId> chosen;
  if (candidates.empty()) return chosen;

  // One fair coin per candidate; redraw the empty set.
  do {
    chosen.clear();
    for (std::size_t k = 0; k < candidates.size(); k += 64) {
      const std::uint64_t bits = rng_();
      const std::size_t count = std::min<std::size_t>(64, candidates.size() - k);
      for (std::size_t b = 0; b < count; ++b) {
        if ((bits >> b) & 1U) chosen.push_back(candidates[k + b]);
      }
    }
  } while (chosen.empty());

  for (RobotId id : candidates) {
    if (id >= last_active_.size()) last_active_.resize(id + 1, 0);
    if (t + 1 - last_active_[id] >= window_) chosen.push_back(id);
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  for (RobotId id : chosen) last_active_[id] = t + 1;
  return chosen;
}

std::vector<std::size_t> movable_indices(const Configuration& config,
                                         Rule rule) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config.is_faulty(i)) continue;
    if (rule == Rule::kSpreading && (i == 0 || i + 1 == config.size())) {
      continue;
    }
    out.push_back(i);
  }
  return out;
}

Trace run(const Configuration& config, const RunOptions& options) {
  const auto violations = validate(config);
  if (has_errors(violations)) {
    std::string msg = "invalid configuration:";
    for (const Violation& v : violations) {
      if (!v.warning) msg += " " + v.message + ";";
    }
    throw ConfigurationError(msg);
  }
  if (options.rule == Rule::kSpreading && config.size() < 3) {
    throw ConfigurationError("spreading needs at least 3 robots");
  }

  Trace trace;
  trace.rule = options.rule;
  trace.scheduler = options.scheduler;
  trace.seed = options.seed;
  trace.fairness_window =
      options.fairness_window ? options.fairness_window : 3 * config.size();
  trace.configurations.push_back(config);

  const StopCriterion& stop = options.stop;
  const std::size_t quiet_needed =
      stop.quiet_steps ? stop.quiet_steps
      : options.scheduler == Scheduler::kFsynch ? 2
                                                : trace.fairness_window;
  ActivationScheduler scheduler(options.seed, trace.fairness_window);
  const bool merge = options.merge && options.rule == Rule::kConvergence1D;

  std::size_t quiet = 0;
  trace.stop_reason = StopReason::kStepBudget;
  for (std::size_t t = 0; t < options.max_steps; ++t) {
    const Configuration& current = trace.configurations.back();
    std::vector<std::size_t> active = movable_indices(current, options.rule);
    if (options.scheduler == Scheduler::kSsynch) {
      std::vector<RobotId> candidates;
      candidates.reserve(active.size());
      for (std::size_t i : active) candidates.push_back(current[i].id);
      std::sort(candidates.begin(), candidates.end());
      std::vector<RobotId> chosen = scheduler.Next(t, candidates);
      active.clear();
      for (std::size_t i = 0; i < current.size(); ++i) {
        if (std::binary_search(chosen.begin(), chosen.end(), current[i].id)) {
          active.push_back(i);
        }
      }
      trace.activation_log.push_back(std::move(chosen));
    }

    Configuration raw;
    if (options.rule == Rule::kConvergence1D) {
      raw = step_convergence1d(current, active);
    } else {
      std::optional<AnchorPositions> anchors;
      if (options.anchor_motion) anchors = options.anchor_motion(t + 1);
      raw = step_spreading(current, active, anchors);
    }

    const bool ordered = options.scheduler == Scheduler::kFsynch ||
                         options.rule == Rule::kSpreading;
    std::vector<Event> events = detect_events(current, raw, t, ordered);
    trace.events.insert(trace.events.end(), events.begin(), events.end());
    const double displacement = max_displacement(current, raw);
    trace.displacement.push_back(displacement);
    trace.configurations.push_back(merge ? merge_colocated(raw)
                                         : std::move(raw));

    const Configuration& next = trace.configurations.back();
    if (stop.kind == StopCriterion::Kind::kDisplacement) {
      quiet = displacement < stop.threshold ? quiet + 1 : 0;
      if (quiet >= quiet_needed) {
        trace.stop_reason = StopReason::kConverged;
        break;
      }
    } else if (stop.kind == StopCriterion::Kind::kLimitProximity) {
      double worst = 0.0;
      for (const auto& [id, limit] : stop.target) {
        if (auto i = next.index_of(id)) {
          worst = std::max(worst, std::abs(next.position(*i) - limit));
        }
      }
      if (worst <= stop.threshold) {
        trace.stop_reason = StopReason::kLimitReached;
        break;
      }
    }
  }
  return trace;
}

}  // namespace linebots
