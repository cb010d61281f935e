#include "linebots/chains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "linebots/errors.hpp"

namespace linebots {
namespace {

// Pick among co-located extremes of [lo, hi]: a faulty robot first, then the
// outermost index.
std::size_t Leftmost(const Configuration& c, std::size_t lo, std::size_t hi) {
  for (std::size_t j = lo; j <= hi && c.position(j) == c.position(lo); ++j) {
    if (c.is_faulty(j)) return j;
  }
  return lo;
}

std::size_t Rightmost(const Configuration& c, std::size_t lo, std::size_t hi) {
  for (std::size_t j = hi; c.position(j) == c.position(hi); --j) {
    if (c.is_faulty(j)) return j;
    if (j == lo) break;
  }
  return hi;
}

std::string IdList(const Configuration& c, const std::vector<std::size_t>& v) {
  std::ostringstream out;
  out << '[';
  for (std::size_t k = 0; k < v.size(); ++k) {
    out << (k ? "," : "") << c[v[k]].id;
  }
  out << ']';
  return out.str();
}

}  // namespace

SegmentFaults segment_faults(const Configuration& config) {
  const auto faults = config.faulty_indices();
  if (faults.size() != 2) {
    throw ConfigurationError("chain analysis needs exactly two faults, got " +
                             std::to_string(faults.size()));
  }
  return {faults[0], faults[1]};
}

SegmentView::SegmentView(const Configuration& config)
    : config_(&config), faults_(segment_faults(config)) {
  const double x0 = config.position(faults_.left);
  const double xn = config.position(faults_.right);
  first_ = faults_.left;
  while (first_ > 0 && config.position(first_ - 1) >= x0) --first_;
  last_ = faults_.right;
  while (last_ + 1 < config.size() && config.position(last_ + 1) <= xn) {
    ++last_;
  }
}

std::size_t SegmentView::left(std::size_t i) const {
  const Neighborhood n = visible_set(*config_, i);
  return Leftmost(*config_, std::max(n.first, first_), std::min(n.last, last_));
}

std::size_t SegmentView::right(std::size_t i) const {
  const Neighborhood n = visible_set(*config_, i);
  return Rightmost(*config_, std::max(n.first, first_),
                   std::min(n.last, last_));
}

std::vector<std::size_t> forward_chain(const Configuration& config) {
  const SegmentView view(config);
  std::vector<std::size_t> chain{view.faults().left};
  std::size_t current = view.faults().left;
  while (current != view.faults().right) {
    const std::size_t next = view.right(current);
    if (next <= current ||
        config.position(next) <= config.position(current)) {
      const double from = config.position(current);
      const double to = current + 1 < config.size()
                            ? config.position(current + 1)
                            : from;
      std::ostringstream msg;
      msg << "visibility graph disconnected between the faults: gap from "
          << from << " to " << to << " exceeds V=" << config.visibility();
      throw ChainBreakError(msg.str(), from, to);
    }
    chain.push_back(next);
    current = next;
  }
  return chain;
}

std::vector<std::size_t> backward_chain(const Configuration& config) {
  const std::vector<std::size_t> forward = forward_chain(config);
  const SegmentView view(config);
  const std::size_t links = forward.size() - 1;
  std::vector<std::size_t> backward(forward.size());
  backward[links] = view.faults().right;
  for (std::size_t i = links; i-- > 0;) {
    backward[i] = view.left(backward[i + 1]);
  }

  for (std::size_t i = 1; i <= links; ++i) {
    const double y = config.position(backward[i]);
    if (!(config.position(forward[i - 1]) < y &&
          y <= config.position(forward[i]))) {
      std::ostringstream msg;
      msg << "alternation property violated at link " << i << ": backward "
          << "robot " << config[backward[i]].id << " at " << y
          << " is not in (" << config.position(forward[i - 1]) << ", "
          << config.position(forward[i]) << "]";
      throw InvariantViolation(msg.str(), 0, {backward[i]});
    }
  }
  if (backward.front() != view.faults().left) {
    throw InvariantViolation(
        "backward chain does not start at the left fault", 0,
        {backward.front()});
  }
  return backward;
}

std::optional<Chain> primary_chain(const Configuration& config) {
  std::vector<std::size_t> forward = forward_chain(config);
  if (forward != backward_chain(config)) return std::nullopt;
  const SegmentView view(config);
  Chain chain;
  chain.left_anchor = view.left(forward.front());
  chain.right_anchor = view.right(forward.back());
  chain.members = std::move(forward);
  chain.level = 1;
  chain.mutual = true;
  return chain;
}

int Hierarchy::max_level() const {
  int level = 0;
  for (const Chain& c : chains) level = std::max(level, c.level);
  return level;
}

std::size_t Hierarchy::count_at_level(int level) const {
  return static_cast<std::size_t>(
      std::count_if(chains.begin(), chains.end(),
                    [level](const Chain& c) { return c.level == level; }));
}

Hierarchy chain_hierarchy(const Configuration& config) {
  const SegmentView view(config);
  const SegmentFaults faults = view.faults();
  const std::size_t n = config.size();

  Hierarchy h;
  std::vector<std::optional<ChainRef>> assigned(n);
  auto add_chain = [&](Chain chain) {
    const std::size_t id = h.chains.size();
    for (std::size_t m : chain.members) assigned[m] = ChainRef{chain.level, id};
    h.chains.push_back(std::move(chain));
  };

  add_chain({{faults.left}, faults.left, faults.left, 0, true});
  add_chain({{faults.right}, faults.right, faults.right, 0, true});

  const std::optional<Chain> primary = primary_chain(config);
  if (!primary) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (!assigned[i]) rest.push_back(i);
    }
    throw HierarchyIncomplete(
        "no primary chain: forward and backward chains differ", rest,
        {"forward " + IdList(config, forward_chain(config)) + " vs backward " +
         IdList(config, backward_chain(config))});
  }
  if (primary->members.size() > 2) {
    Chain interior;
    interior.members.assign(primary->members.begin() + 1,
                            primary->members.end() - 1);
    interior.left_anchor = faults.left;
    interior.right_anchor = faults.right;
    interior.level = 1;
    interior.mutual = true;
    add_chain(std::move(interior));
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (view.inside(i)) continue;
    const std::size_t fault = i < view.first() ? faults.left : faults.right;
    add_chain({{i}, fault, fault, kOutsiderLevel, true});
  }

  // Unassigned robots split uniquely into maximal mutual paths.
  struct Pending {
    std::vector<std::size_t> members;
    std::size_t left;
    std::size_t right;
    bool rejected = false;
  };
  std::vector<Pending> pending;
  for (std::size_t i = view.first(); i <= view.last(); ++i) {
    if (assigned[i]) continue;
    const std::size_t before = view.left(i);
    if (!assigned[before] && view.mutually_chained(before, i)) continue;
    Pending p;
    p.members.push_back(i);
    for (std::size_t cur = i;;) {
      const std::size_t next = view.right(cur);
      if (assigned[next] || !view.mutually_chained(cur, next)) break;
      p.members.push_back(next);
      cur = next;
    }
    p.left = view.left(p.members.front());
    p.right = view.right(p.members.back());
    pending.push_back(std::move(p));
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (Pending& p : pending) {
      if (p.rejected || assigned[p.members.front()]) continue;
      if (!assigned[p.left] || !assigned[p.right]) continue;
      int level = std::max(assigned[p.left]->level,
                           assigned[p.right]->level) + 1;
      // Both anchors are faults. The faults are level-0 chains and also the
      // ends of the primary chain, so the level-j recursion admits the chain
      // at level 2 whenever a primary chain exists. Without one there is no
      // level-1 chain to anchor to.
      if (level == 1 && primary->members.size() > 2) {
        level = 2;
        h.diagnostics.push_back(
            "chain " + IdList(config, p.members) +
            " is anchored at both faults beside the primary chain; level 2");
      }
      if (level == 1) {
        p.rejected = true;
        h.diagnostics.push_back(
            "chain " + IdList(config, p.members) +
            " is anchored at both faults but is not the primary chain; no "
            "level applies");
        continue;
      }
      add_chain({p.members, p.left, p.right, level, true});
      changed = true;
    }
  }

  std::vector<std::size_t> unassigned;
  for (std::size_t i = 0; i < n; ++i) {
    if (!assigned[i]) unassigned.push_back(i);
  }
  for (const Pending& p : pending) {
    if (!assigned[p.members.front()] && !p.rejected &&
        (p.left == p.members.front() || p.right == p.members.back())) {
      h.diagnostics.push_back("chain " + IdList(config, p.members) +
                              " is anchored at one of its own members");
    }
  }
  if (!unassigned.empty()) {
    throw HierarchyIncomplete(
        "hierarchy incomplete: " + std::to_string(unassigned.size()) +
            " robot(s) in no level-j chain",
        unassigned, h.diagnostics);
  }

  h.assignment.reserve(n);
  for (std::size_t i = 0; i < n; ++i) h.assignment.push_back(*assigned[i]);
  return h;
}

std::string format_hierarchy(const Configuration& config,
                             const Hierarchy& hierarchy) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t c = 0; c < hierarchy.chains.size(); ++c) {
    const Chain& chain = hierarchy.chains[c];
    out << "chain " << c << " level ";
    if (chain.level == kOutsiderLevel) {
      out << "outsider";
    } else {
      out << chain.level;
    }
    out << " ids " << IdList(config, chain.members) << " positions [";
    for (std::size_t k = 0; k < chain.members.size(); ++k) {
      out << (k ? "," : "") << config.position(chain.members[k]);
    }
    out << "] anchors (" << config[chain.left_anchor].id << ","
        << config[chain.right_anchor].id << ") mutual "
        << (chain.mutual ? "yes" : "no") << '\n';
  }
  for (const std::string& d : hierarchy.diagnostics) out << "note: " << d << '\n';
  return out.str();
}

std::string_view to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kCertified: return "certified";
    case CertificateStatus::kRefuted: return "refuted";
    case CertificateStatus::kInconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct Farthest {
  RobotId left;
  RobotId right;
  friend bool operator==(const Farthest&, const Farthest&) = default;
};

// (id, l id, r id) per robot, sorted by id.
std::vector<std::pair<RobotId, Farthest>> FarthestById(const Configuration& c) {
  std::vector<std::pair<RobotId, Farthest>> out;
  out.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Neighborhood n = visible_set(c, i);
    out.push_back({c[i].id, {c[n.leftmost].id, c[n.rightmost].id}});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

struct Outsiders {
  std::vector<std::pair<RobotId, double>> left;   // id, distance to x_0
  std::vector<std::pair<RobotId, double>> right;  // id, distance to x_n
};

Outsiders FindOutsiders(const Configuration& c) {
  Outsiders o;
  const auto faults = c.faulty_indices();
  if (faults.size() < 2) return o;
  const double x0 = c.position(faults.front());
  const double xn = c.position(faults.back());
  for (const Robot& r : c.robots()) {
    if (r.faulty) continue;
    if (r.position < x0) o.left.push_back({r.id, x0 - r.position});
    if (r.position > xn) o.right.push_back({r.id, r.position - xn});
  }
  return o;
}

bool Approaching(const std::vector<std::pair<RobotId, double>>& before,
                 const std::vector<std::pair<RobotId, double>>& after) {
  if (before.size() != after.size()) return false;
  for (std::size_t k = 0; k < before.size(); ++k) {
    if (before[k].first != after[k].first) return false;
    if (after[k].second > before[k].second) return false;
  }
  return true;
}

}  // namespace

SizeStableCertificate size_stable_certificate(const Trace& trace,
                                              std::size_t t0) {
  SizeStableCertificate cert;
  cert.requested = t0;
  const std::size_t end = trace.steps();
  cert.window_end = end;
  if (trace.configurations.empty() || t0 > end || end - t0 < 2) {
    cert.status = CertificateStatus::kInconclusive;
    cert.reason = "window too short";
    return cert;
  }

  // violation[s] describes the transition s -> s+1.
  std::vector<std::string> violation(end);
  std::vector<std::optional<Event>> violation_event(end);
  for (const Event& e : trace.events) {
    if (e.time >= end || violation_event[e.time]) continue;
    violation_event[e.time] = e;
    violation[e.time] = std::string(to_string(e.kind)) + " event";
  }

  auto farthest = FarthestById(trace.configurations[0]);
  auto outsiders = FindOutsiders(trace.configurations[0]);
  for (std::size_t s = 0; s < end; ++s) {
    const auto next_farthest = FarthestById(trace.configurations[s + 1]);
    const auto next_outsiders = FindOutsiders(trace.configurations[s + 1]);
    if (violation[s].empty()) {
      if (next_farthest.size() != farthest.size()) {
        violation[s] = "robot count changed";
      } else if (next_farthest != farthest) {
        violation[s] = "farthest neighbours changed";
      } else if (outsiders.left.size() > 1 || outsiders.right.size() > 1) {
        violation[s] = "more than one outsider on a side";
      } else if (!Approaching(outsiders.left, next_outsiders.left) ||
                 !Approaching(outsiders.right, next_outsiders.right)) {
        violation[s] = "outsider not approaching its fault";
      }
    }
    farthest = std::move(next_farthest);
    outsiders = std::move(next_outsiders);
  }

  std::size_t earliest = 0;
  for (std::size_t s = end; s-- > 0;) {
    if (!violation[s].empty()) {
      earliest = s + 1;
      break;
    }
  }

  if (earliest <= t0) {
    cert.status = CertificateStatus::kCertified;
    cert.earliest = earliest;
    cert.reason = "no inclusions, mergings or crossings; farthest neighbours "
                  "constant";
    return cert;
  }
  cert.status = CertificateStatus::kRefuted;
  for (std::size_t s = t0; s < end; ++s) {
    if (violation[s].empty()) continue;
    cert.violation_time = s;
    cert.violating_event = violation_event[s];
    cert.reason = violation[s] + " at step " + std::to_string(s);
    break;
  }
  return cert;
}

SizeStableCertificate earliest_size_stable(const Trace& trace) {
  const std::size_t end = trace.steps();
  return size_stable_certificate(trace, end >= 2 ? end - 2 : 0);
}

}  // namespace linebots
