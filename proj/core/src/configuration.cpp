#include "linebots/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "linebots/errors.hpp"

namespace linebots {

Configuration::Configuration(std::vector<Robot> robots, double visibility,
                             double tolerance)
    : robots_(std::move(robots)),
      visibility_(visibility),
      tolerance_(tolerance) {}

Configuration Configuration::FromPositions(
    std::vector<double> positions, const std::vector<std::size_t>& faulty,
    double visibility, double tolerance) {
  std::vector<Robot> robots(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    robots[i].id = static_cast<RobotId>(i);
    robots[i].position = positions[i];
  }
  for (std::size_t f : faulty) {
    if (f >= robots.size()) {
      throw IndexError("faulty index " + std::to_string(f) +
                       " out of range for " + std::to_string(robots.size()) +
                       " robots");
    }
    robots[f].faulty = true;
  }
  return Configuration(std::move(robots), visibility, tolerance);
}

const Robot& Configuration::at(std::size_t i) const {
  if (i >= robots_.size()) {
    throw IndexError("robot index " + std::to_string(i) + " out of range for " +
                     std::to_string(robots_.size()) + " robots");
  }
  return robots_[i];
}

std::vector<double> Configuration::positions() const {
  std::vector<double> out;
  out.reserve(robots_.size());
  for (const Robot& r : robots_) out.push_back(r.position);
  return out;
}

std::vector<std::size_t> Configuration::faulty_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    if (robots_[i].faulty) out.push_back(i);
  }
  return out;
}

std::size_t Configuration::fault_count() const {
  return static_cast<std::size_t>(std::count_if(
      robots_.begin(), robots_.end(), [](const Robot& r) { return r.faulty; }));
}

std::optional<std::size_t> Configuration::index_of(RobotId id) const {
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    if (robots_[i].id == id) return i;
  }
  return std::nullopt;
}

Configuration Configuration::WithRobots(std::vector<Robot> robots) const {
  return Configuration(std::move(robots), visibility_, tolerance_);
}

std::vector<std::size_t> Neighborhood::visible() const {
  std::vector<std::size_t> out;
  out.reserve(last - first + 1);
  for (std::size_t j = first; j <= last; ++j) out.push_back(j);
  return out;
}

Neighborhood visible_set(const Configuration& config, std::size_t i) {
  const Robot& self = config.at(i);
  const auto robots = config.robots();
  const double v = config.visibility();

  auto lo = std::partition_point(
      robots.begin(), robots.begin() + static_cast<std::ptrdiff_t>(i),
      [&](const Robot& r) { return self.position - r.position > v; });
  auto hi = std::partition_point(
      robots.begin() + static_cast<std::ptrdiff_t>(i) + 1, robots.end(),
      [&](const Robot& r) { return r.position - self.position <= v; });

  Neighborhood n;
  n.center = i;
  n.first = static_cast<std::size_t>(lo - robots.begin());
  n.last = static_cast<std::size_t>(hi - robots.begin()) - 1;

  n.leftmost = n.first;
  for (std::size_t j = n.first;
       j <= n.last && robots[j].position == robots[n.first].position; ++j) {
    if (robots[j].faulty) {
      n.leftmost = j;
      break;
    }
  }
  n.rightmost = n.last;
  for (std::size_t j = n.last;
       robots[j].position == robots[n.last].position; --j) {
    if (robots[j].faulty) {
      n.rightmost = j;
      break;
    }
    if (j == n.first) break;
  }
  return n;
}

bool is_connected(const Configuration& config) {
  std::vector<double> p = config.positions();
  std::sort(p.begin(), p.end());
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] - p[i - 1] > config.visibility()) return false;
  }
  return true;
}

std::vector<Violation> validate(const Configuration& config) {
  std::vector<Violation> out;
  const double v = config.visibility();
  if (!std::isfinite(v) || !(v > 0.0)) {
    out.push_back({"V must be positive and finite"});
  }
  if (!(config.tolerance() >= 0.0) || !std::isfinite(config.tolerance())) {
    out.push_back({"equality tolerance must be non-negative and finite"});
  }
  if (config.empty()) {
    out.push_back({"configuration has no robots"});
    return out;
  }
  std::set<RobotId> ids;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const Robot& r = config[i];
    if (!std::isfinite(r.position)) {
      out.push_back({"position of robot " + std::to_string(i) +
                     " is not finite"});
    }
    if (r.multiplicity < 1) {
      out.push_back({"multiplicity of robot " + std::to_string(i) +
                     " must be at least 1"});
    }
    if (!ids.insert(r.id).second) {
      out.push_back({"duplicate robot id " + std::to_string(r.id)});
    }
  }
  for (std::size_t i = 1; i < config.size(); ++i) {
    if (config.position(i) < config.position(i - 1)) {
      std::ostringstream msg;
      msg << "positions not index-sorted at index " << i;
      out.push_back({msg.str()});
      break;
    }
  }
  const auto faults = config.faulty_indices();
  if (faults.size() >= 2 &&
      config.position(faults.front()) == config.position(faults.back())) {
    out.push_back({"leftmost and rightmost faults share a position "
                   "(degenerate segment)",
                   true});
  }
  return out;
}

bool has_errors(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return !v.warning; });
}

}  // namespace linebots
