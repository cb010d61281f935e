#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace linebots {

using RobotId = std::uint32_t;

// Absolute tolerance for position equality (merging and event detection).
inline constexpr double kDefaultEqualityTolerance = 1e-12;

struct Robot {
  RobotId id = 0;
  double position = 0.0;
  bool faulty = false;
  // Number of original robots merged into this one.
  std::uint32_t multiplicity = 1;

  friend bool operator==(const Robot&, const Robot&) = default;
};

// Snapshot of a line of robots. Robots are kept sorted by position, so the
// index of a robot is its rank on the line; `Robot::id` is the stable identity
// that survives re-sorting and merging.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::vector<Robot> robots, double visibility,
                double tolerance = kDefaultEqualityTolerance);

  // Robots get ids 0..n-1 in the given order and multiplicity 1. Throws
  // IndexError for an out-of-range faulty index.
  static Configuration FromPositions(std::vector<double> positions,
                                     const std::vector<std::size_t>& faulty,
                                     double visibility,
                                     double tolerance = kDefaultEqualityTolerance);

  std::size_t size() const { return robots_.size(); }
  bool empty() const { return robots_.empty(); }
  const Robot& operator[](std::size_t i) const { return robots_[i]; }
  const Robot& at(std::size_t i) const;
  std::span<const Robot> robots() const { return robots_; }

  double position(std::size_t i) const { return robots_[i].position; }
  bool is_faulty(std::size_t i) const { return robots_[i].faulty; }
  std::vector<double> positions() const;
  std::vector<std::size_t> faulty_indices() const;
  std::size_t fault_count() const;
  std::optional<std::size_t> index_of(RobotId id) const;

  double visibility() const { return visibility_; }
  double tolerance() const { return tolerance_; }

  // Same V and tolerance, different robots.
  Configuration WithRobots(std::vector<Robot> robots) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Robot> robots_;
  double visibility_ = 1.0;
  double tolerance_ = kDefaultEqualityTolerance;
};

// The robots visible from `center`: every j with |x_j - x_center| <= V. On a
// sorted line this is the contiguous index range [first, last].
struct Neighborhood {
  std::size_t center = 0;
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t leftmost = 0;   // l(x)
  std::size_t rightmost = 0;  // r(x)

  std::vector<std::size_t> visible() const;
  bool contains(std::size_t j) const { return first <= j && j <= last; }
};

// Throws IndexError for an invalid index. Among co-located extreme robots a
// faulty one is preferred, then the lower (leftmost) or higher (rightmost)
// index.
Neighborhood visible_set(const Configuration& config, std::size_t i);

bool is_connected(const Configuration& config);

struct Violation {
  std::string message;
  bool warning = false;
};

// Empty iff every configuration invariant holds. Warnings (such as two faults
// sharing a position) are reported but do not make a configuration invalid.
std::vector<Violation> validate(const Configuration& config);
bool has_errors(const std::vector<Violation>& violations);

}  // namespace linebots
