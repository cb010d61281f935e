#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace linebots {

// Robot index outside the configuration.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A configuration that cannot be processed by the requested operation.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The visibility graph between the two faults is disconnected.
class ChainBreakError : public std::runtime_error {
 public:
  ChainBreakError(const std::string& what, double gap_left, double gap_right)
      : std::runtime_error(what), gap_left_(gap_left), gap_right_(gap_right) {}

  double gap_left() const { return gap_left_; }
  double gap_right() const { return gap_right_; }

 private:
  double gap_left_;
  double gap_right_;
};

// A proven dynamical property failed to hold. Always a simulator or analysis
// bug, never a user error.
class InvariantViolation : public std::logic_error {
 public:
  InvariantViolation(const std::string& what, std::size_t step,
                     std::vector<std::size_t> robots = {})
      : std::logic_error(what), step_(step), robots_(std::move(robots)) {}

  std::size_t step() const { return step_; }
  const std::vector<std::size_t>& robots() const { return robots_; }

 private:
  std::size_t step_;
  std::vector<std::size_t> robots_;
};

// Some robots could not be placed in any level-j chain.
class HierarchyIncomplete : public std::runtime_error {
 public:
  HierarchyIncomplete(const std::string& what,
                      std::vector<std::size_t> unassigned,
                      std::vector<std::string> diagnostics = {})
      : std::runtime_error(what),
        unassigned_(std::move(unassigned)),
        diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::size_t>& unassigned() const { return unassigned_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::size_t> unassigned_;
  std::vector<std::string> diagnostics_;
};

class DegenerateInterval : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace linebots
