#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "linebots/configuration.hpp"
#include "linebots/engine.hpp"

namespace linebots {

// Level of robots outside [x_0, x_n] that never enter the segment.
inline constexpr int kOutsiderLevel = -1;

// An ordered set of robot indices. `mutual` holds when every consecutive pair
// sees each other as farthest neighbours: r(members[i]) == members[i+1] and
// l(members[i+1]) == members[i].
struct Chain {
  std::vector<std::size_t> members;
  std::size_t left_anchor = 0;
  std::size_t right_anchor = 0;
  int level = 0;
  bool mutual = false;

  friend bool operator==(const Chain&, const Chain&) = default;
};

// The leftmost and rightmost faulty robots, x_0 and x_n. Chain analysis needs
// exactly two faults; anything else throws ConfigurationError.
struct SegmentFaults {
  std::size_t left = 0;
  std::size_t right = 0;
};
SegmentFaults segment_faults(const Configuration& config);

// Farthest visible neighbours restricted to robots inside [x_0, x_n]. This is
// the view used by the chain construction, which ignores outsiders.
class SegmentView {
 public:
  explicit SegmentView(const Configuration& config);

  const Configuration& config() const { return *config_; }
  const SegmentFaults& faults() const { return faults_; }
  bool inside(std::size_t i) const { return first_ <= i && i <= last_; }
  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }

  std::size_t left(std::size_t i) const;   // l(x) within the segment
  std::size_t right(std::size_t i) const;  // r(x) within the segment
  bool mutually_chained(std::size_t a, std::size_t b) const {
    return a != b && right(a) == b && left(b) == a;
  }

 private:
  const Configuration* config_;
  SegmentFaults faults_;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
};

// x_0, r(x_0), r(r(x_0)), ... up to x_n. Throws ChainBreakError when the
// segment is disconnected.
std::vector<std::size_t> forward_chain(const Configuration& config);

// x_n, l(x_n), ... taken as many times as the forward chain has links, in
// left-to-right order. Asserts the alternation and starting-point properties
// against the forward chain; a failure throws InvariantViolation.
std::vector<std::size_t> backward_chain(const Configuration& config);

// The forward chain as a level-1 chain iff it coincides with the backward
// chain; anchored at the faults themselves.
std::optional<Chain> primary_chain(const Configuration& config);

struct ChainRef {
  int level = 0;
  std::size_t chain = 0;

  friend bool operator==(const ChainRef&, const ChainRef&) = default;
};

// Every robot in exactly one chain. chains[0] and chains[1] are the level-0
// singletons {x_0} and {x_n}; the primary chain appears through its interior
// members x_1'..x_{k-1}' (anchored at the faults) and is absent when x_0
// sees x_n directly.
struct Hierarchy {
  std::vector<Chain> chains;
  std::vector<ChainRef> assignment;  // by robot index
  std::vector<std::string> diagnostics;

  int max_level() const;
  std::size_t count_at_level(int level) const;
};

// Assigns levels bottom-up until a fixpoint. Throws HierarchyIncomplete with
// the unassigned indices if some robot cannot be placed.
Hierarchy chain_hierarchy(const Configuration& config);

// Plain text listing: one line per chain with level, ids, positions, anchors.
std::string format_hierarchy(const Configuration& config,
                             const Hierarchy& hierarchy);

enum class CertificateStatus { kCertified, kRefuted, kInconclusive };
std::string_view to_string(CertificateStatus status);

struct SizeStableCertificate {
  CertificateStatus status = CertificateStatus::kInconclusive;
  std::size_t requested = 0;
  // Earliest step from which the window is clean; meaningful when certified.
  std::size_t earliest = 0;
  std::size_t window_end = 0;
  // First violation at or after `requested` when refuted.
  std::optional<std::size_t> violation_time;
  std::optional<Event> violating_event;
  std::string reason;
};

// Retrospective check over [t0, T] of the recorded trace: no crossings,
// mergings or inclusions, constant farthest neighbours, and at most one
// outsider per side moving monotonically toward its fault. Inconclusive when
// T - t0 < 2.
SizeStableCertificate size_stable_certificate(const Trace& trace,
                                              std::size_t t0);

// size_stable_certificate at the latest conclusive step; its `earliest` is
// the earliest certified step of the whole trace.
SizeStableCertificate earliest_size_stable(const Trace& trace);

}  // namespace linebots
