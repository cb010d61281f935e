#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linebots/chains.hpp"
#include "linebots/configuration.hpp"
#include "linebots/engine.hpp"

namespace linebots {

struct ChainLimit {
  int level = 0;
  std::vector<RobotId> members;
  RobotId left_anchor = 0;
  RobotId right_anchor = 0;
  double left_limit = 0.0;
  double right_limit = 0.0;
  // Distance between consecutive limits, anchors included.
  double spacing = 0.0;
  std::string provenance;
};

// Predicted limit of every robot, keyed by id so it can be compared against
// any later snapshot of the same run.
struct LimitPattern {
  std::vector<std::pair<RobotId, double>> predicted;  // source index order
  std::vector<ChainLimit> chains;                     // hierarchy order

  std::optional<double> limit_for(RobotId id) const;
};

// Level by level: faults keep their positions, each chain is spread evenly
// between the limits of its anchors, outsiders go to their adjacent fault.
LimitPattern predict_limit(const Configuration& config,
                           const Hierarchy& hierarchy);

struct LimitReport {
  std::size_t steps = 0;
  double tolerance = 0.0;
  double max_deviation = 0.0;
  std::optional<RobotId> worst_robot;
  double final_displacement = 0.0;
  // Max |gap - spacing| per chain, same order as LimitPattern::chains.
  std::vector<double> chain_spacing_error;
  std::vector<RobotId> missing;  // predicted ids absent from the final step
  std::vector<RobotId> unpredicted;
  bool passed = false;
};

// Compares the final snapshot of `trace` against `pattern`.
LimitReport verify_limit(const Trace& trace, const LimitPattern& pattern,
                         double tol);

// g(i, k) = sqrt(2/m) sin(k i pi / m).
double sine_basis(std::size_t i, std::size_t k, std::size_t m);

// cos^2(pi / m); exactly 0 for m = 2.
double decay_factor(std::size_t m);

struct SpreadDiagnostics {
  std::size_t m = 0;
  std::vector<double> eta;  // x_i - i/m after mapping the endpoints to 0, 1
  double psi = 0.0;         // sum of eta_i^2
  std::vector<double> mu;   // mu_k = sum_i eta_i g(i,k), k = 0..m
  double upsilon = 0.0;
  double max_abs_eta = 0.0;
};

// Throws DegenerateInterval for coincident endpoints and ConfigurationError
// for fewer than 3 robots.
SpreadDiagnostics spreading_diagnostics(const Configuration& config,
                                        std::pair<double, double> endpoints);

// eta_i = sum_k mu_k g(i,k) for i = 0..m.
std::vector<double> reconstruct_eta(std::span<const double> mu);

// Below this, double-precision rounding in the interior positions dominates
// psi(t+1)/psi(t) and the ratio no longer measures contraction.
double psi_noise_floor(std::size_t m, double slack);

struct DecayOptions {
  double slack = 1e-9;
  // 0 selects max(1e-300, psi_noise_floor(m, slack)).
  double floor = 0.0;
  // Normalization interval; defaults to the endpoints of the first snapshot.
  std::optional<std::pair<double, double>> endpoints;
};

struct DecayReport {
  std::size_t m = 0;
  double upsilon = 0.0;
  double floor = 0.0;
  std::vector<double> psi;
  std::vector<double> ratios;  // psi(t+1)/psi(t) while psi(t) >= floor
  double max_ratio = 0.0;
  std::optional<std::size_t> first_violation;
  std::optional<std::size_t> converged_at;  // first t with psi(t) < floor
  double fitted_rate = 0.0;  // geometric fit of psi over the ratio range
  bool passed = false;
};

DecayReport decay_check(const Trace& trace, const DecayOptions& options = {});

enum class ProbeStatus { kPassed, kFailed, kNotApplicable };
std::string_view to_string(ProbeStatus status);

struct ProbePair {
  RobotId left = 0;   // x'_{a+1}
  RobotId right = 0;  // x'_{a+2}
  std::size_t onset = 0;  // first step of the trailing run within delta of V
  double final_gap = 0.0;
  double left_gap_trend = 0.0;   // slope of V - (x'_{a+1} - l(x'_{a+1}))
  double right_gap_trend = 0.0;  // slope of V - (r(x'_{a+2}) - x'_{a+2})
  bool passed = false;
};

struct ProbeOptions {
  // Relative to V.
  double delta = 1e-3;
  std::size_t window = 50;
  // Allowed growth of the distance to V across the window, relative to V.
  double slack = 1e-12;
};

struct ProbeReport {
  ProbeStatus status = ProbeStatus::kNotApplicable;
  std::vector<ProbePair> pairs;
};

// `chain` indexes the final snapshot of the trace. Consecutive pairs of the
// chain, anchors included, whose gap ends within delta of V are checked for a
// non-increasing distance-to-V trend on the adjacent gaps.
ProbeReport propagation_probe(const Trace& trace, const Chain& chain,
                              const ProbeOptions& options = {});

}  // namespace linebots
