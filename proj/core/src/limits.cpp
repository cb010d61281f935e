#include "linebots/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "linebots/errors.hpp"

namespace linebots {
namespace {

// Least-squares slope of ys against 0, 1, 2, ...
double Slope(std::span<const double> ys) {
  const std::size_t n = ys.size();
  if (n < 2) return 0.0;
  const double mean_x = (static_cast<double>(n) - 1) / 2;
  double mean_y = 0.0;
  for (double y : ys) mean_y += y;
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mean_x;
    sxy += dx * (ys[i] - mean_y);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::string Provenance(int level) {
  switch (level) {
    case kOutsiderLevel: return "outsider: limit is the adjacent fault";
    case 0: return "fault: never moves";
    case 1: return "primary chain: spacing |x_n - x_0| / k";
    default:
      return "level-" + std::to_string(level) +
             " chain: even spacing between anchor limits";
  }
}

}  // namespace

std::optional<double> LimitPattern::limit_for(RobotId id) const {
  for (const auto& [robot, limit] : predicted) {
    if (robot == id) return limit;
  }
  return std::nullopt;
}

LimitPattern predict_limit(const Configuration& config,
                           const Hierarchy& hierarchy) {
  const std::size_t n = config.size();
  if (hierarchy.assignment.size() != n) {
    std::vector<std::size_t> missing;
    for (std::size_t i = hierarchy.assignment.size(); i < n; ++i) {
      missing.push_back(i);
    }
    throw HierarchyIncomplete("hierarchy does not cover the configuration",
                              missing);
  }

  std::vector<std::optional<double>> limit(n);
  LimitPattern pattern;
  pattern.chains.resize(hierarchy.chains.size());

  std::vector<std::size_t> order(hierarchy.chains.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return hierarchy.chains[a].level < hierarchy.chains[b].level;
  });

  for (std::size_t c : order) {
    const Chain& chain = hierarchy.chains[c];
    ChainLimit& out = pattern.chains[c];
    out.level = chain.level;
    out.left_anchor = config[chain.left_anchor].id;
    out.right_anchor = config[chain.right_anchor].id;
    out.provenance = Provenance(chain.level);
    for (std::size_t m : chain.members) out.members.push_back(config[m].id);

    if (chain.level == 0) {
      for (std::size_t m : chain.members) limit[m] = config.position(m);
      out.left_limit = out.right_limit = config.position(chain.left_anchor);
      continue;
    }
    if (chain.level == kOutsiderLevel) {
      const double fault = config.position(chain.left_anchor);
      for (std::size_t m : chain.members) limit[m] = fault;
      out.left_limit = out.right_limit = fault;
      continue;
    }
    if (!limit[chain.left_anchor] || !limit[chain.right_anchor]) {
      throw HierarchyIncomplete(
          "chain " + std::to_string(c) + " anchored at unresolved robots",
          chain.members);
    }
    const double y0 = *limit[chain.left_anchor];
    const double y1 = *limit[chain.right_anchor];
    const double k = static_cast<double>(chain.members.size());
    out.left_limit = y0;
    out.right_limit = y1;
    out.spacing = std::abs(y1 - y0) / (k + 1);
    for (std::size_t i = 0; i < chain.members.size(); ++i) {
      limit[chain.members[i]] = y0 + out.spacing * static_cast<double>(i + 1);
    }
  }

  pattern.predicted.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!limit[i]) {
      throw HierarchyIncomplete("robot " + std::to_string(i) +
                                    " has no predicted limit",
                                {i});
    }
    pattern.predicted.push_back({config[i].id, *limit[i]});
  }
  return pattern;
}

LimitReport verify_limit(const Trace& trace, const LimitPattern& pattern,
                         double tol) {
  LimitReport report;
  report.steps = trace.steps();
  report.tolerance = tol;
  report.final_displacement = trace.final_displacement();
  const Configuration& last = trace.last();

  for (const auto& [id, predicted] : pattern.predicted) {
    const auto i = last.index_of(id);
    if (!i) {
      report.missing.push_back(id);
      continue;
    }
    const double deviation = std::abs(last.position(*i) - predicted);
    if (!report.worst_robot || deviation > report.max_deviation) {
      report.max_deviation = deviation;
      report.worst_robot = id;
    }
  }
  for (const Robot& r : last.robots()) {
    if (!pattern.limit_for(r.id)) report.unpredicted.push_back(r.id);
  }

  for (const ChainLimit& chain : pattern.chains) {
    double error = 0.0;
    if (chain.level >= 1) {
      std::vector<RobotId> ids{chain.left_anchor};
      ids.insert(ids.end(), chain.members.begin(), chain.members.end());
      ids.push_back(chain.right_anchor);
      std::optional<double> previous;
      for (RobotId id : ids) {
        const auto i = last.index_of(id);
        if (!i) {
          error = std::numeric_limits<double>::infinity();
          break;
        }
        const double x = last.position(*i);
        if (previous) error = std::max(error, std::abs(x - *previous - chain.spacing));
        previous = x;
      }
    }
    report.chain_spacing_error.push_back(error);
  }

  report.passed = report.missing.empty() && report.unpredicted.empty() &&
                  report.max_deviation <= tol;
  return report;
}

double sine_basis(std::size_t i, std::size_t k, std::size_t m) {
  const double md = static_cast<double>(m);
  return std::sqrt(2.0 / md) *
         std::sin(static_cast<double>(k) * static_cast<double>(i) *
                  std::numbers::pi / md);
}

double decay_factor(std::size_t m) {
  // cos^2(x) = (1 + cos 2x) / 2; cos(pi) is exactly -1, so m = 2 gives 0.
  return (1.0 + std::cos(2.0 * std::numbers::pi / static_cast<double>(m))) / 2;
}

SpreadDiagnostics spreading_diagnostics(const Configuration& config,
                                        std::pair<double, double> endpoints) {
  if (config.size() < 3) {
    throw ConfigurationError("spreading diagnostics need at least 3 robots");
  }
  const auto [a, b] = endpoints;
  if (!(std::abs(b - a) > config.tolerance())) {
    throw DegenerateInterval("endpoints coincide: cannot normalize");
  }
  SpreadDiagnostics d;
  d.m = config.size() - 1;
  const double md = static_cast<double>(d.m);
  d.eta.resize(d.m + 1);
  for (std::size_t i = 0; i <= d.m; ++i) {
    d.eta[i] = (config.position(i) - a) / (b - a) - static_cast<double>(i) / md;
    d.psi += d.eta[i] * d.eta[i];
    d.max_abs_eta = std::max(d.max_abs_eta, std::abs(d.eta[i]));
  }
  d.mu.assign(d.m + 1, 0.0);
  for (std::size_t k = 0; k <= d.m; ++k) {
    for (std::size_t i = 0; i <= d.m; ++i) {
      d.mu[k] += d.eta[i] * sine_basis(i, k, d.m);
    }
  }
  d.upsilon = decay_factor(d.m);
  return d;
}

std::vector<double> reconstruct_eta(std::span<const double> mu) {
  const std::size_t m = mu.size() - 1;
  std::vector<double> eta(m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t k = 0; k <= m; ++k) eta[i] += mu[k] * sine_basis(i, k, m);
  }
  return eta;
}

double psi_noise_floor(std::size_t m, double slack) {
  const double unit = 4 * std::numeric_limits<double>::epsilon() / slack;
  return static_cast<double>(m + 1) * unit * unit;
}

DecayReport decay_check(const Trace& trace, const DecayOptions& options) {
  DecayReport report;
  const Configuration& first = trace.initial();
  report.m = first.size() - 1;
  const auto endpoints = options.endpoints.value_or(
      std::pair{first.position(0), first.position(report.m)});
  report.upsilon = decay_factor(report.m);
  report.floor = options.floor > 0
                     ? options.floor
                     : std::max(1e-300, psi_noise_floor(report.m, options.slack));

  for (const Configuration& c : trace.configurations) {
    report.psi.push_back(spreading_diagnostics(c, endpoints).psi);
  }
  std::size_t fit_end = 0;
  for (std::size_t t = 0; t + 1 < report.psi.size(); ++t) {
    if (report.psi[t] < report.floor) {
      report.converged_at = t;
      break;
    }
    const double ratio = report.psi[t + 1] / report.psi[t];
    report.ratios.push_back(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (ratio > report.upsilon + options.slack && !report.first_violation) {
      report.first_violation = t;
    }
    fit_end = t + 1;
  }
  if (!report.converged_at && !report.psi.empty() &&
      report.psi.back() < report.floor) {
    report.converged_at = report.psi.size() - 1;
  }

  std::vector<double> logs;
  for (std::size_t t = 0; t <= fit_end && t < report.psi.size(); ++t) {
    if (report.psi[t] <= 0) break;
    logs.push_back(std::log(report.psi[t]));
  }
  report.fitted_rate = logs.size() >= 2 ? std::exp(Slope(logs)) : 0.0;
  report.passed = !report.first_violation;
  return report;
}

std::string_view to_string(ProbeStatus status) {
  switch (status) {
    case ProbeStatus::kPassed: return "passed";
    case ProbeStatus::kFailed: return "failed";
    case ProbeStatus::kNotApplicable: return "not_applicable";
  }
  return "?";
}

ProbeReport propagation_probe(const Trace& trace, const Chain& chain,
                              const ProbeOptions& options) {
  ProbeReport report;
  const Configuration& last = trace.last();
  const double v = last.visibility();

  std::vector<RobotId> sequence;
  auto push = [&](std::size_t index) {
    const RobotId id = last.at(index).id;
    if (sequence.empty() || sequence.back() != id) sequence.push_back(id);
  };
  push(chain.left_anchor);
  for (std::size_t m : chain.members) push(m);
  push(chain.right_anchor);

  for (std::size_t k = 0; k + 1 < sequence.size(); ++k) {
    const RobotId a = sequence[k];
    const RobotId b = sequence[k + 1];
    const std::size_t ia = *last.index_of(a);
    const std::size_t ib = *last.index_of(b);
    const Neighborhood na = visible_set(last, ia);
    const Neighborhood nb = visible_set(last, ib);
    const bool mutual = na.rightmost == ib && nb.leftmost == ia;
    if (!mutual || na.leftmost == ia || nb.rightmost == ib) continue;
    const double final_gap = last.position(ib) - last.position(ia);
    if (std::abs(v - final_gap) > options.delta * v) continue;

    // Distances to V of the central and adjacent gaps over time.
    std::vector<double> central;
    std::vector<double> left;
    std::vector<double> right;
    for (const Configuration& c : trace.configurations) {
      const auto ca = c.index_of(a);
      const auto cb = c.index_of(b);
      if (!ca || !cb) {
        central.clear();
        left.clear();
        right.clear();
        continue;
      }
      const Neighborhood sa = visible_set(c, *ca);
      const Neighborhood sb = visible_set(c, *cb);
      central.push_back(std::abs(v - (c.position(*cb) - c.position(*ca))));
      left.push_back(v - (c.position(*ca) - c.position(sa.leftmost)));
      right.push_back(v - (c.position(sb.rightmost) - c.position(*cb)));
    }
    std::size_t onset = central.size();
    while (onset > 0 && central[onset - 1] <= options.delta * v) --onset;
    const std::size_t run = central.size() - onset;
    const std::size_t window = std::min(run, options.window);
    const std::size_t start = central.size() - window;

    ProbePair pair;
    pair.left = a;
    pair.right = b;
    pair.onset = trace.configurations.size() - central.size() + onset;
    pair.final_gap = final_gap;
    const std::span<const double> lw(left.data() + start, window);
    const std::span<const double> rw(right.data() + start, window);
    pair.left_gap_trend = Slope(lw);
    pair.right_gap_trend = Slope(rw);
    const double slack = options.slack * v;
    pair.passed = window >= 1 && pair.left_gap_trend <= slack &&
                  pair.right_gap_trend <= slack &&
                  lw.back() <= lw.front() + slack &&
                  rw.back() <= rw.front() + slack;
    report.pairs.push_back(pair);
  }

  if (report.pairs.empty()) {
    report.status = ProbeStatus::kNotApplicable;
  } else {
    report.status = std::all_of(report.pairs.begin(), report.pairs.end(),
                                [](const ProbePair& p) { return p.passed; })
                        ? ProbeStatus::kPassed
                        : ProbeStatus::kFailed;
  }
  return report;
}

}  // namespace linebots
