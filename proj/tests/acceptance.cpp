// Acceptance suite: one PASS/FAIL line per criterion on stdout, details on
// stderr. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linebots/chains.hpp"
#include "linebots/engine.hpp"
#include "linebots/errors.hpp"
#include "linebots/io.hpp"
#include "linebots/limits.hpp"
#include "support/corpus.hpp"

namespace lb = linebots;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* format, double a = 0, double b = 0, double c = 0,
                double d = 0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, format, a, b, c, d);
  return buffer;
}

// Order inversions and visibility losses, tallied over every recorded step.
struct Audit {
  std::size_t ordered_traces = 0;
  std::size_t ordered_steps = 0;
  std::size_t inversions = 0;
  std::size_t aborts = 0;
  std::size_t ssynch_overtakes = 0;  // Convergence1D under SSYNCH, not covered
  double slowest_run = 0;
};

Audit audit;

std::size_t Inversions(const lb::Configuration& a, const lb::Configuration& b) {
  std::vector<std::pair<double, double>> moves;
  for (const lb::Robot& r : a.robots()) {
    if (r.faulty) continue;
    if (auto j = b.index_of(r.id)) moves.emplace_back(r.position, b.position(*j));
  }
  std::size_t count = 0;
  for (const auto& [x0, x1] : moves) {
    for (const auto& [z0, z1] : moves) {
      if (x0 < z0 && x1 > z1) ++count;
    }
  }
  return count;
}

std::size_t VisibilityLosses(const lb::Configuration& a, const lb::Configuration& b) {
  const double v = a.visibility();
  std::size_t lost = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto bi = b.index_of(a[i].id);
    if (!bi) continue;
    for (std::size_t j = i + 1; j < a.size() && a.position(j) - a.position(i) <= v; ++j) {
      const auto bj = b.index_of(a[j].id);
      if (bj && std::abs(b.position(*bj) - b.position(*bi)) > v) ++lost;
    }
  }
  return lost;
}

// Every simulation goes through here so the order audit sees all of them.
std::optional<lb::Trace> Simulate(const lb::Configuration& c, lb::RunOptions options) {
  const auto start = std::chrono::steady_clock::now();
  std::optional<lb::Trace> trace;
  try {
    trace = lb::run(c, options);
  } catch (const lb::InvariantViolation& e) {
    ++audit.aborts;
    std::fprintf(stderr, "  abort: %s\n", e.what());
    return std::nullopt;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  audit.slowest_run = std::max(audit.slowest_run, seconds);
  const bool ordered = options.scheduler == lb::Scheduler::kFsynch ||
                       options.rule == lb::Rule::kSpreading;
  std::size_t inversions = 0;
  for (std::size_t t = 0; t < trace->steps(); ++t) {
    inversions += Inversions(trace->configurations[t], trace->configurations[t + 1]);
  }
  if (ordered) {
    ++audit.ordered_traces;
    audit.ordered_steps += trace->steps();
    audit.inversions += inversions;
  } else {
    audit.ssynch_overtakes += inversions;
  }
  return trace;
}

lb::RunOptions Options(lb::Scheduler scheduler = lb::Scheduler::kFsynch,
                       std::uint64_t seed = 0) {
  lb::RunOptions o;
  o.scheduler = scheduler;
  o.seed = seed;
  o.max_steps = 1000000;
  return o;
}

double Span(const std::vector<double>& x) {
  return *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
}

double FaultSpan(const lb::Configuration& c) {
  const auto f = c.faulty_indices();
  return c.position(f.back()) - c.position(f.front());
}

// ---------------------------------------------------------------------------

Outcome PointConvergence() {
  Outcome out;
  double worst = 0;
  std::size_t runs = 0;
  for (lb::Scheduler sched : {lb::Scheduler::kFsynch, lb::Scheduler::kSsynch}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto c = lb::corpus::ZeroFault(seed, 30);
      const auto trace = Simulate(c, Options(sched, seed));
      ++runs;
      if (!trace || trace->stop_reason != lb::StopReason::kConverged) {
        out.pass = false;
        continue;
      }
      const double rel = Span(trace->last().positions()) / Span(c.positions());
      worst = std::max(worst, rel);
      if (!(rel < 1e-6)) out.pass = false;
    }
  }
  out.detail = std::to_string(runs) + " runs (FSYNCH+SSYNCH, W=3n), worst spread " +
               Fmt("%.2e", worst) + " of initial span";
  return out;
}

Outcome SingleFault() {
  Outcome out;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = lb::corpus::SingleFault(seed, 30);
    const auto trace = Simulate(c, Options(lb::Scheduler::kFsynch, seed));
    if (!trace || trace->stop_reason != lb::StopReason::kConverged) {
      out.pass = false;
      continue;
    }
    const lb::Configuration& last = trace->last();
    const double fault = last.position(last.faulty_indices().front());
    const double span = Span(c.positions());
    for (const lb::Robot& r : last.robots()) {
      const double rel = std::abs(r.position - fault) / span;
      worst = std::max(worst, rel);
      if (!(rel <= 1e-6)) out.pass = false;
    }
  }
  out.detail = "50 runs, worst distance to the fault " + Fmt("%.2e", worst) + " of span";
  return out;
}

// Traces, certificates and patterns shared by the two-fault criteria.
struct TwoFaultRun {
  std::string name;
  lb::Configuration initial;
  std::optional<lb::Trace> trace;
  std::optional<lb::SizeStableCertificate> cert;
};

std::vector<TwoFaultRun> primary_runs;
std::vector<TwoFaultRun> nested_runs;

TwoFaultRun RunTwoFault(std::string name, const lb::Configuration& c, std::uint64_t seed) {
  TwoFaultRun r{std::move(name), c, Simulate(c, Options(lb::Scheduler::kFsynch, seed)), {}};
  if (r.trace) r.cert = lb::earliest_size_stable(*r.trace);
  return r;
}

bool Certified(const TwoFaultRun& r) {
  return r.trace && r.cert && r.cert->status == lb::CertificateStatus::kCertified;
}

Outcome PrimaryChainLimit() {
  Outcome out;
  std::size_t members = 0;
  std::size_t uncertified = 0;
  std::size_t no_chain = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    primary_runs.push_back(RunTwoFault("two-fault " + std::to_string(seed),
                                       lb::corpus::TwoFault(seed, 30), seed));
    const TwoFaultRun& r = primary_runs.back();
    if (!Certified(r)) {
      ++uncertified;
      out.pass = false;
      continue;
    }
    const lb::Configuration& c = r.trace->configurations[r.cert->earliest];
    const auto chain = lb::primary_chain(c);
    if (!chain) {
      ++no_chain;
      out.pass = false;
      continue;
    }
    // Limit of the i-th link: x_0 + i |x_n - x_0| / k.
    const double x0 = c.position(chain->members.front());
    const double span = FaultSpan(c);
    const double k = static_cast<double>(chain->members.size() - 1);
    const lb::LimitPattern pattern = lb::predict_limit(c, lb::chain_hierarchy(c));
    const lb::Configuration& last = r.trace->last();
    for (std::size_t i = 0; i < chain->members.size(); ++i) {
      const lb::RobotId id = c[chain->members[i]].id;
      const double formula = x0 + span * static_cast<double>(i) / k;
      const double predicted = *pattern.limit_for(id);
      const auto at = last.index_of(id);
      if (!at || std::abs(predicted - formula) > 1e-12 * span) {
        out.pass = false;
        continue;
      }
      const double rel = std::abs(last.position(*at) - predicted) / span;
      worst = std::max(worst, rel);
      if (!(rel <= 1e-6)) out.pass = false;
      ++members;
    }
    const auto report = lb::verify_limit(*r.trace, pattern, 1e-6 * span);
    if (!report.passed) out.pass = false;
  }
  out.detail = "100 instances, " + std::to_string(members) +
               " primary members, worst deviation " + Fmt("%.2e", worst) +
               " of |x_n - x_0|; uncertified " + std::to_string(uncertified) +
               ", without primary chain " + std::to_string(no_chain);
  return out;
}

Outcome LevelJLimit() {
  Outcome out;
  nested_runs.push_back(RunTwoFault("reference", lb::corpus::ReferenceHierarchy(), 0));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    nested_runs.push_back(
        RunTwoFault("nested " + std::to_string(seed), lb::corpus::Nested(seed), seed));
  }
  std::size_t nontrivial = 0;
  std::size_t robots = 0;
  double worst = 0;
  bool reference_levels = false;
  for (const TwoFaultRun& r : nested_runs) {
    if (!Certified(r)) {
      out.pass = false;
      std::fprintf(stderr, "  %s: not certified\n", r.name.c_str());
      continue;
    }
    const lb::Configuration& c = r.trace->configurations[r.cert->earliest];
    try {
      const lb::Hierarchy h = lb::chain_hierarchy(c);
      if (h.max_level() >= 2) ++nontrivial;
      if (r.name == "reference") reference_levels = h.count_at_level(2) == 2;
      const double span = FaultSpan(c);
      const auto pattern = lb::predict_limit(c, h);
      const auto report = lb::verify_limit(*r.trace, pattern, 1e-6 * span);
      worst = std::max(worst, report.max_deviation / span);
      robots += pattern.predicted.size();
      if (!report.passed) {
        out.pass = false;
        std::fprintf(stderr, "  %s: deviation %.3e\n", r.name.c_str(), report.max_deviation);
      }
    } catch (const std::exception& e) {
      out.pass = false;
      std::fprintf(stderr, "  %s: %s\n", r.name.c_str(), e.what());
    }
  }
  if (nontrivial < 20 || !reference_levels) out.pass = false;
  out.detail = std::to_string(nested_runs.size()) + " instances (" +
               std::to_string(nontrivial) + " with level >= 2, reference hierarchy " +
               (reference_levels ? "has" : "lacks") + " two level-2 chains), " +
               std::to_string(robots) + " robots, worst deviation " + Fmt("%.2e", worst) +
               " of span";
  return out;
}

Outcome HierarchyTotality() {
  Outcome out;
  std::size_t checked = 0;
  std::size_t incomplete = 0;
  std::size_t uncertified = 0;
  for (const auto* runs : {&primary_runs, &nested_runs}) {
    for (const TwoFaultRun& r : *runs) {
      if (!Certified(r)) {
        ++uncertified;
        continue;
      }
      ++checked;
      const lb::Configuration& c = r.trace->last();
      try {
        const lb::Hierarchy h = lb::chain_hierarchy(c);
        if (h.assignment.size() != c.size()) ++incomplete;
      } catch (const lb::HierarchyIncomplete&) {
        ++incomplete;
      }
    }
  }
  out.pass = incomplete == 0 && checked > 0;
  out.detail = std::to_string(checked) + " certified final configurations, " +
               std::to_string(incomplete) + " incomplete (" + std::to_string(uncertified) +
               " uncertified, outside scope)";
  return out;
}

Outcome VisibilityMonotonicity() {
  Outcome out;
  std::size_t steps = 0;
  std::size_t losses = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sched = seed % 2 ? lb::Scheduler::kSsynch : lb::Scheduler::kFsynch;
    const auto c = seed % 4 < 2 ? lb::corpus::TwoFault(1000 + seed, 30)
                                : lb::corpus::WithOutsiders(1000 + seed);
    const auto trace = Simulate(c, Options(sched, seed));
    if (!trace) {
      out.pass = false;
      continue;
    }
    for (std::size_t t = 0; t < trace->steps(); ++t) {
      losses += VisibilityLosses(trace->configurations[t], trace->configurations[t + 1]);
    }
    steps += trace->steps();
  }
  out.pass = out.pass && losses == 0;
  out.detail = "20 traces (FSYNCH and SSYNCH), " + std::to_string(steps) + " steps, " +
               std::to_string(losses) + " violations";
  return out;
}

Outcome Outsiders() {
  Outcome out;
  std::size_t started = 0;
  std::size_t stayed = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = lb::corpus::WithOutsiders(seed);
    const auto trace = Simulate(c, Options(lb::Scheduler::kFsynch, seed));
    if (!trace || trace->stop_reason != lb::StopReason::kConverged) {
      out.pass = false;
      continue;
    }
    const double x0 = c.position(c.faulty_indices().front());
    const double xn = c.position(c.faulty_indices().back());
    for (const lb::Robot& r : c.robots()) started += r.position < x0 || r.position > xn;
    std::size_t left = 0;
    std::size_t right = 0;
    for (const lb::Robot& r : trace->last().robots()) {
      if (r.position < x0) {
        ++left;
        worst = std::max(worst, (x0 - r.position) / (xn - x0));
      } else if (r.position > xn) {
        ++right;
        worst = std::max(worst, (r.position - xn) / (xn - x0));
      }
    }
    stayed += left + right;
    if (left > 1 || right > 1) out.pass = false;
  }
  if (!(worst <= 1e-6)) out.pass = false;
  out.detail = "20 instances, " + std::to_string(started) + " outsiders at start, " +
               std::to_string(stayed) + " remaining, worst distance " + Fmt("%.2e", worst) +
               " of span";
  return out;
}

lb::Configuration SpreadingStart(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(m + 1);
  for (double& xi : x) xi = u(rng);
  std::sort(x.begin(), x.end());
  x.front() = 0.0;
  x.back() = 1.0;
  return lb::Configuration::FromPositions(x, {}, 1.0);
}

Outcome SpreadingDecay() {
  Outcome out;
  std::string per_m;
  for (std::size_t m : {2, 3, 4, 8, 16}) {
    double max_ratio = 0;
    double rate = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed * 31 + m);
      lb::RunOptions o = Options(lb::Scheduler::kFsynch, seed);
      o.rule = lb::Rule::kSpreading;
      const auto trace = Simulate(SpreadingStart(m, rng), o);
      if (!trace) {
        out.pass = false;
        continue;
      }
      const lb::DecayReport report = lb::decay_check(*trace);
      if (!report.passed || !report.converged_at) out.pass = false;
      if (m == 2 && !(report.psi.size() > 1 && report.psi[0] > 0 && report.psi[1] == 0.0)) {
        out.pass = false;
      }
      max_ratio = std::max(max_ratio, report.max_ratio);
      rate = std::max(rate, report.fitted_rate);
    }
    per_m += " m=" + std::to_string(m) + Fmt(" max %.4f/bound %.4f", max_ratio, lb::decay_factor(m));
  }
  out.detail = "10 starts per m;" + per_m;
  return out;
}

Outcome MovingAnchors() {
  Outcome out;
  double worst = 0;
  std::size_t runs = 0;
  for (std::size_t m : {3, 5, 8, 12}) {
    for (double rho : {0.5, 0.8, 0.95}) {
      std::mt19937_64 rng(m * 100 + static_cast<std::uint64_t>(rho * 100));
      const lb::Configuration c = SpreadingStart(m, rng);
      const double a = -1.0;
      const double b = 3.0;
      lb::RunOptions o = Options();
      o.rule = lb::Rule::kSpreading;
      o.anchor_motion = [=](std::size_t t) {
        const double f = std::pow(rho, static_cast<double>(t));
        return lb::AnchorPositions{a + (0.0 - a) * f, b + (1.0 - b) * f};
      };
      const auto trace = Simulate(c, o);
      ++runs;
      if (!trace) {
        out.pass = false;
        continue;
      }
      // First step with both anchors within 1e-9 of their limits.
      std::optional<std::size_t> settled;
      for (std::size_t t = 0; t < trace->configurations.size() && !settled; ++t) {
        const auto& s = trace->configurations[t];
        if (std::abs(s.position(0) - a) <= 1e-9 && std::abs(s.position(m) - b) <= 1e-9) {
          settled = t;
        }
      }
      if (!settled || *settled >= trace->steps()) {
        out.pass = false;
        continue;
      }
      const lb::Configuration& last = trace->last();
      for (std::size_t i = 1; i < m; ++i) {
        const double want = a + (b - a) * static_cast<double>(i) / static_cast<double>(m);
        worst = std::max(worst, std::abs(last.position(i) - want));
      }
    }
  }
  if (!(worst <= 1e-6)) out.pass = false;
  out.detail = std::to_string(runs) + " runs (m in {3,5,8,12}, rate in {0.5,0.8,0.95}), " +
               "worst distance to equidistance " + Fmt("%.2e", worst);
  return out;
}

Outcome Fourier() {
  Outcome out;
  double worst_orth = 0;
  double worst_null = 0;
  for (std::size_t m = 2; m <= 32; ++m) {
    for (std::size_t k = 0; k <= m; ++k) {
      for (std::size_t q = 0; q <= m; ++q) {
        double sum = 0;
        for (std::size_t i = 0; i <= m; ++i) sum += lb::sine_basis(i, k, m) * lb::sine_basis(i, q, m);
        const bool null_mode = k == 0 || k == m;
        if (k == q && null_mode) {
          worst_null = std::max(worst_null, std::abs(sum));
        } else {
          worst_orth = std::max(worst_orth, std::abs(sum - (k == q ? 1.0 : 0.0)));
        }
      }
    }
  }
  double worst_rec = 0;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = size(rng);
    std::vector<double> eta(m + 1, 0.0);
    for (std::size_t i = 1; i < m; ++i) eta[i] = u(rng);
    std::vector<double> mu(m + 1, 0.0);
    for (std::size_t k = 0; k <= m; ++k) {
      for (std::size_t i = 0; i <= m; ++i) mu[k] += eta[i] * lb::sine_basis(i, k, m);
    }
    const auto back = lb::reconstruct_eta(mu);
    if (back.size() != eta.size()) {
      out.pass = false;
      continue;
    }
    for (std::size_t i = 0; i <= m; ++i) worst_rec = std::max(worst_rec, std::abs(back[i] - eta[i]));
  }
  out.pass = out.pass && worst_orth <= 1e-10 && worst_null <= 1e-10 && worst_rec <= 1e-10;
  out.detail = Fmt("orthonormality error %.2e for m <= 32 (null modes k = 0, m sum to %.1e), "
                   "reconstruction error %.2e on 100 vectors",
                   worst_orth, worst_null, worst_rec);
  return out;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Determinism() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "linebots_acceptance_determinism";
  fs::remove_all(root);
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (lb::Scheduler sched : {lb::Scheduler::kFsynch, lb::Scheduler::kSsynch}) {
      const auto c = seed % 2 ? lb::corpus::WithOutsiders(seed) : lb::corpus::TwoFault(seed, 30);
      for (const char* side : {"a", "b"}) {
        const auto trace = Simulate(c, Options(sched, 17 + seed));
        if (!trace) {
          out.pass = false;
          continue;
        }
        lb::write_run(root / side, *trace, lb::summarize(*trace, "det", 0));
      }
      for (const char* f : {"trace.csv", "events.csv", "summary.json", "activations.csv"}) {
        const bool exists = fs::exists(root / "a" / f);
        if (exists != fs::exists(root / "b" / f)) out.pass = false;
        if (!exists) continue;
        if (Slurp(root / "a" / f) != Slurp(root / "b" / f)) out.pass = false;
        ++compared;
      }
      fs::remove_all(root);
    }
  }
  out.detail = std::to_string(compared) + " file pairs compared byte for byte";
  return out;
}

Outcome OrderPreservation() {
  Outcome out;
  out.pass = audit.inversions == 0 && audit.aborts == 0 && audit.ordered_traces > 0;
  out.detail = std::to_string(audit.ordered_traces) + " FSYNCH/spreading traces, " +
               std::to_string(audit.ordered_steps) + " steps, " +
               std::to_string(audit.inversions) + " inversions, " +
               std::to_string(audit.aborts) + " aborts; SSYNCH Convergence1D overtakes " +
               std::to_string(audit.ssynch_overtakes) + " (no ordering guarantee there)";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  // Order preservation audits the traces of every other criterion, so it runs last.
  const std::vector<Criterion> criteria = {
      {1, "zero-fault point convergence", PointConvergence},
      {2, "single-fault convergence", SingleFault},
      {3, "two-fault primary-chain limit", PrimaryChainLimit},
      {4, "level-j chain limits", LevelJLimit},
      {5, "hierarchy totality", HierarchyTotality},
      {7, "visibility monotonicity", VisibilityMonotonicity},
      {8, "outsider behaviour", Outsiders},
      {9, "spreading fixed-endpoint decay", SpreadingDecay},
      {10, "spreading with moving anchors", MovingAnchors},
      {11, "Fourier machinery", Fourier},
      {12, "determinism", Determinism},
      {6, "order preservation", OrderPreservation},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " criterion " +
                                 std::to_string(c.id) + " " + c.name + ": " + o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "slowest run %.3f s, total %.1f s\n", audit.slowest_run, total);
  return failures == 0 ? 0 : 1;
}
