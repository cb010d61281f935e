#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "linebots/chains.hpp"
#include "linebots/errors.hpp"

namespace linebots::cli {
namespace {

std::vector<std::size_t> FaultIndices(const std::string& policy, std::size_t n,
                                      std::mt19937_64& rng) {
  if (policy == "two-extremal") {
    if (n < 2) throw UsageError("two-extremal needs n >= 2");
    return {0, n - 1};
  }
  if (policy == "single") {
    if (n < 1) throw UsageError("single needs n >= 1");
    return {std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
  }
  if (policy == "none") return {};
  std::vector<std::size_t> indices;
  std::stringstream in(policy);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    std::size_t value = 0;
    try {
      value = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) {
      throw UsageError("unknown fault policy '" + policy + "'");
    }
    if (value >= n) {
      throw UsageError("fault index " + item + " out of range for n = " +
                       std::to_string(n));
    }
    indices.push_back(value);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

std::string RunLabel(const Instance& instance,
                     const std::filesystem::path& path) {
  return instance.label.empty() ? path.stem().string() : instance.label;
}

Instance LoadValidInstance(const SimulateOptions& options) {
  if (options.instance.empty()) throw UsageError("--instance is required");
  if (!(options.tau > 0)) throw UsageError("--tau must be positive");
  Instance instance;
  try {
    instance = load_instance(options.instance, options.tau);
  } catch (const IndexError& e) {
    throw UsageError(e.what());
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  const auto violations = validate(instance.config);
  if (has_errors(violations)) {
    std::string message = "invalid instance:";
    for (const auto& v : violations) {
      if (!v.warning) message += " " + v.message + ";";
    }
    throw UsageError(message);
  }
  return instance;
}

// Connectivity is the convergence precondition, not a validity rule.
void WarnIfDisconnected(const Instance& instance, Streams io) {
  if (!is_connected(instance.config)) {
    io.err << "warning: visibility graph is disconnected; convergence "
              "guarantees do not apply\n";
  }
}

RunOptions MakeRunOptions(const SimulateOptions& options, std::uint64_t seed) {
  if (!(options.stop_displacement > 0)) {
    throw UsageError("--stop-displacement must be positive");
  }
  RunOptions run;
  run.rule = options.rule;
  run.scheduler = options.scheduler;
  run.seed = seed;
  run.max_steps = options.max_steps;
  run.stop = StopCriterion::Displacement(options.stop_displacement);
  run.fairness_window = options.fairness_window;
  return run;
}

std::string DescribeInvariant(const InvariantViolation& e) {
  std::ostringstream msg;
  msg << "invariant violated at step " << e.step() << ": " << e.what();
  if (!e.robots().empty()) {
    msg << " (robots";
    for (std::size_t r : e.robots()) msg << ' ' << r;
    msg << ")";
  }
  return msg.str();
}

// Runs one simulation and writes its run directory. Returns the exit code.
int SimulateInto(const Instance& instance, const std::string& label,
                 const SimulateOptions& options, std::uint64_t seed,
                 const std::filesystem::path& dir, std::string& report) {
  std::ostringstream msg;
  try {
    const Trace trace = run(instance.config, MakeRunOptions(options, seed));
    const RunSummary summary = summarize(trace, label, instance.origin);
    write_run(dir, trace, summary);
    msg << "run " << dir.string() << ": " << summary.steps << " steps, "
        << to_string(summary.stop_reason) << ", final displacement "
        << format_double(summary.final_displacement);
    for (const auto& [kind, count] : summary.event_counts) {
      msg << ", " << kind << " " << count;
    }
    report = msg.str();
    return kExitOk;
  } catch (const InvariantViolation& e) {
    report = DescribeInvariant(e);
    return kExitInvariant;
  }
}

std::string FormatIds(const std::vector<std::size_t>& ids) {
  std::string out = "[";
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(ids[k]);
  }
  return out + "]";
}

}  // namespace

std::filesystem::path output_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("LINEBOTS_OUT"); env && *env) return env;
  return "linebots_out";
}

Instance generate_instance(const GenOptions& options) {
  if (options.n < 2) throw UsageError("gen needs n >= 2");
  if (!(options.visibility > 0) || !std::isfinite(options.visibility)) {
    throw UsageError("V must be positive");
  }
  std::mt19937_64 rng(options.seed);
  const auto faults = FaultIndices(options.faults, options.n, rng);
  std::uniform_real_distribution<double> gap(0.05 * options.visibility,
                                             1.02 * options.visibility);
  for (std::size_t attempt = 0;; ++attempt) {
    std::vector<double> positions(options.n, 0.0);
    for (std::size_t i = 1; i < options.n; ++i) {
      positions[i] = positions[i - 1] + gap(rng);
    }
    const Configuration candidate = Configuration::FromPositions(
        positions, faults, options.visibility, kDefaultEqualityTolerance);
    if (!is_connected(candidate)) continue;
    Instance raw;
    raw.config = candidate;
    raw.label = options.label.empty()
                    ? "gen-n" + std::to_string(options.n) + "-s" +
                          std::to_string(options.seed)
                    : options.label;
    // One round trip applies the fault-at-origin normalization.
    return parse_instance(serialize_instance(raw));
  }
}

int cmd_gen(const GenOptions& options, const std::optional<std::string>& out,
            Streams io) {
  const Instance instance = generate_instance(options);
  const std::string text = serialize_instance(instance);
  if (!out || out->empty() || *out == "-") {
    io.out << text;
    return kExitOk;
  }
  const std::filesystem::path path(*out);
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  save_instance(path, instance);
  io.err << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& options, Streams io) {
  const Instance instance = LoadValidInstance(options);
  const std::string label = RunLabel(instance, options.instance);
  std::filesystem::path dir = output_root(options.out);
  if (!options.out || options.out->empty()) dir /= label;
  WarnIfDisconnected(instance, io);
  std::string report;
  const int code =
      SimulateInto(instance, label, options, options.seed, dir, report);
  (code == kExitOk ? io.out : io.err) << report << "\n";
  return code;
}

int cmd_sweep(const SimulateOptions& options,
              const std::vector<std::uint64_t>& seeds, std::size_t jobs,
              Streams io) {
  if (seeds.empty()) throw UsageError("sweep needs at least one seed");
  const Instance instance = LoadValidInstance(options);
  const std::string label = RunLabel(instance, options.instance);
  std::filesystem::path root = output_root(options.out);
  if (!options.out || options.out->empty()) root /= label;
  WarnIfDisconnected(instance, io);
  MakeRunOptions(options, 0);  // flag validation before spawning workers

  std::vector<int> codes(seeds.size(), kExitOk);
  std::vector<std::string> reports(seeds.size());
  std::size_t next = 0;
  std::mutex mutex;
  auto worker = [&] {
    while (true) {
      std::size_t k;
      {
        std::lock_guard lock(mutex);
        if (next == seeds.size()) return;
        k = next++;
      }
      const std::filesystem::path dir =
          root / ("seed-" + std::to_string(seeds[k]));
      codes[k] = SimulateInto(instance, label, options, seeds[k], dir,
                              reports[k]);
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, seeds.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = kExitOk;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    (codes[k] == kExitOk ? io.out : io.err) << reports[k] << "\n";
    worst = std::max(worst, codes[k]);
  }
  return worst;
}

double reference_span(const Configuration& config) {
  const auto faults = config.faulty_indices();
  if (faults.size() >= 2) {
    return std::abs(config.position(faults.back()) -
                    config.position(faults.front()));
  }
  double lo = config.position(0);
  double hi = lo;
  for (const Robot& r : config.robots()) {
    lo = std::min(lo, r.position);
    hi = std::max(hi, r.position);
  }
  return hi - lo;
}

std::size_t prediction_step(const Trace& trace) {
  const SizeStableCertificate cert = earliest_size_stable(trace);
  return cert.status == CertificateStatus::kCertified ? cert.earliest
                                                      : trace.steps();
}

LimitPattern prediction_for(const Trace& trace, std::size_t step) {
  const Configuration& config = trace.configurations.at(step);
  LimitPattern pattern;
  if (trace.rule == Rule::kSpreading) {
    const std::size_t m = config.size() - 1;
    const double x0 = config.position(0);
    const double xn = config.position(m);
    ChainLimit chain;
    chain.level = 1;
    chain.left_anchor = config[0].id;
    chain.right_anchor = config[m].id;
    chain.left_limit = x0;
    chain.right_limit = xn;
    chain.spacing = (xn - x0) / static_cast<double>(m);
    chain.provenance = "spreading: equidistant between the endpoints";
    for (std::size_t i = 0; i <= m; ++i) {
      if (i > 0 && i < m) chain.members.push_back(config[i].id);
      pattern.predicted.push_back(
          {config[i].id, x0 + chain.spacing * static_cast<double>(i)});
    }
    pattern.chains.push_back(std::move(chain));
    return pattern;
  }

  const auto faults = config.faulty_indices();
  if (faults.size() == 2) return predict_limit(config, chain_hierarchy(config));
  if (faults.size() > 2) {
    throw ConfigurationError("prediction supports at most two faults, got " +
                             std::to_string(faults.size()));
  }
  double target = 0.0;
  std::string provenance;
  if (faults.size() == 1) {
    target = config.position(faults.front());
    provenance = "single fault: every robot converges to it";
  } else {
    const Configuration& last = trace.last();
    const auto [lo, hi] = std::minmax_element(
        last.robots().begin(), last.robots().end(),
        [](const Robot& a, const Robot& b) { return a.position < b.position; });
    target = (lo->position + hi->position) / 2;
    provenance = "no fault: common gathering point, measured at the final step";
  }
  ChainLimit chain;
  chain.level = 0;
  chain.left_limit = chain.right_limit = target;
  chain.provenance = provenance;
  for (const Robot& r : config.robots()) {
    chain.members.push_back(r.id);
    pattern.predicted.push_back({r.id, target});
  }
  chain.left_anchor = chain.members.front();
  chain.right_anchor = chain.members.back();
  pattern.chains.push_back(std::move(chain));
  return pattern;
}

int cmd_analyze(const std::filesystem::path& path, Streams io) {
  const LoadedRun loaded = load_run(path);
  const Trace& trace = loaded.trace;
  const SizeStableCertificate cert = earliest_size_stable(trace);
  io.out << "steps " << trace.steps() << "\n";
  io.out << "size-stable " << to_string(cert.status);
  if (cert.status == CertificateStatus::kCertified) {
    io.out << " from step " << cert.earliest;
  } else if (cert.violation_time) {
    io.out << " (violation at step " << *cert.violation_time << ")";
  }
  io.out << ": " << cert.reason << "\n";

  const Configuration& last = trace.last();
  if (trace.rule != Rule::kConvergence1D || last.fault_count() != 2) {
    io.out << "hierarchy: not applicable (" << last.fault_count()
           << " faults, rule " << to_string(trace.rule) << ")\n";
    return kExitOk;
  }
  try {
    const Hierarchy hierarchy = chain_hierarchy(last);
    io.out << "hierarchy at step " << trace.steps() << ": max level "
           << hierarchy.max_level() << "\n";
    for (int level = 0; level <= hierarchy.max_level(); ++level) {
      io.out << "  level " << level << ": " << hierarchy.count_at_level(level)
             << " chain(s)\n";
    }
    if (const std::size_t o = hierarchy.count_at_level(kOutsiderLevel)) {
      io.out << "  outsiders: " << o << "\n";
    }
    io.out << format_hierarchy(last, hierarchy);
    std::ofstream(loaded.dir / "hierarchy.json", std::ios::binary)
        << hierarchy_to_json(last, hierarchy);
  } catch (const HierarchyIncomplete& e) {
    io.err << "hierarchy incomplete: " << e.what() << "; unassigned "
           << FormatIds(e.unassigned()) << "\n";
    for (const auto& d : e.diagnostics()) io.err << "  " << d << "\n";
    return kExitVerifyFailed;
  } catch (const ChainBreakError& e) {
    io.err << "chain break: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

int cmd_predict(const std::filesystem::path& input, Streams io) {
  Trace trace;
  std::size_t step = 0;
  if (std::filesystem::is_directory(input) || input.extension() == ".csv") {
    trace = load_run(input).trace;
    step = prediction_step(trace);
  } else {
    const Instance instance = load_instance(input);
    trace.configurations.push_back(instance.config);
  }
  LimitPattern pattern;
  try {
    pattern = prediction_for(trace, step);
  } catch (const HierarchyIncomplete& e) {
    io.err << "hierarchy incomplete: " << e.what() << "; unassigned "
           << FormatIds(e.unassigned()) << "\n";
    for (const auto& d : e.diagnostics()) io.err << "  " << d << "\n";
    return kExitVerifyFailed;
  }
  const Configuration& config = trace.configurations[step];
  io.out << "predicted from step " << step << "\n";
  io.out << "id,position,limit\n";
  for (const auto& [id, limit] : pattern.predicted) {
    io.out << id << ',' << format_double(config.position(*config.index_of(id)))
           << ',' << format_double(limit) << "\n";
  }
  for (std::size_t c = 0; c < pattern.chains.size(); ++c) {
    const ChainLimit& chain = pattern.chains[c];
    io.out << "chain " << c << " level " << chain.level << " spacing "
           << format_double(chain.spacing) << ": " << chain.provenance << "\n";
  }
  return kExitOk;
}

int cmd_verify(const std::filesystem::path& path, double tol, Streams io) {
  if (!(tol > 0)) throw UsageError("--tol must be positive");
  const LoadedRun loaded = load_run(path);
  const Trace& trace = loaded.trace;
  const std::size_t step = prediction_step(trace);
  LimitPattern pattern;
  try {
    pattern = prediction_for(trace, step);
  } catch (const HierarchyIncomplete& e) {
    io.err << "hierarchy incomplete: " << e.what() << "; unassigned "
           << FormatIds(e.unassigned()) << "\n";
    for (const auto& d : e.diagnostics()) io.err << "  " << d << "\n";
    return kExitVerifyFailed;
  }
  const double absolute = tol * reference_span(trace.initial());
  const LimitReport report = verify_limit(trace, pattern, absolute);

  const Configuration& last = trace.last();
  io.out << "predicted from step " << step << ", verified at step "
         << trace.steps() << ", tolerance " << format_double(absolute) << "\n";
  io.out << "id,limit,final,deviation\n";
  for (const auto& [id, limit] : pattern.predicted) {
    const auto i = last.index_of(id);
    io.out << id << ',' << format_double(limit) << ',';
    if (i) {
      io.out << format_double(last.position(*i)) << ','
             << format_double(std::abs(last.position(*i) - limit));
    } else {
      io.out << "missing,";
    }
    io.out << "\n";
  }
  io.out << "max deviation " << format_double(report.max_deviation)
         << ", final displacement " << format_double(report.final_displacement)
         << ": " << (report.passed ? "PASS" : "FAIL") << "\n";
  std::ofstream(loaded.dir / "verify.json", std::ios::binary)
      << verification_to_json(loaded.summary.label, pattern, report);
  return report.passed ? kExitOk : kExitVerifyFailed;
}

int cmd_plot(const std::filesystem::path& path,
             const std::optional<std::string>& out, Streams io) {
  LoadedRun loaded;
  try {
    loaded = load_run(path);
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  std::optional<std::map<RobotId, double>> limits;
  if (std::ifstream in(loaded.dir / "verify.json", std::ios::binary); in) {
    std::ostringstream text;
    text << in.rdbuf();
    limits = read_predicted_limits(text.str());
  }
  const std::filesystem::path target =
      out && !out->empty() ? std::filesystem::path(*out)
                           : loaded.dir / "plot.svg";
  std::ofstream(target, std::ios::binary) << render_svg(loaded.trace, limits);
  io.err << "wrote " << target.string() << "\n";
  return kExitOk;
}

}  // namespace linebots::cli
