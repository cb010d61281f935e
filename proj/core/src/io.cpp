#include "linebots/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "linebots/errors.hpp"

namespace linebots {
namespace {

using Json = nlohmann::ordered_json;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << text;
}

Json ParseJson(std::string_view text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T ParseNumber(std::string_view field, std::size_t line) {
  T value{};
  const auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ConfigurationError("line " + std::to_string(line) + ": bad number '" +
                             std::string(field) + "'");
  }
  return value;
}

// Strips a trailing '\r' and skips the header.
bool NextRow(std::istream& in, std::string& line, std::size_t& number) {
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1 || line.empty()) continue;
    return true;
  }
  return false;
}

std::optional<StopReason> ParseStopReason(std::string_view text) {
  for (StopReason r : {StopReason::kConverged, StopReason::kStepBudget,
                       StopReason::kLimitReached}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Instance parse_instance(std::string_view text, double tolerance) {
  const Json doc = ParseJson(text, "instance");
  Instance instance;
  std::vector<double> positions;
  std::vector<std::size_t> faulty;
  double visibility = 0.0;
  try {
    if (!doc.is_object()) throw ConfigurationError("instance must be an object");
    visibility = doc.at("V").get<double>();
    positions = doc.at("positions").get<std::vector<double>>();
    if (doc.contains("faulty")) {
      for (const Json& f : doc["faulty"]) {
        if (!f.is_number_integer() || f.get<long long>() < 0) {
          throw IndexError("faulty index must be a nonnegative integer");
        }
        faulty.push_back(f.get<std::size_t>());
      }
    }
    instance.label = doc.value("label", std::string());
    instance.origin = doc.value("origin", 0.0);
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed instance: ") + e.what());
  }
  for (std::size_t f : faulty) {
    if (f >= positions.size()) {
      throw IndexError("faulty index " + std::to_string(f) +
                       " out of range for " + std::to_string(positions.size()) +
                       " robots");
    }
  }

  double shift = 0.0;
  if (!faulty.empty()) {
    shift = positions[*std::min_element(
        faulty.begin(), faulty.end(),
        [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; })];
  } else if (!positions.empty()) {
    shift = *std::min_element(positions.begin(), positions.end());
  }
  if (std::isfinite(shift) && shift != 0.0) {
    for (double& x : positions) x -= shift;
    instance.origin += shift;
  }
  // Ids follow file order; the configuration itself is position-sorted.
  const Configuration unsorted = Configuration::FromPositions(
      std::move(positions), faulty, visibility, tolerance);
  std::vector<Robot> robots(unsorted.robots().begin(), unsorted.robots().end());
  std::stable_sort(robots.begin(), robots.end(),
                   [](const Robot& a, const Robot& b) {
                     return a.position < b.position;
                   });
  instance.config = Configuration(std::move(robots), visibility, tolerance);
  return instance;
}

std::string serialize_instance(const Instance& instance) {
  Json doc;
  doc["label"] = instance.label;
  doc["V"] = instance.config.visibility();
  doc["origin"] = instance.origin;
  // Written in id order so that a reload assigns the same ids.
  std::vector<Robot> robots(instance.config.robots().begin(),
                            instance.config.robots().end());
  std::sort(robots.begin(), robots.end(),
            [](const Robot& a, const Robot& b) { return a.id < b.id; });
  Json positions = Json::array();
  Json faulty = Json::array();
  for (std::size_t i = 0; i < robots.size(); ++i) {
    positions.push_back(robots[i].position);
    if (robots[i].faulty) faulty.push_back(i);
  }
  doc["positions"] = std::move(positions);
  doc["faulty"] = std::move(faulty);
  return doc.dump(2) + "\n";
}

Instance load_instance(const std::filesystem::path& path, double tolerance) {
  return parse_instance(ReadFile(path), tolerance);
}

void save_instance(const std::filesystem::path& path, const Instance& instance) {
  WriteFile(path, serialize_instance(instance));
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t,robot_id,position,faulty,multiplicity\n";
  for (std::size_t t = 0; t < trace.configurations.size(); ++t) {
    for (const Robot& r : trace.configurations[t].robots()) {
      out << t << ',' << r.id << ',' << format_double(r.position) << ','
          << (r.faulty ? 1 : 0) << ',' << r.multiplicity << '\n';
    }
  }
}

std::vector<Configuration> read_trace_csv(std::istream& in, double visibility,
                                          double tolerance) {
  std::vector<Configuration> configs;
  std::vector<Robot> current;
  std::size_t current_t = 0;
  std::string line;
  std::size_t number = 0;
  auto flush = [&] {
    configs.emplace_back(std::move(current), visibility, tolerance);
    current.clear();
  };
  while (NextRow(in, line, number)) {
    const auto f = SplitCsv(line);
    if (f.size() != 5) {
      throw ConfigurationError("line " + std::to_string(number) +
                               ": expected 5 fields");
    }
    const auto t = ParseNumber<std::size_t>(f[0], number);
    if (!current.empty() && t != current_t) {
      if (t != current_t + 1) {
        throw ConfigurationError("line " + std::to_string(number) +
                                 ": steps out of order");
      }
      flush();
    } else if (current.empty() && t != configs.size()) {
      throw ConfigurationError("line " + std::to_string(number) +
                               ": steps out of order");
    }
    current_t = t;
    Robot r;
    r.id = ParseNumber<RobotId>(f[1], number);
    r.position = ParseNumber<double>(f[2], number);
    r.faulty = ParseNumber<int>(f[3], number) != 0;
    r.multiplicity = ParseNumber<std::uint32_t>(f[4], number);
    current.push_back(r);
  }
  if (!current.empty()) flush();
  return configs;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events) {
  out << "t,kind,subject_a,subject_b\n";
  for (const Event& e : events) {
    out << e.time << ',' << to_string(e.kind) << ',' << e.subject_a << ',';
    if (e.subject_b) out << *e.subject_b;
    out << '\n';
  }
}

std::vector<Event> read_events_csv(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  std::size_t number = 0;
  while (NextRow(in, line, number)) {
    const auto f = SplitCsv(line);
    if (f.size() != 4) {
      throw ConfigurationError("line " + std::to_string(number) +
                               ": expected 4 fields");
    }
    Event e;
    e.time = ParseNumber<std::size_t>(f[0], number);
    const auto kind = parse_event_kind(f[1]);
    if (!kind) {
      throw ConfigurationError("line " + std::to_string(number) +
                               ": unknown event kind");
    }
    e.kind = *kind;
    e.subject_a = ParseNumber<RobotId>(f[2], number);
    if (!f[3].empty()) e.subject_b = ParseNumber<RobotId>(f[3], number);
    events.push_back(e);
  }
  return events;
}

void write_activations_csv(std::ostream& out, const Trace& trace) {
  out << "t,robot_id\n";
  for (std::size_t t = 0; t < trace.activation_log.size(); ++t) {
    for (RobotId id : trace.activation_log[t]) out << t << ',' << id << '\n';
  }
}

std::vector<std::vector<RobotId>> read_activations_csv(std::istream& in,
                                                       std::size_t steps) {
  std::vector<std::vector<RobotId>> log(steps);
  std::string line;
  std::size_t number = 0;
  while (NextRow(in, line, number)) {
    const auto f = SplitCsv(line);
    if (f.size() != 2) {
      throw ConfigurationError("line " + std::to_string(number) +
                               ": expected 2 fields");
    }
    const auto t = ParseNumber<std::size_t>(f[0], number);
    if (t >= log.size()) log.resize(t + 1);
    log[t].push_back(ParseNumber<RobotId>(f[1], number));
  }
  return log;
}

RunSummary summarize(const Trace& trace, std::string label, double origin) {
  RunSummary s;
  s.label = std::move(label);
  s.rule = trace.rule;
  s.scheduler = trace.scheduler;
  s.seed = trace.seed;
  s.visibility = trace.initial().visibility();
  s.tolerance = trace.initial().tolerance();
  s.origin = origin;
  s.steps = trace.steps();
  s.fairness_window = trace.fairness_window;
  s.final_displacement = trace.final_displacement();
  s.stop_reason = trace.stop_reason;
  for (EventKind k : {EventKind::kCrossing, EventKind::kMerging,
                      EventKind::kInclusion, EventKind::kSegmentEntry}) {
    s.event_counts[std::string(to_string(k))] = 0;
  }
  for (const Event& e : trace.events) {
    ++s.event_counts[std::string(to_string(e.kind))];
  }
  return s;
}

std::string serialize_summary(const RunSummary& s) {
  Json doc;
  doc["label"] = s.label;
  doc["rule"] = to_string(s.rule);
  doc["scheduler"] = to_string(s.scheduler);
  doc["seed"] = s.seed;
  doc["V"] = s.visibility;
  doc["tau"] = s.tolerance;
  doc["origin"] = s.origin;
  doc["steps"] = s.steps;
  doc["fairness_window"] = s.fairness_window;
  doc["final_displacement"] = s.final_displacement;
  doc["stop_reason"] = to_string(s.stop_reason);
  Json counts = Json::object();
  for (const auto& [kind, count] : s.event_counts) counts[kind] = count;
  doc["event_counts"] = std::move(counts);
  return doc.dump(2) + "\n";
}

RunSummary parse_summary(std::string_view text) {
  const Json doc = ParseJson(text, "summary");
  RunSummary s;
  try {
    s.label = doc.value("label", std::string());
    const auto rule = parse_rule(doc.at("rule").get<std::string>());
    const auto scheduler =
        parse_scheduler(doc.at("scheduler").get<std::string>());
    const auto reason =
        ParseStopReason(doc.at("stop_reason").get<std::string>());
    if (!rule || !scheduler || !reason) {
      throw ConfigurationError("summary: unknown rule, scheduler or stop reason");
    }
    s.rule = *rule;
    s.scheduler = *scheduler;
    s.stop_reason = *reason;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.visibility = doc.at("V").get<double>();
    s.tolerance = doc.at("tau").get<double>();
    s.origin = doc.value("origin", 0.0);
    s.steps = doc.at("steps").get<std::size_t>();
    s.fairness_window = doc.value("fairness_window", std::size_t{0});
    s.final_displacement = doc.at("final_displacement").get<double>();
    for (const auto& [kind, count] : doc.at("event_counts").items()) {
      s.event_counts[kind] = count.get<std::size_t>();
    }
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed summary: ") + e.what());
  }
  return s;
}

void write_run(const std::filesystem::path& dir, const Trace& trace,
               const RunSummary& summary) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv", std::ios::binary);
    write_trace_csv(out, trace);
  }
  {
    std::ofstream out(dir / "events.csv", std::ios::binary);
    write_events_csv(out, trace.events);
  }
  if (trace.scheduler == Scheduler::kSsynch) {
    std::ofstream out(dir / "activations.csv", std::ios::binary);
    write_activations_csv(out, trace);
  }
  WriteFile(dir / "summary.json", serialize_summary(summary));
}

LoadedRun load_run(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigurationError("no such run: " + path.string());
  }
  LoadedRun run;
  run.dir = std::filesystem::is_directory(path) ? path : path.parent_path();
  if (run.dir.empty()) run.dir = ".";
  run.summary = parse_summary(ReadFile(run.dir / "summary.json"));

  Trace& trace = run.trace;
  trace.rule = run.summary.rule;
  trace.scheduler = run.summary.scheduler;
  trace.seed = run.summary.seed;
  trace.fairness_window = run.summary.fairness_window;
  trace.stop_reason = run.summary.stop_reason;
  {
    std::ifstream in(run.dir / "trace.csv", std::ios::binary);
    if (!in) throw ConfigurationError("cannot open " + (run.dir / "trace.csv").string());
    trace.configurations =
        read_trace_csv(in, run.summary.visibility, run.summary.tolerance);
  }
  if (trace.configurations.empty()) {
    throw ConfigurationError("empty trace in " + run.dir.string());
  }
  if (std::ifstream in(run.dir / "events.csv", std::ios::binary); in) {
    trace.events = read_events_csv(in);
  }
  if (std::ifstream in(run.dir / "activations.csv", std::ios::binary); in) {
    trace.activation_log = read_activations_csv(in, trace.steps());
  }
  for (std::size_t t = 0; t + 1 < trace.configurations.size(); ++t) {
    trace.displacement.push_back(
        max_displacement(trace.configurations[t], trace.configurations[t + 1]));
  }
  return run;
}

std::string hierarchy_to_json(const Configuration& config,
                              const Hierarchy& hierarchy) {
  Json doc;
  Json chains = Json::array();
  for (std::size_t c = 0; c < hierarchy.chains.size(); ++c) {
    const Chain& chain = hierarchy.chains[c];
    Json entry;
    entry["chain"] = c;
    entry["level"] = chain.level;
    Json ids = Json::array();
    Json positions = Json::array();
    for (std::size_t m : chain.members) {
      ids.push_back(config[m].id);
      positions.push_back(config.position(m));
    }
    entry["ids"] = std::move(ids);
    entry["positions"] = std::move(positions);
    entry["anchors"] = {config[chain.left_anchor].id,
                        config[chain.right_anchor].id};
    entry["mutual"] = chain.mutual;
    chains.push_back(std::move(entry));
  }
  doc["max_level"] = hierarchy.max_level();
  doc["chains"] = std::move(chains);
  doc["diagnostics"] = hierarchy.diagnostics;
  return doc.dump(2) + "\n";
}

std::string verification_to_json(const std::string& label,
                                 const LimitPattern& pattern,
                                 const LimitReport& report) {
  Json doc;
  doc["label"] = label;
  doc["passed"] = report.passed;
  doc["steps"] = report.steps;
  doc["tolerance"] = report.tolerance;
  doc["max_deviation"] = report.max_deviation;
  doc["worst_robot"] =
      report.worst_robot ? Json(*report.worst_robot) : Json(nullptr);
  doc["final_displacement"] = report.final_displacement;
  doc["missing"] = report.missing;
  doc["unpredicted"] = report.unpredicted;
  Json chains = Json::array();
  for (std::size_t c = 0; c < pattern.chains.size(); ++c) {
    const ChainLimit& chain = pattern.chains[c];
    Json entry;
    entry["chain"] = c;
    entry["level"] = chain.level;
    entry["members"] = chain.members;
    entry["anchors"] = {chain.left_anchor, chain.right_anchor};
    entry["anchor_limits"] = {chain.left_limit, chain.right_limit};
    entry["spacing"] = chain.spacing;
    entry["spacing_error"] = c < report.chain_spacing_error.size()
                                 ? report.chain_spacing_error[c]
                                 : 0.0;
    entry["provenance"] = chain.provenance;
    chains.push_back(std::move(entry));
  }
  doc["chains"] = std::move(chains);
  Json predicted = Json::array();
  for (const auto& [id, limit] : pattern.predicted) {
    predicted.push_back({{"id", id}, {"limit", limit}});
  }
  doc["predicted"] = std::move(predicted);
  return doc.dump(2) + "\n";
}

std::map<RobotId, double> read_predicted_limits(std::string_view text) {
  const Json doc = ParseJson(text, "verification record");
  std::map<RobotId, double> limits;
  try {
    for (const Json& p : doc.at("predicted")) {
      limits[p.at("id").get<RobotId>()] = p.at("limit").get<double>();
    }
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed verification record: ") +
                             e.what());
  }
  return limits;
}

}  // namespace linebots
