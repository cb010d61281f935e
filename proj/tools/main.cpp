#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "linebots/errors.hpp"

namespace {

using namespace linebots;
using namespace linebots::cli;

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  // "a-b" or "a,b,c"
  std::vector<std::uint64_t> seeds;
  if (const auto dash = text.find('-'); dash != std::string::npos) {
    const auto first = std::stoull(text.substr(0, dash));
    const auto last = std::stoull(text.substr(dash + 1));
    if (last < first) throw UsageError("empty seed range " + text);
    for (auto s = first; s <= last; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) seeds.push_back(std::stoull(item));
  return seeds;
}

void AddRunFlags(CLI::App* cmd, SimulateOptions& o) {
  cmd->add_option("--instance", o.instance, "Instance JSON file")->required();
  cmd->add_option_function<std::string>(
         "--rule", [&o](const std::string& v) { o.rule = *parse_rule(v); },
         "convergence1d | spreading")
      ->check(CLI::IsMember({"convergence1d", "spreading"}));
  cmd->add_option_function<std::string>(
         "--scheduler",
         [&o](const std::string& v) { o.scheduler = *parse_scheduler(v); },
         "fsynch | ssynch")
      ->check(CLI::IsMember({"fsynch", "ssynch"}));
  cmd->add_option("--seed", o.seed, "Scheduler seed (64-bit)");
  cmd->add_option("--max-steps", o.max_steps, "Step budget");
  cmd->add_option("--stop-displacement", o.stop_displacement,
                  "Stop once the max displacement stays below this");
  cmd->add_option("--fairness-window", o.fairness_window,
                  "SSYNCH fairness window (0 = 3n)");
  cmd->add_option("--tau", o.tau, "Co-location tolerance");
  cmd->add_option("--out", o.out, "Run directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyse robots on a line with crash faults"};
  app.require_subcommand(1);

  GenOptions gen;
  std::optional<std::string> gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random connected instance");
  gen_cmd->add_option("-n,--robots", gen.n, "Number of robots")->required();
  gen_cmd->add_option("--faults", gen.faults,
                      "two-extremal | single | none | i,j,...");
  gen_cmd->add_option("-V,--visibility", gen.visibility, "Visibility radius");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--label", gen.label, "Instance label");
  gen_cmd->add_option("--out", gen_out, "Output file (stdout if omitted)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run one simulation");
  AddRunFlags(sim_cmd, sim);

  SimulateOptions sweep;
  std::string seeds = "0-9";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a batch of seeds in parallel");
  AddRunFlags(sweep_cmd, sweep);
  sweep_cmd->add_option("--seeds", seeds, "Range a-b or list a,b,c");
  sweep_cmd->add_option("-j,--jobs", jobs, "Worker threads");

  std::string trace_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "Size-stable certificate and chain hierarchy");
  analyze_cmd->add_option("trace", trace_path, "Run directory or trace.csv")->required();

  std::string predict_input;
  auto* predict_cmd = app.add_subcommand("predict", "Predicted limit pattern");
  predict_cmd->add_option("input", predict_input, "Instance file, run directory or trace.csv")
      ->required();
  predict_cmd->add_option("--instance", predict_input, "Instance file");

  double tol = 1e-6;
  auto* verify_cmd = app.add_subcommand("verify", "Check the final step against the prediction");
  verify_cmd->add_option("trace", trace_path, "Run directory or trace.csv")->required();
  verify_cmd->add_option("--tol", tol, "Tolerance relative to the fault span");

  std::optional<std::string> plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render the trace as SVG");
  plot_cmd->add_option("trace", trace_path, "Run directory or trace.csv")->required();
  plot_cmd->add_option("--out", plot_out, "SVG file (default: <run>/plot.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Streams io{std::cout, std::cerr};
  try {
    if (*gen_cmd) return cmd_gen(gen, gen_out, io);
    if (*sim_cmd) return cmd_simulate(sim, io);
    if (*sweep_cmd) return cmd_sweep(sweep, ParseSeeds(seeds), jobs, io);
    if (*analyze_cmd) return cmd_analyze(trace_path, io);
    if (*predict_cmd) return cmd_predict(predict_input, io);
    if (*verify_cmd) return cmd_verify(trace_path, tol, io);
    if (*plot_cmd) return cmd_plot(trace_path, plot_out, io);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated at step " << e.step() << ": " << e.what()
              << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
