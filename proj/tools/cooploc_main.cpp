// Command-line front end: runs a scenario to CSV artifacts and exports
// plot-ready columnar data from a states file.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "cooploc/report.hpp"
#include "cooploc/scenario_json.hpp"
#include "cooploc/scenarios.hpp"
#include "cooploc/simcore.hpp"

namespace fs = std::filesystem;

namespace {

cooploc::ScenarioConfig resolve_scenario(const std::string& arg) {
  const auto names = cooploc::scenario_names();
  if (std::find(names.begin(), names.end(), arg) != names.end()) {
    return cooploc::scenario_by_name(arg);
  }
  if (fs::exists(arg)) {
    return cooploc::load_scenario_file(arg);
  }
  std::string msg = "no scenario named '" + arg + "' and no such file; shipped scenarios:";
  for (const auto& n : names) msg += " " + n;
  throw std::runtime_error(msg);
}

void print_summary_table(const cooploc::RunSummary& s) {
  std::printf("scenario %s  seed %llu  steps %d  wall %.3f s\n", s.scenario.c_str(),
              static_cast<unsigned long long>(s.seed), s.steps, s.wall_seconds);
  std::printf("%8s %14s %14s %12s %10s %8s %14s %14s\n", "vehicle", "final_pos_err",
              "final_rot_err", "t_threshold", "fit_b", "fit_r2", "steady_rms_pos",
              "steady_rms_rot");
  for (const auto& v : s.vehicles) {
    std::printf("%8d %14.6g %14.6g %12.4g %10.4g %8.4f %14.6g %14.6g\n", v.id, v.final_pos_err,
                v.final_rot_err, v.time_to_threshold, v.exp_fit_b, v.exp_fit_r2, v.steady_rms_pos,
                v.steady_rms_rot);
  }
}

int run_command(const std::string& scenario_arg, bool has_seed, std::uint64_t seed, bool has_dt,
                double dt, bool has_duration, double duration, bool no_noise, bool no_visibility,
                const std::string& comm, const std::string& out_arg) {
  cooploc::ScenarioConfig cfg = resolve_scenario(scenario_arg);
  if (has_seed) cfg.noise.seed = seed;
  if (has_dt) cfg.dt = dt;
  if (has_duration) cfg.duration = duration;
  if (no_noise) cfg.features.noise = false;
  if (no_visibility) cfg.features.visibility = false;
  if (!comm.empty()) {
    cfg.comm = (comm == "delayed") ? cooploc::CommMode::Delayed : cooploc::CommMode::Topological;
  }

  fs::path out_dir;
  if (!out_arg.empty()) {
    out_dir = out_arg;
  } else if (const char* env = std::getenv("COOPLOC_OUT_DIR"); env != nullptr && *env != '\0') {
    out_dir = fs::path(env) / cfg.name;
  } else {
    out_dir = fs::path("out") / cfg.name;
  }
  fs::create_directories(out_dir);

  const cooploc::RunResult result = cooploc::run_scenario(cfg);

  const fs::path states_path = out_dir / "states.csv";
  cooploc::write_states_csv(result, states_path.string());

  // The summary is computed from the emitted CSV, not from in-memory state,
  // so everything in summary.csv is reproducible from states.csv.
  const cooploc::StatesFile sf = cooploc::read_states_csv_file(states_path.string());
  const cooploc::RunSummary summary = cooploc::summarize_states(sf, result.wall_seconds);
  cooploc::write_summary_csv(summary, (out_dir / "summary.csv").string());

  std::ofstream echo(out_dir / "effective_config.json");
  if (!echo) throw std::runtime_error("cannot write " + (out_dir / "effective_config.json").string());
  echo << cooploc::scenario_to_json(cfg).dump(2) << "\n";
  echo.close();

  print_summary_table(summary);
  std::printf("wrote %s\n", out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized cooperative localization simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "simulate a scenario and write CSV artifacts");
  std::string scenario_arg;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double duration = 0.0;
  bool no_noise = false;
  bool no_visibility = false;
  bool list_scenarios = false;
  std::string comm;
  std::string out_arg;
  run->add_option("--scenario", scenario_arg, "shipped scenario name or path to a scenario JSON file");
  run->add_option("--seed", seed, "override the noise seed");
  run->add_option("--dt", dt, "override the integration step (s)")->check(CLI::PositiveNumber);
  run->add_option("--duration", duration, "override the run length (s)")->check(CLI::PositiveNumber);
  run->add_flag("--no-noise", no_noise, "disable measurement and velocity noise");
  run->add_flag("--no-visibility", no_visibility, "disable field-of-view and range gating");
  run->add_option("--comm", comm, "estimate exchange mode")
      ->check(CLI::IsMember({"topological", "delayed"}));
  run->add_option("--out", out_arg, "output directory (default: out/<scenario>, or $COOPLOC_OUT_DIR/<scenario>)");
  run->add_flag("--list-scenarios", list_scenarios, "list shipped scenario names and exit");

  auto* exp = app.add_subcommand("export-plotdata", "write per-vehicle plot files from a states CSV");
  std::string states_arg;
  std::string plot_dir;
  exp->add_option("states_csv", states_arg, "path to a states.csv")->required();
  exp->add_option("out_dir", plot_dir, "directory for the .dat files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (list_scenarios) {
        for (const auto& n : cooploc::scenario_names()) std::printf("%s\n", n.c_str());
        return 0;
      }
      if (scenario_arg.empty()) {
        std::fprintf(stderr, "error: run needs --scenario (or --list-scenarios)\n");
        return 1;
      }
      return run_command(scenario_arg, run->count("--seed") > 0, seed, run->count("--dt") > 0, dt,
                         run->count("--duration") > 0, duration, no_noise, no_visibility, comm,
                         out_arg);
    }
    if (exp->parsed()) {
      const cooploc::StatesFile sf = cooploc::read_states_csv_file(states_arg);
      cooploc::export_plotdata(sf, plot_dir);
      std::printf("wrote plot data to %s\n", plot_dir.c_str());
      return 0;
    }
  } catch (const cooploc::SimulationError& e) {
    std::fprintf(stderr, "error at step %d (t=%.6f): %s\n", e.step(), e.time(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
