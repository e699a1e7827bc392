#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cooploc/report.hpp"
#include "cooploc/scenario_json.hpp"
#include "cooploc/scenarios.hpp"

namespace fs = std::filesystem;
using namespace cooploc;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cooploc_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the binary through the shell with a clean output-directory environment.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int call = 0;
  const fs::path dir = fs::temp_directory_path() / "cooploc_cli_tests";
  fs::create_directories(dir);
  const fs::path out_file = dir / ("stdout." + std::to_string(call));
  const fs::path err_file = dir / ("stderr." + std::to_string(call));
  ++call;
  const std::string cmd = "env -u COOPLOC_OUT_DIR " + env_prefix + " " + COOPLOC_BIN + " " + args +
                          " > " + out_file.string() + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  REQUIRE(WIFEXITED(status));
  r.code = WEXITSTATUS(status);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

// Columnar plot file: skips comment lines, requires every token to be numeric.
std::vector<std::vector<double>> read_dat(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    REQUIRE(row.size() == columns);
    rows.push_back(row);
  }
  REQUIRE_FALSE(rows.empty());
  return rows;
}

ScenarioConfig collision_course() {
  ScenarioConfig cfg;
  cfg.name = "collision";
  cfg.duration = 10.0;
  cfg.features.noise = false;
  for (int j = 0; j < 3; ++j) {
    AgentConfig lm;
    lm.id = j + 1;
    lm.kind = AgentKind::Landmark;
    lm.trajectory = StaticTrajectory{Vec3(5.0 * j - 5.0, 20.0, 10.0), 0.0};
    cfg.agents.push_back(lm);
  }
  AgentConfig a;
  a.id = 4;
  a.kind = AgentKind::Vehicle;
  a.trajectory = LinearTrajectory{Vec3(0, 1, 0), Vec3(0, -0.5, 0)};
  a.neighbors = {1, 2, 3};
  cfg.agents.push_back(a);
  AgentConfig b;
  b.id = 5;
  b.kind = AgentKind::Vehicle;
  b.trajectory = LinearTrajectory{Vec3(0, -1, 0), Vec3(0, 0.5, 0)};
  b.neighbors = {1, 2, 3};
  cfg.agents.push_back(b);
  return cfg;
}

}  // namespace

TEST_CASE("shipped scenario files match the built-in definitions") {
  for (const std::string& name : scenario_names()) {
    const fs::path file = fs::path(COOPLOC_SCENARIO_DIR) / (name + ".json");
    INFO(file.string());
    REQUIRE(fs::exists(file));
    const ScenarioConfig from_file = load_scenario_file(file.string());
    const ScenarioConfig built_in = scenario_by_name(name);
    REQUIRE(scenario_to_json(from_file) == scenario_to_json(built_in));
  }
  const ScenarioConfig busy =
      load_scenario_file((fs::path(COOPLOC_SCENARIO_DIR) / "busy_intersection.json").string());
  REQUIRE(count_landmarks(busy) == 3);
  REQUIRE(busy.agents.size() == 8);
  REQUIRE(busy.noise.seed == 1);
}

TEST_CASE("a two-landmark scenario is rejected by name") {
  const fs::path dir = fresh_dir("two-landmarks");
  ScenarioConfig cfg;
  cfg.name = "two_landmarks";
  cfg.duration = 1.0;
  for (int j = 0; j < 2; ++j) {
    AgentConfig lm;
    lm.id = j + 1;
    lm.kind = AgentKind::Landmark;
    lm.trajectory = StaticTrajectory{Vec3(3.0 * j, 10.0, 5.0), 0.0};
    cfg.agents.push_back(lm);
  }
  AgentConfig v;
  v.id = 3;
  v.kind = AgentKind::Vehicle;
  v.trajectory = StaticTrajectory{Vec3(0, 0, 0), 0.0};
  v.neighbors = {1, 2};
  cfg.agents.push_back(v);
  const fs::path file = dir / "two_landmarks.json";
  save_scenario_file(cfg, file.string());

  const CliResult r = run_cli("run --scenario " + file.string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("at least three"));
}

TEST_CASE("non-positive measurement weights are rejected by name") {
  const fs::path dir = fresh_dir("zero-weight");
  ScenarioConfig cfg = busy_intersection();
  cfg.duration = 1.0;
  cfg.default_gains.q = 0.0;
  const fs::path file = dir / "zero_weight.json";
  save_scenario_file(cfg, file.string());

  const CliResult r = run_cli("run --scenario " + file.string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 1);
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("positive"));
}

TEST_CASE("parse errors carry the location of the offending element") {
  const fs::path dir = fresh_dir("parse-errors");

  {
    std::ofstream f(dir / "typo_top.json");
    f << R"({"durationn": 5, "agents": []})" << "\n";
  }
  const CliResult top = run_cli("run --scenario " + (dir / "typo_top.json").string());
  REQUIRE(top.code == 1);
  REQUIRE_THAT(top.err, Catch::Matchers::ContainsSubstring("unknown key 'durationn'"));

  {
    std::ofstream f(dir / "typo_nested.json");
    f << R"({"agents": [{"id": 1, "kind": "landmark",
           "trajectory": {"type": "linear", "start": [0,0,0], "velocty": [1,0,0]}}]})"
      << "\n";
  }
  const CliResult nested = run_cli("run --scenario " + (dir / "typo_nested.json").string());
  REQUIRE(nested.code == 1);
  REQUIRE_THAT(nested.err, Catch::Matchers::ContainsSubstring("/agents/0/trajectory"));
  REQUIRE_THAT(nested.err, Catch::Matchers::ContainsSubstring("unknown key 'velocty'"));

  {
    std::ofstream f(dir / "not_json.json");
    f << "{,\n";
  }
  const CliResult broken = run_cli("run --scenario " + (dir / "not_json.json").string());
  REQUIRE(broken.code == 1);
  REQUIRE_THAT(broken.err, Catch::Matchers::ContainsSubstring("not_json.json"));
}

TEST_CASE("flags round-trip through the effective config echo") {
  const fs::path dir = fresh_dir("roundtrip");
  ScenarioConfig cfg = busy_intersection();
  cfg.features.visibility = true;  // so --no-visibility has something to clear
  const fs::path file = dir / "busy_visibility.json";
  save_scenario_file(cfg, file.string());

  const fs::path out = dir / "out";
  const CliResult r = run_cli("run --scenario " + file.string() +
                              " --seed 7 --dt 0.02 --duration 1 --no-noise --no-visibility"
                              " --comm delayed --out " +
                              out.string());
  INFO(r.err);
  REQUIRE(r.code == 0);
  REQUIRE_THAT(r.out, Catch::Matchers::ContainsSubstring("wrote " + out.string()));

  const ScenarioConfig echo = load_scenario_file((out / "effective_config.json").string());
  REQUIRE(echo.noise.seed == 7);
  REQUIRE(echo.dt == 0.02);
  REQUIRE(echo.duration == 1.0);
  REQUIRE_FALSE(echo.features.noise);
  REQUIRE_FALSE(echo.features.visibility);
  REQUIRE(echo.comm == CommMode::Delayed);
  // Untouched fields carry the file's values through unchanged.
  REQUIRE(echo.error_threshold == cfg.error_threshold);
  REQUIRE(echo.agents.size() == cfg.agents.size());
}

TEST_CASE("every emitted file parses against its schema") {
  const fs::path dir = fresh_dir("schema");
  const fs::path out = dir / "out";
  const CliResult r =
      run_cli("run --scenario busy_intersection --duration 2 --out " + out.string());
  REQUIRE(r.code == 0);

  const StatesFile sf = read_states_csv_file((out / "states.csv").string());
  REQUIRE(sf.scenario == "busy_intersection");
  REQUIRE(sf.rows.size() == 121 * 5);
  REQUIRE(sf.landmarks.size() == 3);

  std::ifstream sin(out / "summary.csv");
  const std::vector<VehicleSummary> rows = read_summary_csv(sin);
  REQUIRE(rows.size() == 5);

  const ScenarioConfig echo = load_scenario_file((out / "effective_config.json").string());
  REQUIRE(validate_config(echo).ok());

  const fs::path plots = dir / "plots";
  const CliResult exp =
      run_cli("export-plotdata " + (out / "states.csv").string() + " " + plots.string());
  REQUIRE(exp.code == 0);
  for (int i = 1; i <= 5; ++i) {
    read_dat(plots / ("f" + std::to_string(i) + "_errors.dat"), 6);
    read_dat(plots / ("f" + std::to_string(i) + "_trajectory.dat"), 7);
  }
  read_dat(plots / "landmarks.dat", 4);
}

TEST_CASE("summary statistics are recomputable from the states file") {
  const fs::path dir = fresh_dir("recompute");
  const fs::path out = dir / "out";
  const CliResult r =
      run_cli("run --scenario busy_intersection --duration 10 --seed 3 --out " + out.string());
  REQUIRE(r.code == 0);

  const StatesFile sf = read_states_csv_file((out / "states.csv").string());
  const RunSummary recomputed = summarize_states(sf);
  std::ifstream sin(out / "summary.csv");
  const std::vector<VehicleSummary> emitted = read_summary_csv(sin);

  REQUIRE(emitted.size() == recomputed.vehicles.size());
  for (std::size_t i = 0; i < emitted.size(); ++i) {
    const VehicleSummary& a = emitted[i];
    const VehicleSummary& b = recomputed.vehicles[i];
    REQUIRE(a.id == b.id);
    REQUIRE(std::abs(a.final_pos_err - b.final_pos_err) <= 1e-9);
    REQUIRE(std::abs(a.final_rot_err - b.final_rot_err) <= 1e-9);
    REQUIRE(std::abs(a.time_to_threshold - b.time_to_threshold) <= 1e-9);
    REQUIRE(std::abs(a.exp_fit_b - b.exp_fit_b) <= 1e-9);
    REQUIRE(std::abs(a.exp_fit_r2 - b.exp_fit_r2) <= 1e-9);
    REQUIRE(std::abs(a.steady_rms_pos - b.steady_rms_pos) <= 1e-9);
    REQUIRE(std::abs(a.steady_rms_rot - b.steady_rms_rot) <= 1e-9);
  }
}

TEST_CASE("repeated runs emit byte-identical artifacts") {
  const fs::path dir = fresh_dir("determinism");
  const CliResult a = run_cli("run --scenario busy_intersection --seed 7 --duration 5 --out " +
                              (dir / "a").string());
  const CliResult b = run_cli("run --scenario busy_intersection --seed 7 --duration 5 --out " +
                              (dir / "b").string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(slurp(dir / "a" / "states.csv") == slurp(dir / "b" / "states.csv"));
  REQUIRE(slurp(dir / "a" / "effective_config.json") == slurp(dir / "b" / "effective_config.json"));
  // The summary preamble records elapsed wall time, the one line that may
  // honestly differ between otherwise identical runs.
  const auto strip_wall = [](const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string kept;
    while (std::getline(in, line)) {
      if (line.rfind("# wall_seconds:", 0) == 0) continue;
      kept += line;
      kept += '\n';
    }
    return kept;
  };
  REQUIRE(strip_wall(slurp(dir / "a" / "summary.csv")) ==
          strip_wall(slurp(dir / "b" / "summary.csv")));
}

TEST_CASE("lists the shipped scenarios") {
  const CliResult r = run_cli("run --list-scenarios");
  REQUIRE(r.code == 0);
  REQUIRE(r.out == "busy_intersection\ncrossing_path\novertaking\n");
}

TEST_CASE("the noise-free intersection run converges for all five vehicles") {
  const fs::path dir = fresh_dir("no-noise");
  const fs::path out = dir / "out";
  const CliResult r =
      run_cli("run --scenario busy_intersection --no-noise --out " + out.string());
  REQUIRE(r.code == 0);

  std::ifstream sin(out / "summary.csv");
  const std::vector<VehicleSummary> rows = read_summary_csv(sin);
  REQUIRE(rows.size() == 5);
  for (const auto& v : rows) {
    REQUIRE(v.final_pos_err < 0.05);
    REQUIRE(v.time_to_threshold >= 0.0);
  }

  // Without noise each error series, once past its transient peak, shrinks
  // essentially monotonically until it reaches the numerical floor.
  const fs::path plots = dir / "plots";
  REQUIRE(run_cli("export-plotdata " + (out / "states.csv").string() + " " + plots.string()).code ==
          0);
  for (int i = 1; i <= 5; ++i) {
    const auto rows_i = read_dat(plots / ("f" + std::to_string(i) + "_errors.dat"), 6);
    std::vector<double> e;
    for (const auto& row : rows_i) e.push_back(row[4]);
    std::size_t peak = 0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e[j] > e[peak]) peak = j;
    }
    for (std::size_t j = peak; j + 1 < e.size(); ++j) {
      if (e[j] <= 1e-9) break;
      REQUIRE(e[j + 1] <= 1.01 * e[j]);
    }
    REQUIRE(e.back() < 1e-8);
  }
}

TEST_CASE("plot export writes one file per vehicle plus the landmarks") {
  const fs::path dir = fresh_dir("plotdata");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("run --scenario busy_intersection --duration 1 --out " + out.string()).code == 0);
  const fs::path plots = dir / "plots";
  REQUIRE(run_cli("export-plotdata " + (out / "states.csv").string() + " " + plots.string()).code ==
          0);

  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(plots)) {
    ++files;
    (void)entry;
  }
  REQUIRE(files == 11);  // five error series, five trajectories, one landmark table

  const auto f5 = read_dat(plots / "f5_trajectory.dat", 7);
  REQUIRE(f5.front()[0] == 0.0);
  REQUIRE(f5.front()[1] == -30.0);
  REQUIRE(f5.front()[2] == 2.0);
  REQUIRE(f5.front()[3] == 3.0);

  const auto lms = read_dat(plots / "landmarks.dat", 4);
  REQUIRE(lms.size() == 3);
  REQUIRE(lms[0][1] == -4.0);
  REQUIRE(lms[0][2] == 5.0);
  REQUIRE(lms[0][3] == 3.0);
}

TEST_CASE("aborted runs report the failing step and exit distinctly") {
  const fs::path dir = fresh_dir("abort");
  const fs::path file = dir / "collision.json";
  save_scenario_file(collision_course(), file.string());
  const CliResult r = run_cli("run --scenario " + file.string() + " --out " + (dir / "out").string());
  REQUIRE(r.code == 2);
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("error at step"));
  REQUIRE_THAT(r.err, Catch::Matchers::ContainsSubstring("agents closer than 0.1 m apart"));
}

TEST_CASE("usage errors exit with code one and a hint") {
  const CliResult missing = run_cli("run");
  REQUIRE(missing.code == 1);
  REQUIRE_THAT(missing.err, Catch::Matchers::ContainsSubstring("--scenario"));

  const CliResult unknown = run_cli("run --scenario no_such_scenario");
  REQUIRE(unknown.code == 1);
  REQUIRE_THAT(unknown.err, Catch::Matchers::ContainsSubstring("busy_intersection"));

  const CliResult no_file = run_cli("export-plotdata /nonexistent/states.csv /tmp/nowhere");
  REQUIRE(no_file.code == 1);
  REQUIRE_THAT(no_file.err, Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("an environment variable can supply the default output location") {
  const fs::path dir = fresh_dir("envvar");
  const CliResult r = run_cli("run --scenario busy_intersection --duration 0.5",
                              "COOPLOC_OUT_DIR=" + dir.string());
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(dir / "busy_intersection" / "states.csv"));
  REQUIRE(fs::exists(dir / "busy_intersection" / "summary.csv"));
  REQUIRE(fs::exists(dir / "busy_intersection" / "effective_config.json"));
}
