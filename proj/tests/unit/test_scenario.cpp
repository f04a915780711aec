#include <doctest.h>

#include <fstream>
#include <sstream>

#include "qentropy/errors.hpp"
#include "qentropy/scenario.hpp"

using namespace qentropy;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(QENTROPY_SOURCE_DIR) / "scenarios";

nlohmann::json minimal() {
  return nlohmann::json::parse(R"({
    "name": "mini",
    "rho0": {"diagonal": [0.0, 0.5, 0.0, 0.5]},
    "horizon": 2.0,
    "objective": {"kind": "J3", "S_tar": 0.4},
    "optimizer": {"method": "gpm2", "max_iters": 2},
    "grid": {"M": 4, "steps": 200}
  })");
}

std::string config_field(const nlohmann::json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qentropy_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("bundled scenarios parse and round-trip") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    const Scenario s = load_scenario(entry.path());
    const nlohmann::json canon = to_json(s);
    CHECK(to_json(parse_scenario(canon, s.base_dir)) == canon);
    CHECK(s.objective.S_ref == doctest::Approx(von_neumann_entropy(s.rho0)));
    CHECK_NOTHROW(initial_controls(s));
    ++count;
  }
  CHECK(count == 8);
}

TEST_CASE("scenario defaults") {
  const Scenario s = parse_scenario(minimal());
  CHECK(s.name == "mini");
  CHECK(s.optimizer == OptimizerKind::GPM2);
  CHECK(s.gpm.alpha == 3.0);
  CHECK(s.gpm.beta == 0.9);
  CHECK(s.integration_steps() == 200);
  CHECK(s.bounds.u_max == 30.0);
  CHECK(s.objective.S_ref == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(initial_controls(s).stacked().isZero(0.0));
}

TEST_CASE("invalid scenarios name the offending field") {
  nlohmann::json j = minimal();
  j["objective"]["kind"] = "J2";
  CHECK(config_field(j) == "optimizer.method");

  j = minimal();
  j["optimizer"] = {{"method", "ga"}};
  CHECK(config_field(j) == "optimizer.method");

  j = minimal();
  j["objective"]["S_tar"] = std::log(2.0);
  CHECK(config_field(j).rfind("objective", 0) == 0);

  j = minimal();
  j["grid"]["M"] = 0;
  CHECK(config_field(j).rfind("grid", 0) == 0);

  j = minimal();
  j["bounds"] = {{"u_max", -1.0}};
  CHECK(config_field(j).rfind("bounds", 0) == 0);

  j = minimal();
  j["rho0"] = {{"diagonal", {0.5, 0.5, 0.5, 0.5}}};
  CHECK(config_field(j).rfind("rho0", 0) == 0);

  j = minimal();
  j["colour"] = "blue";
  CHECK(config_field(j) == "colour");

  j = minimal();
  j["grid"]["support_fraction"] = 0.5;
  CHECK(config_field(j) == "grid");
}

TEST_CASE("initial guesses") {
  nlohmann::json j = minimal();
  j["initial_guess"] = {{"type", "sinusoid"}, {"amplitude", 2.0}, {"frequency", 3.0}};
  const ControlSet sin = initial_controls(parse_scenario(j));
  for (Eigen::Index s = 0; s < sin.nodes(); ++s)
    CHECK(sin.u()[s] == doctest::Approx(2.0 * std::sin(3.0 * sin.node_time(s))).epsilon(1e-14));
  CHECK(sin.n1().isZero(0.0));

  j["initial_guess"] = {{"type", "constant"}, {"value", {50.0, -1.0, 0.5}}};
  const ControlSet c = initial_controls(parse_scenario(j));
  CHECK(c.u()[0] == 30.0);
  CHECK(c.n1()[2] == 0.0);
  CHECK(c.n2()[4] == 0.5);

  const fs::path dir = scratch("guess");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "guess.csv");
    f << "t,u,n1,n2\n0,0,1,0\n2,2,1,4\n";
  }
  j["initial_guess"] = {{"type", "file"}, {"path", "guess.csv"}};
  const ControlSet file = initial_controls(parse_scenario(j, dir));
  CHECK(file.u()[2] == doctest::Approx(1.0));
  CHECK(file.n2()[1] == doctest::Approx(1.0));
  CHECK(file.n1()[3] == doctest::Approx(1.0));
}

TEST_CASE("overrides") {
  Scenario s = parse_scenario(minimal());
  RunOverrides o;
  o.steps = 400;
  o.max_iters = 7;
  o.subintervals = 8;
  apply_overrides(s, o);
  CHECK(s.integration_steps() == 400);
  CHECK(s.gpm.max_iters == 7);
  CHECK(s.M == 8);
}

TEST_CASE("running a small scenario writes the run directory") {
  const fs::path root = scratch("run");
  std::ostringstream log;
  const RunReport r = run_scenario(parse_scenario(minimal()), root, log);
  CHECK(r.directory == root / "mini");
  for (const char* f : {"trajectory.csv", "controls.csv", "history.jsonl", "summary.json", "scenario.json", "gradient.csv"})
    CHECK(fs::exists(r.directory / f));
  CHECK(r.summary.at("iterations").get<int>() <= 2);
  CHECK(r.exit_code == (r.summary.at("converged").get<bool>() ? 0 : 2));

  std::ifstream hist(r.directory / "history.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(hist, line)) {
    CHECK(nlohmann::json::parse(line).at("k").get<int>() == lines);
    ++lines;
  }
  CHECK(lines == r.summary.at("iterations").get<int>() + 1);

  std::ostringstream figs;
  CHECK(export_figures(r.directory, figs) >= 5);
  CHECK(fs::exists(r.directory / "figures" / "convergence.csv"));
  fs::remove_all(root);
}

TEST_CASE("invalid scenario files return exit code 1") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  nlohmann::json j = minimal();
  j["objective"]["kind"] = "J2";
  {
    std::ofstream f(dir / "bad.json");
    f << j.dump();
  }
  std::ostringstream log, err;
  CHECK(run_scenario_file(dir / "bad.json", {}, dir, log, err) == 1);
  CHECK(err.str().find("optimizer.method") != std::string::npos);
  CHECK(run_scenario_file(dir / "missing.json", {}, dir, log, err) == 1);
  fs::remove_all(dir);
}

TEST_CASE("free evolution is grid independent") {
  SimulateOptions a;
  a.horizon = 100.0;
  a.steps = 10000;
  a.stride = 100;
  SimulateOptions b = a;
  b.steps = 20000;
  b.stride = 200;
  std::ostringstream ca, cb;
  const double ea = simulate_free_evolution(a, ca);
  const double eb = simulate_free_evolution(b, cb);
  CHECK(ea < 1e-6);
  CHECK(eb < 1e-6);

  auto column = [](const std::string& csv, int col) {
    std::istringstream in(csv);
    std::string line, cell;
    std::getline(in, line);
    std::vector<double> out;
    while (std::getline(in, line)) {
      std::istringstream row(line);
      for (int i = 0; i <= col; ++i) std::getline(row, cell, ',');
      out.push_back(std::stod(cell));
    }
    return out;
  };
  const std::vector<double> sa = column(ca.str(), 1), sb = column(cb.str(), 1);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(std::abs(sa[i] - sb[i]) < 1e-7);
  CHECK(ca.str().rfind("t,S,x1,x8,x13,x16,S_q1,S_q2,S_q1_plus_S_q2,S_exact,", 0) == 0);
}
