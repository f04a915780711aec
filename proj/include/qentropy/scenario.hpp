#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qentropy/optim.hpp"

namespace qentropy {

enum class GuessKind { Zero, Constant, Sinusoid, File };

/// Initial control guess c^(0).
struct InitialGuess {
  GuessKind kind = GuessKind::Zero;
  ControlValue value{};       ///< Constant
  double amplitude = 1.0;     ///< Sinusoid: u(t) = amplitude sin(frequency t), n = 0
  double frequency = 2.0;
  std::string path;           ///< File: controls CSV (t,u,n1,n2) or controls JSON, resampled onto the grid
};

enum class OptimizerKind { None, GPM1, GPM2, GA };

std::string to_string(OptimizerKind kind);

/// One experiment: model, initial state, objective, control class, optimizer and outputs.
struct Scenario {
  std::string name;
  std::string description;
  ModelParameters model = ModelParameters::reference();
  std::optional<std::array<double, 4>> rho0_diagonal;
  Matrix4 rho0 = Matrix4::Identity() * 0.25;
  double horizon = 5.0;
  ObjectiveSpec objective{};  ///< S_ref is derived from rho0
  ControlBounds bounds{};
  InitialGuess initial_guess{};
  OptimizerKind optimizer = OptimizerKind::GPM2;
  GPMConfig gpm{};
  GAConfig ga{};
  std::optional<double> ga_target;  ///< GA success: terminal term <= target with zero penalties
  int M = 1000;
  long steps = 0;                   ///< 0 selects default_steps(M)
  double support_fraction = 1.0;
  bool coherent_only = false;
  std::string output_dir;           ///< relative to the output root; defaults to `name`
  long trajectory_stride = 1;
  std::filesystem::path base_dir;   ///< directory of the scenario file, for relative paths

  long integration_steps() const { return steps > 0 ? steps : default_steps(M); }
};

/// Parses and validates a scenario; ConfigError carries the offending field path.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

/// Canonical form: every field spelled out, fixed key order.
nlohmann::json to_json(const Scenario& s);

/// c^(0) on the scenario grid, projected onto the box.
ControlSet initial_controls(const Scenario& s);

/// Command-line overrides applied on top of a scenario.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::optional<int> max_iters;
  std::optional<int> trials;
  std::optional<int> subintervals;
  bool parallel = false;
};

void apply_overrides(Scenario& s, const RunOverrides& o);

struct RunReport {
  int exit_code = 1;
  nlohmann::json summary;
  std::filesystem::path directory;
};

/// Output root from QENTROPY_OUTPUT_ROOT, else "runs".
std::filesystem::path output_root();

/**
 * Runs a scenario and writes trajectory.csv, controls.csv, history.jsonl,
 * summary.json and scenario.json under `root / output_dir`.
 *
 * Exit code 0 when the stopping criterion (or GA target) is met, 2 when the
 * iteration budget ran out first. Errors propagate as exceptions.
 */
RunReport run_scenario(const Scenario& s, const std::filesystem::path& root, std::ostream& log);

/// Loads, overrides and runs; catches errors, prints them to `err` and returns 1.
int run_scenario_file(const std::filesystem::path& file, const RunOverrides& overrides,
                      const std::filesystem::path& root, std::ostream& log, std::ostream& err);

/// Free evolution (c = 0) from rho0 = diag(a).
struct SimulateOptions {
  ModelParameters model = ModelParameters::reference();
  std::array<double, 4> a{0.25, 0.25, 0.25, 0.25};
  double horizon = 300.0;
  long steps = 30000;
  long stride = 100;
};

/**
 * Columns t,S,x1,x8,x13,x16,S_q1,S_q2,S_q1_plus_S_q2 followed by the closed-form
 * overlay S_exact,x1_exact,x8_exact,x13_exact,x16_exact and hs_error.
 * Returns the largest Hilbert-Schmidt error against the closed form over all nodes.
 */
double simulate_free_evolution(const SimulateOptions& opts, std::ostream& csv);

struct VerifyOptions {
  bool verbose = false;
  std::optional<double> oracle_omega2;  ///< replaces Omega_2 in the closed-form oracle only
  std::uint64_t seed = 20240517;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double error = 0.0;
  double tolerance = 0.0;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts);

/// Prints the pass/fail table; returns 0 iff every check passes.
int verify(const VerifyOptions& opts, std::ostream& os);

/// Reads a run directory and writes figures/*.csv; returns the number of files written.
int export_figures(const std::filesystem::path& run_dir, std::ostream& log);

}  // namespace qentropy
