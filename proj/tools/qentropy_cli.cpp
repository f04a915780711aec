// qentropy command-line harness: simulate, run, verify, export-figures.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qentropy/errors.hpp"
#include "qentropy/scenario.hpp"

namespace fs = std::filesystem;
using namespace qentropy;

namespace {

std::array<double, 4> parse_probabilities(const std::string& s) {
  std::array<double, 4> a{};
  std::stringstream ss(s);
  std::string cell;
  for (double& x : a) {
    if (!std::getline(ss, cell, ',')) throw DomainError("--rho0 needs four comma-separated probabilities");
    x = std::stod(cell);
  }
  if (std::getline(ss, cell, ',')) throw DomainError("--rho0 needs exactly four probabilities");
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy control of an open two-qubit system"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "free evolution (c = 0) with the closed-form overlay");
  std::string rho0 = "0.25,0.25,0.25,0.25";
  SimulateOptions sopt;
  std::string sim_out;
  std::optional<double> sim_eps;
  sim->add_option("--rho0", rho0, "diagonal of rho0 as p1,p2,p3,p4")->capture_default_str();
  sim->add_option("--T", sopt.horizon, "final time")->capture_default_str();
  sim->add_option("--steps", sopt.steps, "RK4 steps")->capture_default_str();
  sim->add_option("--stride", sopt.stride, "write every stride-th node")->capture_default_str();
  sim->add_option("--epsilon", sim_eps, "coupling strength (default 0.1)");
  sim->add_option("-o,--output", sim_out, "CSV path (default <output root>/simulate/free_evolution.csv; '-' for stdout)");

  auto* run = app.add_subcommand("run", "run a scenario file");
  std::string scenario;
  RunOverrides ov;
  std::string root_opt;
  run->add_option("scenario", scenario, "scenario JSON file")->required();
  run->add_option("--seed", ov.seed, "GA seed");
  run->add_option("--steps", ov.steps, "integration steps");
  run->add_option("--max-iters", ov.max_iters, "iteration budget");
  run->add_option("--trials", ov.trials, "GA trials");
  run->add_option("--subintervals", ov.subintervals, "control grid subintervals M");
  run->add_flag("--parallel", ov.parallel, "run GA trials on separate threads");
  run->add_option("--output-root", root_opt, "overrides QENTROPY_OUTPUT_ROOT");

  auto* ver = app.add_subcommand("verify", "analytic, adjointness and gradient checks");
  VerifyOptions vopt;
  ver->add_flag("-v,--verbose", vopt.verbose, "print the max error of every check");
  ver->add_option("--oracle-omega2", vopt.oracle_omega2, "replace Omega_2 in the closed-form oracle");
  ver->add_option("--seed", vopt.seed, "seed for the randomized checks");

  auto* exp = app.add_subcommand("export-figures", "write per-figure CSV bundles for a run directory");
  std::string run_dir;
  exp->add_option("run-dir", run_dir, "directory written by `run` or `simulate`")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      sopt.a = parse_probabilities(rho0);
      if (sim_eps) sopt.model.epsilon = *sim_eps;
      double err = 0.0;
      if (sim_out == "-") {
        err = simulate_free_evolution(sopt, std::cout);
      } else {
        fs::path out = sim_out.empty() ? output_root() / "simulate" / "free_evolution.csv" : fs::path(sim_out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        std::ofstream f(out);
        if (!f) throw Error("cannot write " + out.string());
        err = simulate_free_evolution(sopt, f);
        std::cerr << "wrote " << out.string() << '\n';
      }
      std::cerr << "max Hilbert-Schmidt error vs closed form: " << err << '\n';
      return 0;
    }
    if (*run) {
      const fs::path root = root_opt.empty() ? output_root() : fs::path(root_opt);
      return run_scenario_file(scenario, ov, root, std::cout, std::cerr);
    }
    if (*ver) return verify(vopt, std::cout);
    if (*exp) {
      const int n = export_figures(run_dir, std::cout);
      std::cout << n << " figure files\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
