#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qentropy/gradient.hpp"

namespace qentropy {

/// Fixed-step projected gradient settings; beta is the heavy-ball weight (GPM-2).
struct GPMConfig {
  double alpha = 3.0;
  double beta = 0.9;
  int max_iters = 500;
  double eps1 = 1e-6;
  double eps2 = 1e-5;

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double value = 0.0;
  double terminal = 0.0;
  double integral = 0.0;
  double reg = 0.0;
  double residual = 0.0;
  double wall_ms = 0.0;
};

nlohmann::json to_json(const IterationRecord& r);

struct GPMResult {
  ControlSet controls;
  std::vector<IterationRecord> history;
  ObjectiveValue final_value;
  bool converged = false;
  int iterations = 0;  ///< number of control updates performed
  std::string stopped_by;  ///< "criterion" or "max_iters"
};

/// Called after every gradient evaluation with the current iterate.
using IterationCallback = std::function<void(const IterationRecord&, const ControlSet&)>;

/// c_{k+1} = Pr_Q(c_k - alpha grad Phi(c_k)) at the control nodes.
GPMResult gpm1(const ControlProblem& problem, const ControlSet& c0, const GPMConfig& cfg,
               const IterationCallback& on_iteration = {});

/// Heavy-ball variant: adds beta (c_k - c_{k-1}) inside the projection; the first step is GPM-1.
GPMResult gpm2(const ControlProblem& problem, const ControlSet& c0, const GPMConfig& cfg,
               const IterationCallback& on_iteration = {});

struct GAConfig {
  int population = 50;
  int max_iters = 350;
  double mutation_prob = 0.1;
  double crossover_prob = 0.7;
  double elite_fraction = 0.05;
  int tournament_size = 3;
  double mutation_scale = 0.05;  ///< Gaussian sigma as a fraction of the box width
  int trials = 1;
  std::uint64_t seed = 1;
  bool parallel = false;  ///< run trials on separate threads

  void validate() const;
};

struct GATrial {
  Eigen::VectorXd best;
  double value = 0.0;
  std::vector<double> history;  ///< best-so-far after initialization and after each generation
};

struct GAResult {
  Eigen::VectorXd best;
  double value = 0.0;
  std::vector<double> history;  ///< history of the winning trial
  int best_trial = 0;
  std::vector<GATrial> trials;
};

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

/**
 * Real-coded genetic algorithm on the box [lower, upper].
 *
 * Tournament selection, uniform crossover, per-gene Gaussian mutation clipped to
 * the box, and elitism. Runs `cfg.trials` independently seeded trials (seed + trial)
 * and returns the best one.
 */
GAResult ga_minimize(const ScalarObjective& objective, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const GAConfig& cfg);

}  // namespace qentropy
