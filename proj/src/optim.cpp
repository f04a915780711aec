#include "qentropy/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "qentropy/errors.hpp"

namespace qentropy {

void GPMConfig::validate() const {
  if (!(alpha > 0.0)) throw DomainError("GPM alpha must be positive");
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("GPM beta must lie in [0, 1)");
  if (max_iters < 0) throw DomainError("GPM max_iters must be nonnegative");
}

nlohmann::json to_json(const IterationRecord& r) {
  return {{"k", r.k},           {"value", r.value},       {"terminal", r.terminal}, {"integral", r.integral},
          {"reg", r.reg},       {"residual", r.residual}, {"wall_ms", r.wall_ms}};
}

namespace {

GPMResult projected_gradient(const ControlProblem& problem, const ControlSet& c0, double alpha, double beta,
                             const GPMConfig& cfg, const IterationCallback& on_iteration) {
  const ObjectiveSpec& spec = problem.objective;
  using clock = std::chrono::steady_clock;

  ControlSet current = project_box(c0);
  ControlSet previous = current;
  GPMResult result;
  for (int k = 0;; ++k) {
    if (!current.admissible()) throw Error("GPM iterate left the admissible box at iteration " + std::to_string(k));
    const auto start = clock::now();
    const GradientResult g = assemble_gradient(problem, current);
    if (!std::isfinite(g.value.value))
      throw Error("GPM objective became non-finite at iteration " + std::to_string(k));

    IterationRecord rec;
    rec.k = k;
    rec.value = g.value.value;
    rec.terminal = g.value.terminal;
    rec.integral = g.value.integral;
    rec.reg = g.value.reg;
    rec.residual = pmp_residual(current, g.field, alpha);
    result.final_value = g.value;

    const bool done = stopping_check(spec.kind, g.value, spec, cfg.eps1, cfg.eps2);
    if (done || k >= cfg.max_iters) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
      result.history.push_back(rec);
      if (on_iteration) on_iteration(rec, current);
      result.converged = done;
      result.iterations = k;
      result.stopped_by = done ? "criterion" : "max_iters";
      break;
    }

    Eigen::VectorXd step = -alpha * g.field.stacked();
    if (k > 0) step += beta * (current.stacked() - previous.stacked());
    Eigen::VectorXd next = current.stacked() + step;
    ControlSet raw = current;
    raw.set_stacked(next);
    previous = current;
    current = project_box(raw);

    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec, previous);
  }
  result.controls = current;
  return result;
}

}  // namespace

GPMResult gpm1(const ControlProblem& problem, const ControlSet& c0, const GPMConfig& cfg,
               const IterationCallback& on_iteration) {
  cfg.validate();
  return projected_gradient(problem, c0, cfg.alpha, 0.0, cfg, on_iteration);
}

GPMResult gpm2(const ControlProblem& problem, const ControlSet& c0, const GPMConfig& cfg,
               const IterationCallback& on_iteration) {
  cfg.validate();
  return projected_gradient(problem, c0, cfg.alpha, cfg.beta, cfg, on_iteration);
}

void GAConfig::validate() const {
  if (population < 4) throw DomainError("GA population must be at least 4");
  if (max_iters < 0) throw DomainError("GA max_iters must be nonnegative");
  if (!(mutation_prob > 0.0 && mutation_prob < 1.0)) throw DomainError("GA mutation_prob must lie in (0, 1)");
  if (!(crossover_prob > 0.0 && crossover_prob < 1.0)) throw DomainError("GA crossover_prob must lie in (0, 1)");
  if (!(elite_fraction >= 0.0 && elite_fraction < 1.0)) throw DomainError("GA elite_fraction must lie in [0, 1)");
  if (tournament_size < 1) throw DomainError("GA tournament_size must be positive");
  if (!(mutation_scale > 0.0)) throw DomainError("GA mutation_scale must be positive");
  if (trials < 1) throw DomainError("GA trials must be positive");
}

namespace {

GATrial run_trial(const ScalarObjective& objective, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                  const GAConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index dim = lower.size();
  const Eigen::VectorXd width = upper - lower;
  const int pop = cfg.population;
  const int elites = std::max(1, static_cast<int>(std::ceil(cfg.elite_fraction * pop)));

  std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(pop));
  std::vector<double> fitness(static_cast<std::size_t>(pop));
  for (int i = 0; i < pop; ++i) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index d = 0; d < dim; ++d) x[d] = lower[d] + unit(rng) * width[d];
    members[i] = x;
    fitness[i] = objective(x);
  }

  GATrial trial;
  auto best_index = [&] { return static_cast<int>(std::min_element(fitness.begin(), fitness.end()) - fitness.begin()); };
  int b = best_index();
  trial.best = members[b];
  trial.value = fitness[b];
  trial.history.push_back(trial.value);

  std::uniform_int_distribution<int> pick(0, pop - 1);
  auto tournament = [&]() -> const Eigen::VectorXd& {
    int winner = pick(rng);
    for (int t = 1; t < cfg.tournament_size; ++t) {
      const int challenger = pick(rng);
      if (fitness[challenger] < fitness[winner]) winner = challenger;
    }
    return members[winner];
  };

  std::vector<int> order(static_cast<std::size_t>(pop));
  for (int gen = 0; gen < cfg.max_iters; ++gen) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return fitness[a] < fitness[c]; });

    std::vector<Eigen::VectorXd> next;
    std::vector<double> next_fitness;
    next.reserve(members.size());
    for (int e = 0; e < elites; ++e) {
      next.push_back(members[order[e]]);
      next_fitness.push_back(fitness[order[e]]);
    }
    while (static_cast<int>(next.size()) < pop) {
      const Eigen::VectorXd& p1 = tournament();
      const Eigen::VectorXd& p2 = tournament();
      Eigen::VectorXd child = p1;
      if (unit(rng) < cfg.crossover_prob)
        for (Eigen::Index d = 0; d < dim; ++d)
          if (unit(rng) < 0.5) child[d] = p2[d];
      for (Eigen::Index d = 0; d < dim; ++d)
        if (unit(rng) < cfg.mutation_prob)
          child[d] = std::clamp(child[d] + cfg.mutation_scale * width[d] * normal(rng), lower[d], upper[d]);
      next_fitness.push_back(objective(child));
      next.push_back(std::move(child));
    }
    members = std::move(next);
    fitness = std::move(next_fitness);

    b = best_index();
    if (fitness[b] < trial.value) {
      trial.value = fitness[b];
      trial.best = members[b];
    }
    trial.history.push_back(trial.value);
  }
  return trial;
}

}  // namespace

GAResult ga_minimize(const ScalarObjective& objective, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const GAConfig& cfg) {
  cfg.validate();
  if (lower.size() != upper.size() || lower.size() == 0) throw DomainError("GA bounds must be nonempty and match");
  if (!lower.allFinite() || !upper.allFinite() || (upper.array() < lower.array()).any())
    throw DomainError("GA bounds must be finite with lower <= upper");

  GAResult result;
  result.trials.resize(static_cast<std::size_t>(cfg.trials));
  if (cfg.parallel && cfg.trials > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.trials));
    for (int t = 0; t < cfg.trials; ++t)
      workers.emplace_back([&, t] {
        try {
          result.trials[t] = run_trial(objective, lower, upper, cfg, cfg.seed + static_cast<std::uint64_t>(t));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (int t = 0; t < cfg.trials; ++t)
      result.trials[t] = run_trial(objective, lower, upper, cfg, cfg.seed + static_cast<std::uint64_t>(t));
  }

  for (int t = 0; t < cfg.trials; ++t)
    if (t == 0 || result.trials[t].value < result.value) {
      result.value = result.trials[t].value;
      result.best_trial = t;
    }
  result.best = result.trials[result.best_trial].best;
  result.history = result.trials[result.best_trial].history;
  return result;
}

}  // namespace qentropy
