#include "qentropy/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qentropy/errors.hpp"

namespace qentropy {

namespace {

void require_unified(ObjectiveKind kind) {
  if (kind != ObjectiveKind::J1 && kind != ObjectiveKind::J3 && kind != ObjectiveKind::J4)
    throw DomainError("gradient available for J1, J3, J4 only (got " + to_string(kind) + ")");
}

/// Returns the prefactor a such that dF/drho (or dg/drho) = a * dS/drho.
double terminal_slope(ObjectiveKind kind, double S, const ObjectiveSpec& spec) {
  switch (kind) {
    case ObjectiveKind::J1: return 2.0 * (S - spec.S_ref);
    default: return 2.0 * (S - spec.S_tar);
  }
}

double running_slope(ObjectiveKind kind, double S, const ObjectiveSpec& spec) {
  switch (kind) {
    case ObjectiveKind::J1: return 2.0 * (S - spec.S_ref);
    case ObjectiveKind::J4: return 2.0 * std::max(S - spec.S_bar, 0.0);
    default: return 0.0;
  }
}

}  // namespace

Eigen::VectorXd GradientField::stacked() const {
  Eigen::VectorXd v(u.size() * 3);
  v << u, n1, n2;
  return v;
}

Matrix4 transversality(ObjectiveKind kind, const Matrix4& rhoT, const ObjectiveSpec& spec) {
  require_unified(kind);
  const auto [S, dS] = entropy_with_derivative(rhoT);
  const double slope = terminal_slope(kind, S, spec);
  if (slope == 0.0) return Matrix4::Zero();
  return -slope * dS;
}

Matrix4 penalty_source(ObjectiveKind kind, const Matrix4& rho, const ObjectiveSpec& spec) {
  require_unified(kind);
  if (kind == ObjectiveKind::J3) return Matrix4::Zero();
  const auto [S, dS] = entropy_with_derivative(rho);
  const double slope = running_slope(kind, S, spec);
  if (slope == 0.0) return Matrix4::Zero();
  return slope * dS;
}

ObjectiveValue evaluate_objective(const ControlProblem& problem, const ControlSet& c) {
  const Trajectory fwd = solve_forward(problem.model, problem.rho0, c, problem.steps_for(c));
  return eval_unified(fwd, problem.objective, &c);
}

GradientResult assemble_gradient(const ControlProblem& problem, const ControlSet& c) {
  const ObjectiveSpec& spec = problem.objective;
  require_unified(spec.kind);
  const long steps = problem.steps_for(c);
  Trajectory fwd = solve_forward(problem.model, problem.rho0, c, steps);
  const ObjectiveValue value = eval_unified(fwd, spec, &c);

  const Matrix4 chiT = transversality(spec.kind, fwd.terminal(), spec);
  CoStateSource source;
  if (spec.kind != ObjectiveKind::J3) {
    // Co-state equation: d chi/dt = -L^dagger chi + P dg/drho.
    source = [&spec](double, const Matrix4& rho) -> Matrix4 {
      return spec.P * penalty_source(spec.kind, rho, spec);
    };
  }
  Trajectory chi = solve_backward(problem.model, chiT, c, fwd, source);

  GradientField field;
  field.T = c.horizon();
  field.steps = steps;
  field.dense.resize(steps + 1, 3);
  const bool integral_reg = spec.reg.mode == RegularizationMode::Integral;
  for (long k = 0; k <= steps; ++k) {
    const SwitchingValues K =
        problem.model.switching_functions_vec(vectorize(chi.state(k)), vectorize(fwd.state(k)));
    double gu = -K.ku, gn1 = -K.kn1, gn2 = -K.kn2;
    if (integral_reg) {
      gu += 2.0 * spec.reg.gamma_u * c.evaluate(fwd.time(k)).u;
      gn1 += spec.reg.gamma_n;
      gn2 += spec.reg.gamma_n;
    }
    field.dense.row(k) << gu, gn1, gn2;
  }

  const Eigen::Index n = c.nodes();
  field.u.resize(n);
  field.n1.resize(n);
  field.n2.resize(n);
  const double h = fwd.step_size();
  for (Eigen::Index s = 0; s < n; ++s) {
    const double x = std::clamp(c.node_time(s) / h, 0.0, static_cast<double>(steps));
    const long k = std::min(static_cast<long>(std::floor(x)), steps - 1);
    const double w = x - static_cast<double>(k);
    const Eigen::RowVector3d g = (1.0 - w) * field.dense.row(k) + w * field.dense.row(k + 1);
    field.u[s] = g[0];
    field.n1[s] = g[1];
    field.n2[s] = g[2];
  }
  return {std::move(field), value, std::move(fwd), std::move(chi)};
}

Eigen::VectorXd hat_pairing(const GradientField& field, const ControlSet& c) {
  const Eigen::Index n = c.nodes();
  const double h = field.T / static_cast<double>(field.steps);
  const double dt = c.node_spacing();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * n);
  for (long k = 0; k <= field.steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double w = (k == 0 || k == field.steps) ? 0.5 * h : h;
    const double x = t / dt;
    if (x > static_cast<double>(c.subintervals()) + 1e-12) continue;
    const Eigen::Index s = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(x)), c.subintervals());
    const double frac = x - static_cast<double>(s);
    // Hat functions hat_s and hat_{s+1} are nonzero at t.
    for (int comp = 0; comp < 3; ++comp) {
      const double g = field.dense(k, comp) * w;
      out[comp * n + s] += g * (1.0 - frac);
      if (s + 1 < n) out[comp * n + s + 1] += g * frac;
    }
  }
  return out;
}

Eigen::VectorXd fd_gradient_oracle(const ControlProblem& problem, const ControlSet& c, double h) {
  if (!(h > 0.0)) throw DomainError("fd_gradient_oracle: h must be positive");
  const Eigen::VectorXd base = c.stacked();
  Eigen::VectorXd out(base.size());
  ControlSet probe = c;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Eigen::VectorXd v = base;
    v[i] = base[i] + h;
    probe.set_stacked(v);
    const double plus = evaluate_objective(problem, probe).value;
    v[i] = base[i] - h;
    probe.set_stacked(v);
    const double minus = evaluate_objective(problem, probe).value;
    out[i] = (plus - minus) / (2.0 * h);
  }
  return out;
}

double pmp_residual(const ControlSet& c, const GradientField& grad, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("pmp_residual: alpha must be positive");
  const ControlBounds& b = c.bounds();
  double worst = 0.0;
  for (Eigen::Index s = 0; s < c.nodes(); ++s) {
    const ControlValue moved =
        b.clamp({c.u()[s] - alpha * grad.u[s], c.n1()[s] - alpha * grad.n1[s], c.n2()[s] - alpha * grad.n2[s]});
    worst = std::max({worst, std::abs(c.u()[s] - moved.u), std::abs(c.n1()[s] - moved.n1),
                      std::abs(c.n2()[s] - moved.n2)});
  }
  return worst;
}

void write_gradient_csv(std::ostream& os, const GradientField& g, const ControlSet& c) {
  const auto old = os.precision(17);
  os << "t,gu,gn1,gn2\n";
  for (Eigen::Index s = 0; s < c.nodes(); ++s)
    os << c.node_time(s) << ',' << g.u[s] << ',' << g.n1[s] << ',' << g.n2[s] << '\n';
  os.precision(old);
}

}  // namespace qentropy
