#pragma once

#include <iosfwd>

#include "qentropy/objectives.hpp"

namespace qentropy {

/// Everything needed to evaluate Phi(c) for one of the differentiable objectives J1, J3, J4.
struct ControlProblem {
  TwoQubitModel model;
  Matrix4 rho0;
  ObjectiveSpec objective;
  long steps = 0;  ///< integration steps; 0 selects default_steps(M)

  long steps_for(const ControlSet& c) const { return steps > 0 ? steps : default_steps(c.subintervals()); }
};

/**
 * Gradient of Phi in control space.
 *
 * `dense` holds the gradient function at every integration node (columns u, n1, n2);
 * `u`, `n1`, `n2` are its values at the control nodes.
 */
struct GradientField {
  double T = 0.0;
  long steps = 0;
  Eigen::MatrixXd dense;
  Eigen::VectorXd u, n1, n2;

  Eigen::VectorXd stacked() const;
};

/// chi(T) = -dF/drho.
Matrix4 transversality(ObjectiveKind kind, const Matrix4& rhoT, const ObjectiveSpec& spec);

/// dg/drho for the running cost.
Matrix4 penalty_source(ObjectiveKind kind, const Matrix4& rho, const ObjectiveSpec& spec);

struct GradientResult {
  GradientField field;
  ObjectiveValue value;
  Trajectory forward;
  Trajectory costate;
};

/// Forward solve, co-state solve, switching functions: grad = (-K^u + 2 gamma_u u, -K^{n_j} + gamma_n).
GradientResult assemble_gradient(const ControlProblem& problem, const ControlSet& c);

/// Phi(c) alone (one forward solve).
ObjectiveValue evaluate_objective(const ControlProblem& problem, const ControlSet& c);

/// Integrals of the gradient against the nodal hat functions, i.e. dPhi/dc_s; stacked (u, n1, n2).
Eigen::VectorXd hat_pairing(const GradientField& field, const ControlSet& c);

/// Central differences of Phi with respect to every nodal control value; stacked (u, n1, n2).
Eigen::VectorXd fd_gradient_oracle(const ControlProblem& problem, const ControlSet& c, double h);

/// sup over nodes of ||c - Pr_Q(c - alpha grad)||_inf.
double pmp_residual(const ControlSet& c, const GradientField& grad, double alpha);

/// Columns: t,gu,gn1,gn2 at control nodes.
void write_gradient_csv(std::ostream& os, const GradientField& g, const ControlSet& c);

}  // namespace qentropy
