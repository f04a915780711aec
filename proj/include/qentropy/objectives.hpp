#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qentropy/controls.hpp"
#include "qentropy/dynamics.hpp"

namespace qentropy {

enum class ObjectiveKind { JO, J1, J2, J3, J4, J5 };
enum class Sense { Minimize, Maximize };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

/// Which objective is optimized, with its constants.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::J3;
  double S_ref = 0.0;   ///< S(rho0), fixed at problem setup
  double S_tar = 0.0;
  double S_bar = 0.0;
  double P = 0.1;
  double beta = 1.0;    ///< inverse temperature (JO)
  Matrix4 O = Matrix4::Zero();
  Sense sense = Sense::Minimize;
  RegularizationSpec reg{};
  std::pair<double, double> T_range{0.0, 0.0};  ///< J5 free-horizon range

  /// Checks side conditions against S(rho0); throws DomainError.
  void validate() const;
};

/// An objective value and its parts. `integral` is P * `integral_raw`.
struct ObjectiveValue {
  double value = 0.0;
  double terminal = 0.0;
  double integral = 0.0;
  double integral_raw = 0.0;
  double reg = 0.0;
};

nlohmann::json to_json(const ObjectiveValue& v, ObjectiveKind kind, int iteration);

/// S(rho(t_k)) at every trajectory node.
std::vector<double> entropy_profile(const Trajectory& traj);

/// Trapezoid on a uniform grid.
double trapezoid(const std::vector<double>& f, double h);

/// Tr(O rho(T)) - S(rho(T)) / beta.
double eval_JO(const Trajectory& traj, const ObjectiveSpec& spec);

/// eval_JO with the sign flipped for maximization, so that smaller is always better.
double eval_JO_minimized(const Trajectory& traj, const ObjectiveSpec& spec);

/// Terminal function F (J1, J3, J4).
double terminal_F(double S, const ObjectiveSpec& spec);

/// Running cost g (J1, J3, J4).
double running_g(double S, const ObjectiveSpec& spec);

/// F(rho(T)) + P int g(rho(t)) dt (+ R(c) when the integral regularization is active and `c` is given).
ObjectiveValue eval_unified(const Trajectory& traj, const ObjectiveSpec& spec, const ControlSet* c = nullptr);
ObjectiveValue eval_unified(const std::vector<double>& entropies, double step, const ObjectiveSpec& spec,
                            const ControlSet* c = nullptr);

/// max_k |S(rho(t_k)) - S(rho0)| over nodes t_k > 0.
double eval_J2(const Trajectory& traj, const ObjectiveSpec& spec);

/// |S(rho(T)) - S_tar| + P max_k max{S(rho(t_k)) - S_bar, 0}.
ObjectiveValue eval_J5(const Trajectory& traj, const ObjectiveSpec& spec);

/// Stopping test for GPM runs on J1, J3, J4.
bool stopping_check(ObjectiveKind kind, const ObjectiveValue& v, const ObjectiveSpec& spec, double eps1, double eps2);
bool stopping_check(ObjectiveKind kind, const Trajectory& traj, const ObjectiveSpec& spec, double eps1, double eps2);

/**
 * Finite-dimensional GA objective: decode a -> controls -> forward solve -> J2 or J5,
 * plus the jump (q2) or sup-norm (q5) regularization.
 */
class GaObjective {
 public:
  GaObjective(TwoQubitModel model, Matrix4 rho0, ParameterLayout layout, ObjectiveSpec spec, long steps);

  double operator()(const Eigen::VectorXd& a) const { return evaluate(a).value; }
  ObjectiveValue evaluate(const Eigen::VectorXd& a) const;

  const ParameterLayout& layout() const noexcept { return layout_; }
  const ObjectiveSpec& spec() const noexcept { return spec_; }
  long steps() const noexcept { return steps_; }
  const TwoQubitModel& model() const noexcept { return model_; }
  const Matrix4& rho0() const noexcept { return rho0_; }

 private:
  TwoQubitModel model_;
  Matrix4 rho0_;
  ParameterLayout layout_;
  ObjectiveSpec spec_;
  long steps_;
};

}  // namespace qentropy
