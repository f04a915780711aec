#include "qentropy/objectives.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "qentropy/errors.hpp"

namespace qentropy {

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::JO: return "JO";
    case ObjectiveKind::J1: return "J1";
    case ObjectiveKind::J2: return "J2";
    case ObjectiveKind::J3: return "J3";
    case ObjectiveKind::J4: return "J4";
    case ObjectiveKind::J5: return "J5";
  }
  return "?";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  for (auto k : {ObjectiveKind::JO, ObjectiveKind::J1, ObjectiveKind::J2, ObjectiveKind::J3, ObjectiveKind::J4,
                 ObjectiveKind::J5})
    if (to_string(k) == s) return k;
  throw DomainError("unknown objective kind '" + s + "'");
}

void ObjectiveSpec::validate() const {
  reg.validate();
  switch (kind) {
    case ObjectiveKind::JO:
      if (!(beta > 0.0)) throw DomainError("JO: beta must be positive");
      if (hermiticity_defect(O) > kHermitianTol) throw DomainError("JO: observable must be Hermitian");
      break;
    case ObjectiveKind::J1:
    case ObjectiveKind::J2:
      if (kind == ObjectiveKind::J1 && !(P > 0.0)) throw DomainError("J1: P must be positive");
      break;
    case ObjectiveKind::J3:
      if (S_tar == S_ref) throw DomainError("J3: S_tar must differ from S(rho0)");
      break;
    case ObjectiveKind::J4:
      if (S_tar == S_ref) throw DomainError("J4: S_tar must differ from S(rho0)");
      if (!(S_bar > S_ref)) throw DomainError("J4: S_bar must exceed S(rho0)");
      if (!(P > 0.0)) throw DomainError("J4: P must be positive");
      break;
    case ObjectiveKind::J5:
      if (!(S_bar > S_ref)) throw DomainError("J5: S_bar must exceed S(rho0)");
      if (!(P > 0.0)) throw DomainError("J5: P must be positive");
      if (!(T_range.first > 0.0 && T_range.first <= T_range.second)) throw DomainError("J5: invalid T range");
      break;
  }
}

nlohmann::json to_json(const ObjectiveValue& v, ObjectiveKind kind, int iteration) {
  return {{"iteration", iteration},     {"kind", to_string(kind)}, {"value", v.value},
          {"terminal_term", v.terminal}, {"integral_term", v.integral}, {"reg_term", v.reg}};
}

std::vector<double> entropy_profile(const Trajectory& traj) {
  std::vector<double> s;
  s.reserve(traj.size());
  for (const Matrix4& rho : traj.states()) s.push_back(von_neumann_entropy(rho));
  return s;
}

double trapezoid(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) acc += f[k];
  return acc * h;
}

double eval_JO(const Trajectory& traj, const ObjectiveSpec& spec) {
  const Matrix4& rho = traj.terminal();
  return (spec.O * rho).trace().real() - von_neumann_entropy(rho) / spec.beta;
}

double eval_JO_minimized(const Trajectory& traj, const ObjectiveSpec& spec) {
  const double j = eval_JO(traj, spec);
  return spec.sense == Sense::Maximize ? -j : j;
}

double terminal_F(double S, const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::J1: return (S - spec.S_ref) * (S - spec.S_ref);
    case ObjectiveKind::J3:
    case ObjectiveKind::J4: return (S - spec.S_tar) * (S - spec.S_tar);
    default: throw DomainError("terminal_F: objective " + to_string(spec.kind) + " has no unified form");
  }
}

double running_g(double S, const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::J1: return (S - spec.S_ref) * (S - spec.S_ref);
    case ObjectiveKind::J3: return 0.0;
    case ObjectiveKind::J4: {
      const double excess = std::max(S - spec.S_bar, 0.0);
      return excess * excess;
    }
    default: throw DomainError("running_g: objective " + to_string(spec.kind) + " has no unified form");
  }
}

ObjectiveValue eval_unified(const std::vector<double>& entropies, double step, const ObjectiveSpec& spec,
                            const ControlSet* c) {
  if (entropies.empty()) throw DomainError("eval_unified: empty entropy profile");
  ObjectiveValue v;
  v.terminal = terminal_F(entropies.back(), spec);
  if (spec.kind != ObjectiveKind::J3) {
    std::vector<double> g(entropies.size());
    std::transform(entropies.begin(), entropies.end(), g.begin(), [&](double s) { return running_g(s, spec); });
    v.integral_raw = trapezoid(g, step);
    v.integral = spec.P * v.integral_raw;
  }
  if (c != nullptr && spec.reg.mode == RegularizationMode::Integral)
    v.reg = regularization_integral(*c, spec.reg, static_cast<long>(entropies.size()) - 1);
  v.value = v.terminal + v.integral + v.reg;
  return v;
}

ObjectiveValue eval_unified(const Trajectory& traj, const ObjectiveSpec& spec, const ControlSet* c) {
  return eval_unified(entropy_profile(traj), traj.step_size(), spec, c);
}

double eval_J2(const Trajectory& traj, const ObjectiveSpec& spec) {
  double worst = 0.0;
  for (long k = 1; k <= traj.steps(); ++k)
    worst = std::max(worst, std::abs(von_neumann_entropy(traj.state(k)) - spec.S_ref));
  return worst;
}

ObjectiveValue eval_J5(const Trajectory& traj, const ObjectiveSpec& spec) {
  ObjectiveValue v;
  double worst = 0.0;
  for (long k = 1; k <= traj.steps(); ++k)
    worst = std::max(worst, von_neumann_entropy(traj.state(k)) - spec.S_bar);
  v.terminal = std::abs(von_neumann_entropy(traj.terminal()) - spec.S_tar);
  v.integral_raw = std::max(worst, 0.0);
  v.integral = spec.P * v.integral_raw;
  v.value = v.terminal + v.integral;
  return v;
}

bool stopping_check(ObjectiveKind kind, const ObjectiveValue& v, const ObjectiveSpec&, double eps1,
                    double eps2) {
  switch (kind) {
    case ObjectiveKind::J3: return v.terminal <= eps1;
    case ObjectiveKind::J1:
    case ObjectiveKind::J4: return v.terminal <= eps1 && v.integral_raw <= eps2;
    default: throw DomainError("stopping_check: objective " + to_string(kind) + " is not a GPM objective");
  }
}

bool stopping_check(ObjectiveKind kind, const Trajectory& traj, const ObjectiveSpec& spec, double eps1,
                    double eps2) {
  ObjectiveSpec s = spec;
  s.kind = kind;
  return stopping_check(kind, eval_unified(traj, s), s, eps1, eps2);
}

GaObjective::GaObjective(TwoQubitModel model, Matrix4 rho0, ParameterLayout layout, ObjectiveSpec spec, long steps)
    : model_(std::move(model)), rho0_(std::move(rho0)), layout_(std::move(layout)), spec_(std::move(spec)),
      steps_(steps) {
  if (spec_.kind != ObjectiveKind::J2 && spec_.kind != ObjectiveKind::J5)
    throw DomainError("GaObjective supports J2 and J5 only");
  if (steps_ < 1) throw DomainError("GaObjective: steps must be positive");
}

ObjectiveValue GaObjective::evaluate(const Eigen::VectorXd& a) const {
  const ControlSet c = ga_decode(a, layout_);
  const Trajectory traj = solve_forward(model_, rho0_, c, steps_);
  ObjectiveValue v;
  if (spec_.kind == ObjectiveKind::J2) {
    v.terminal = eval_J2(traj, spec_);
    v.reg = regularization_jumps(c, spec_.reg);
  } else {
    v = eval_J5(traj, spec_);
    v.reg = regularization_supnorm(c, spec_.reg);
  }
  v.value = v.terminal + v.integral + v.reg;
  return v;
}

}  // namespace qentropy
