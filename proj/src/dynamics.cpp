#include "qentropy/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qentropy/errors.hpp"

namespace qentropy {

namespace {

constexpr double kTraceFailTol = 1e-6;
constexpr double kDiagonalFailTol = 1e-6;

}  // namespace

Trajectory::Trajectory(double T, long steps, Direction direction) : T_(T), steps_(steps), direction_(direction) {
  if (!(T > 0.0)) throw DomainError("trajectory horizon must be positive");
  if (steps < 1) throw DomainError("trajectory needs at least one step");
}

long default_steps(int control_subintervals) {
  const long m = std::max(1, control_subintervals);
  long steps = std::max(10 * m, 2000L);
  if (steps % m != 0) steps += m - steps % m;
  return steps;
}

Trajectory solve_forward(const TwoQubitModel& model, const Matrix4& rho0, const ControlSet& c, long steps) {
  Trajectory traj(c.horizon(), steps, Direction::Forward);
  traj.states_.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states_.push_back(hermitian_part(rho0));

  const double h = traj.step_size();
  VecState y = vectorize(traj.states_.back());
  Superoperator g_start = model.generator(c.evaluate(0.0));
  for (long k = 0; k < steps; ++k) {
    const double t = traj.time(k);
    const Superoperator g_mid = model.generator(c.evaluate(t + 0.5 * h));
    const Superoperator g_end = model.generator(c.evaluate(k + 1 == steps ? c.horizon() : t + h));
    const VecState k1 = g_start * y;
    const VecState k2 = g_mid * (y + 0.5 * h * k1);
    const VecState k3 = g_mid * (y + 0.5 * h * k2);
    const VecState k4 = g_end * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    Matrix4 rho = hermitian_part(unvectorize(y));
    const double tr = rho.trace().real();
    if (!rho.allFinite()) throw IntegrationError("forward state became non-finite", k + 1);
    const double drift = std::abs(tr - 1.0);
    if (drift > kTraceFailTol) throw IntegrationError("forward trace drift exceeded tolerance", k + 1);
    if (rho.diagonal().real().minCoeff() < -kDiagonalFailTol)
      throw IntegrationError("forward state lost positivity", k + 1);
    traj.max_trace_drift_ = std::max(traj.max_trace_drift_, drift);
    rho /= tr;
    traj.states_.push_back(rho);
    y = vectorize(rho);
    g_start = g_end;
  }
  return traj;
}

Trajectory solve_backward(const TwoQubitModel& model, const Matrix4& chiT, const ControlSet& c,
                          const Trajectory& forward, const CoStateSource& source) {
  if (forward.direction() != Direction::Forward) throw DomainError("solve_backward needs a forward trajectory");
  if (std::abs(forward.horizon() - c.horizon()) > 1e-12 * c.horizon())
    throw DomainError("forward trajectory and controls have different horizons");

  const long steps = forward.steps();
  const double h = forward.step_size();
  Trajectory traj(forward.horizon(), steps, Direction::Backward);
  std::vector<Matrix4> states(static_cast<std::size_t>(steps) + 1);

  auto src = [&](double t, const Matrix4& rho) -> VecState {
    if (!source) return VecState::Zero();
    return vectorize(source(t, rho));
  };

  VecState y = vectorize(hermitian_part(chiT));
  states[static_cast<std::size_t>(steps)] = unvectorize(y);
  Superoperator a_start = model.generator(c.evaluate(forward.horizon())).adjoint();
  VecState s_start = src(forward.horizon(), forward.terminal());
  for (long k = steps; k > 0; --k) {
    const double t = forward.time(k);
    const double t_mid = t - 0.5 * h;
    const double t_end = forward.time(k - 1);
    const Superoperator a_mid = model.generator(c.evaluate(t_mid)).adjoint();
    const Superoperator a_end = model.generator(c.evaluate(t_end)).adjoint();
    const Matrix4 rho_mid = 0.5 * (forward.state(k) + forward.state(k - 1));
    const VecState s_mid = src(t_mid, rho_mid);
    const VecState s_end = src(t_end, forward.state(k - 1));

    // f(t, chi) = -L^dagger chi + s(t); stepping with -h.
    const VecState k1 = -(a_start * y) + s_start;
    const VecState k2 = -(a_mid * (y - 0.5 * h * k1)) + s_mid;
    const VecState k3 = -(a_mid * (y - 0.5 * h * k2)) + s_mid;
    const VecState k4 = -(a_end * (y - h * k3)) + s_end;
    y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const Matrix4 chi = hermitian_part(unvectorize(y));
    if (!chi.allFinite()) throw IntegrationError("co-state became non-finite", k - 1);
    states[static_cast<std::size_t>(k - 1)] = chi;
    y = vectorize(chi);
    a_start = a_end;
    s_start = s_end;
  }
  traj.states_ = std::move(states);
  return traj;
}

Matrix4 interpolate(const Trajectory& traj, double t) {
  const double T = traj.horizon();
  const double slack = 1e-12 * T;
  if (!(t >= -slack && t <= T + slack)) throw DomainError("interpolate: t outside [0, T]");
  const double x = std::clamp(t / traj.step_size(), 0.0, static_cast<double>(traj.steps()));
  long k = static_cast<long>(std::floor(x));
  if (k >= traj.steps()) return traj.terminal();
  const double w = x - static_cast<double>(k);
  if (w == 0.0) return traj.state(k);
  return (1.0 - w) * traj.state(k) + w * traj.state(k + 1);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, long stride) {
  stride = std::max(1L, stride);
  const auto old = os.precision(17);
  const Matrix4 mixed = Matrix4::Identity() * 0.25;
  os << "t,S,purity,hs_rho0,hs_mixed,S_q1,S_q2,rz_q1,rz_q2\n";
  for (long k = 0; k <= traj.steps(); ++k) {
    if (k % stride != 0 && k != traj.steps()) continue;
    const Matrix4& rho = traj.state(k);
    const QubitReduction q1 = partial_trace(rho, 1);
    const QubitReduction q2 = partial_trace(rho, 2);
    os << traj.time(k) << ',' << von_neumann_entropy(rho) << ',' << purity(rho) << ','
       << hs_distance(rho, traj.initial()) << ',' << hs_distance(rho, mixed) << ',' << von_neumann_entropy(q1.reduced)
       << ',' << von_neumann_entropy(q2.reduced) << ',' << q1.bloch.z() << ',' << q2.bloch.z() << '\n';
  }
  os.precision(old);
}

}  // namespace qentropy
