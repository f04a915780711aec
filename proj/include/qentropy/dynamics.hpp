#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "qentropy/controls.hpp"
#include "qentropy/model.hpp"

namespace qentropy {

enum class Direction { Forward, Backward };

/// States stored at every node of a uniform integration grid on [0, T].
class Trajectory {
 public:
  Trajectory(double T, long steps, Direction direction);

  double horizon() const noexcept { return T_; }
  long steps() const noexcept { return steps_; }
  double step_size() const noexcept { return T_ / static_cast<double>(steps_); }
  std::size_t size() const noexcept { return states_.size(); }
  double time(long k) const noexcept { return static_cast<double>(k) * step_size(); }
  Direction direction() const noexcept { return direction_; }

  const Matrix4& state(long k) const { return states_.at(static_cast<std::size_t>(k)); }
  const Matrix4& initial() const { return states_.front(); }
  const Matrix4& terminal() const { return states_.back(); }
  const std::vector<Matrix4>& states() const noexcept { return states_; }

  /// Largest |Tr rho - 1| seen before per-step renormalization (forward solves).
  double max_trace_drift() const noexcept { return max_trace_drift_; }

 private:
  friend Trajectory solve_forward(const TwoQubitModel&, const Matrix4&, const ControlSet&, long);
  friend Trajectory solve_backward(const TwoQubitModel&, const Matrix4&, const ControlSet&, const Trajectory&,
                                   const std::function<Matrix4(double, const Matrix4&)>&);

  double T_;
  long steps_;
  Direction direction_;
  std::vector<Matrix4> states_;
  double max_trace_drift_ = 0.0;
};

/// Integration steps used when none are given: 10 per control subinterval, at least 2000,
/// rounded up so that control nodes fall on integration nodes.
long default_steps(int control_subintervals);

/**
 * Classical RK4 with fixed step T/steps for d rho/dt = L_{c(t)} rho.
 *
 * Each step is followed by symmetrization and trace renormalization. Throws
 * IntegrationError if a state becomes non-finite or drifts beyond tolerance.
 */
Trajectory solve_forward(const TwoQubitModel& model, const Matrix4& rho0, const ControlSet& c, long steps);

/// Per-time additive term of the co-state equation; receives t and rho(t).
using CoStateSource = std::function<Matrix4(double, const Matrix4&)>;

/**
 * RK4 backward from chi(T) for d chi/dt = -L_{c(t)}^dagger chi + source(t, rho(t)).
 *
 * rho at the half-step stage times is linearly interpolated from `forward`.
 * The co-state grid is the forward grid. An empty source means zero.
 */
Trajectory solve_backward(const TwoQubitModel& model, const Matrix4& chiT, const ControlSet& c,
                          const Trajectory& forward, const CoStateSource& source);

/// Linear interpolation between bracketing nodes. Throws DomainError outside [0, T].
Matrix4 interpolate(const Trajectory& traj, double t);

/// Columns: t,S,purity,hs_rho0,hs_mixed,S_q1,S_q2,rz_q1,rz_q2.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, long stride = 1);

}  // namespace qentropy
