#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qentropy/model.hpp"

namespace qentropy {

/// Box Q = [-u_max, u_max] x [0, n_max]^2.
struct ControlBounds {
  double u_max = 30.0;
  double n_max = 10.0;

  void validate() const;
  ControlValue clamp(const ControlValue& c) const;
};

/**
 * Piecewise-linear controls (u, n1, n2) on a uniform grid with M subintervals.
 *
 * With support_fraction f < 1 the nodes cover [0, f T] and every component is
 * zero on (f T, T]; this is the restricted class used for the free-time GA runs.
 */
class ControlSet {
 public:
  ControlSet() = default;
  ControlSet(double T, int M, ControlBounds bounds, double support_fraction = 1.0);

  /// Constant controls on every node (clamped into the box).
  static ControlSet constant(double T, int M, ControlBounds bounds, ControlValue value);

  double horizon() const noexcept { return T_; }
  int subintervals() const noexcept { return M_; }
  Eigen::Index nodes() const noexcept { return M_ + 1; }
  double support_fraction() const noexcept { return support_; }
  double node_spacing() const noexcept { return support_ * T_ / M_; }
  double node_time(Eigen::Index s) const noexcept { return static_cast<double>(s) * node_spacing(); }
  const ControlBounds& bounds() const noexcept { return bounds_; }

  const Eigen::VectorXd& u() const noexcept { return u_; }
  const Eigen::VectorXd& n1() const noexcept { return n1_; }
  const Eigen::VectorXd& n2() const noexcept { return n2_; }
  Eigen::VectorXd& u() noexcept { return u_; }
  Eigen::VectorXd& n1() noexcept { return n1_; }
  Eigen::VectorXd& n2() noexcept { return n2_; }

  /// Linear interpolation between bracketing nodes; exact at nodes.
  ControlValue evaluate(double t) const;

  /// Samples stacked as (u, n1, n2), length 3(M+1).
  Eigen::VectorXd stacked() const;
  void set_stacked(const Eigen::VectorXd& v);

  bool admissible() const;

  /// Same grid and bounds, new horizon (support fraction kept).
  ControlSet with_horizon(double T) const;

 private:
  double T_ = 1.0;
  int M_ = 1;
  double support_ = 1.0;
  ControlBounds bounds_{};
  Eigen::VectorXd u_, n1_, n2_;
};

/// Componentwise clamp onto the box.
ControlSet project_box(const Eigen::VectorXd& u, const Eigen::VectorXd& n1, const Eigen::VectorXd& n2,
                       double T, const ControlBounds& bounds, double support_fraction = 1.0);
ControlSet project_box(const ControlSet& raw);

enum class RegularizationMode { None, Integral, SupNorm, Jumps };

struct RegularizationSpec {
  double gamma_u = 0.0;
  double gamma_n = 0.0;
  std::array<double, 2> delta_n{1.0, 1.0};
  RegularizationMode mode = RegularizationMode::None;

  void validate() const;
};

/// Trapezoid of gamma_u u^2 + gamma_n (n1 + n2) on `steps` uniform subintervals of [0, T].
double regularization_integral(const ControlSet& c, const RegularizationSpec& spec, long steps);

/// gamma_u max|u^s| + gamma_n (max n1^s + max n2^s).
double regularization_supnorm(const ControlSet& c, const RegularizationSpec& spec);

/// gamma_u max|u^s| + gamma_n sum_j max{max_s |n_j^{s+1} - n_j^s| - delta_j, 0}.
double regularization_jumps(const ControlSet& c, const RegularizationSpec& spec);

/// Largest jump excess max_s |n_j^{s+1} - n_j^s| - delta_j, clamped at zero, summed over j.
double jump_violation(const ControlSet& c, const RegularizationSpec& spec);

/// Layout of the finite-dimensional GA parameter vector.
struct ParameterLayout {
  int M = 10;
  double T = 5.0;
  ControlBounds bounds{};
  bool coherent_only = false;        ///< only u is encoded; n1 = n2 = 0
  double support_fraction = 1.0;
  std::optional<std::pair<double, double>> free_horizon;  ///< appends T in [T1, T2]

  std::size_t size() const;
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
};

Eigen::VectorXd ga_encode(const ControlSet& c, const ParameterLayout& layout);

/// Decodes (and clamps) a parameter vector. Throws DomainError on length mismatch.
ControlSet ga_decode(const Eigen::VectorXd& a, const ParameterLayout& layout);

void write_controls_csv(std::ostream& os, const ControlSet& c);
nlohmann::json controls_to_json(const ControlSet& c);
ControlSet controls_from_json(const nlohmann::json& j);

}  // namespace qentropy
