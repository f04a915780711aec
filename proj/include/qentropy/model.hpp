#pragma once

#include <array>

#include "qentropy/qcore.hpp"

namespace qentropy {

/// Physical constants of the two-qubit model.
struct ModelParameters {
  double epsilon = 0.1;                 ///< system-environment coupling
  std::array<double, 2> omega{1.0, 0.5};        ///< transition frequencies
  std::array<double, 2> lamb_shift{0.3, 0.5};   ///< Lamb-shift coefficients
  std::array<double, 2> dissipation{0.2, 0.6};  ///< dissipation coefficients
  std::array<double, 2> theta{0.0, 0.0};        ///< polar angles of the control field directions
  std::array<double, 2> phi{0.0, 0.0};          ///< azimuthal angles

  /// Parameter set used throughout the reference experiments.
  static ModelParameters reference();

  /// Throws DomainError if a strictly positive field is not positive or epsilon < 0.
  void validate() const;
};

/// Instantaneous control value c = (u, n1, n2).
struct ControlValue {
  double u = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
};

/// Fixed matrices of the model, immutable after construction.
struct StaticOperators {
  Matrix4 H_S;                    ///< free Hamiltonian
  Matrix4 V;                      ///< coherent-control coupling
  std::array<Matrix4, 2> W;       ///< sigma_z on qubit j
  std::array<Matrix2, 2> Q;       ///< single-qubit control direction operators
  std::array<Matrix4, 2> sigma_plus;
  std::array<Matrix4, 2> sigma_minus;
};

StaticOperators build_operators(const ModelParameters& p);

/// Unit direction (lambda_x, lambda_y, lambda_z) of Q_j from (theta_j, phi_j).
Vector3 control_direction(double theta, double phi);

using Superoperator = Eigen::Matrix<Complex, 16, 16>;
using VecState = Eigen::Matrix<Complex, 16, 1>;

/// Column-major vectorization; <A, B> = vec(A)^H vec(B).
VecState vectorize(const Matrix4& m);
Matrix4 unvectorize(const VecState& v);

/// Switching functions (K^u, K^{n1}, K^{n2}).
struct SwitchingValues {
  double ku = 0.0;
  double kn1 = 0.0;
  double kn2 = 0.0;
};

/**
 * Controlled GKSL generator of the two-qubit system.
 *
 * The generator is affine in the controls,
 *   L_c = L_0 + u L_u + n1 L_{n1} + n2 L_{n2},
 * and the four superoperators are assembled once, by applying the matrix
 * form of the master equation to the 16 matrix units.
 */
class TwoQubitModel {
 public:
  explicit TwoQubitModel(const ModelParameters& p);

  const ModelParameters& params() const noexcept { return p_; }
  const StaticOperators& operators() const noexcept { return ops_; }

  /// H_S + eps * sum_j Lambda_j W_j n_j + V u.
  Matrix4 hamiltonian(const ControlValue& c) const;

  /// Dissipator D_n(rho) (without the eps prefactor).
  Matrix4 dissipator(const Matrix4& rho, const ControlValue& c) const;

  /// Adjoint dissipator D_n^dagger(chi).
  Matrix4 adjoint_dissipator(const Matrix4& chi, const ControlValue& c) const;

  /// d rho / dt = -i[H_c, rho] + eps D_n(rho). Throws DomainError for negative n_j.
  Matrix4 liouvillian_apply(const Matrix4& rho, const ControlValue& c) const;

  /// Hilbert-Schmidt adjoint of the generator: i[H_c, chi] + eps D_n^dagger(chi).
  Matrix4 adjoint_liouvillian_apply(const Matrix4& chi, const ControlValue& c) const;

  /// K^u = <chi, -i[V, rho]>, K^{n_j} = <chi, dL/dn_j (rho)>.
  SwitchingValues switching_functions(const Matrix4& chi, const Matrix4& rho) const;

  /// Dense superoperator blocks.
  const Superoperator& L0() const noexcept { return L0_; }
  const Superoperator& Lu() const noexcept { return Lu_; }
  const Superoperator& Ln1() const noexcept { return Ln_[0]; }
  const Superoperator& Ln2() const noexcept { return Ln_[1]; }

  /// L_c as a 16x16 matrix.
  Superoperator generator(const ControlValue& c) const;

  /// Same as switching_functions, via the superoperator blocks.
  SwitchingValues switching_functions_vec(const VecState& chi, const VecState& rho) const;

 private:
  ModelParameters p_;
  StaticOperators ops_;
  std::array<Matrix4, 2> pm_;  // sigma_j^+ sigma_j^-
  std::array<Matrix4, 2> mp_;  // sigma_j^- sigma_j^+
  Superoperator L0_;
  Superoperator Lu_;
  std::array<Superoperator, 2> Ln_;
};

/// Exact zero-control solution from rho0 = diag(a) at time t.
DensityMatrix zero_control_solution(const ModelParameters& p, const std::array<double, 4>& a, double t);

}  // namespace qentropy
