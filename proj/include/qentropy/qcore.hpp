#pragma once

#include <array>
#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace qentropy {

using Complex = std::complex<double>;
using Matrix4 = Eigen::Matrix4cd;
using Matrix2 = Eigen::Matrix2cd;
using Vector3 = Eigen::Vector3d;
using RealCoordinates = Eigen::Matrix<double, 16, 1>;

/// Eigenvalues at or below this are treated as exact zeros by entropy and log.
inline constexpr double kEigenvalueFloor = 1e-14;

/// Tolerances for validated density matrices.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;

/// Kernels accept slightly drifted matrices (e.g. integrator output) up to this asymmetry.
inline constexpr double kSymmetrizationTol = 1e-8;

/// A validated 4x4 two-qubit density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  /// Validates `m` against the density-matrix invariants and stores its Hermitian part.
  static DensityMatrix from_matrix(const Matrix4& m);
  /// diag(p1, p2, p3, p4) for a probability vector p.
  static DensityMatrix diagonal(const std::array<double, 4>& p);
  static DensityMatrix maximally_mixed();

  const Matrix4& matrix() const noexcept { return m_; }
  operator const Matrix4&() const noexcept { return m_; }

 private:
  explicit DensityMatrix(Matrix4 m) : m_(std::move(m)) {}
  Matrix4 m_;
};

/// Reduced single-qubit state together with its Bloch vector.
struct QubitReduction {
  Matrix2 reduced;
  Vector3 bloch;
};

Matrix4 hermitian_part(const Matrix4& m);

/// Max elementwise |m - m^dagger|.
double hermiticity_defect(const Matrix4& m);

/// Eigenvalues (ascending) of the Hermitian part of `m`.
Eigen::Vector4d eigenvalues(const Matrix4& m);

/// -sum lambda log lambda over eigenvalues above the floor, in nats.
double von_neumann_entropy(const Matrix4& rho);
double von_neumann_entropy(const Matrix2& rho);

/// Frechet derivative of S: -log(rho) - I, with eigenvalues clamped at the floor.
Matrix4 entropy_derivative(const Matrix4& rho);

/// S(rho) and dS/drho from a single eigendecomposition.
std::pair<double, Matrix4> entropy_with_derivative(const Matrix4& rho);

/// Matrix logarithm of a PSD Hermitian matrix with clamped eigenvalues.
Matrix4 log_clamped(const Matrix4& rho);

/// Reduced state of qubit `keep` (1 or 2); qubit 1 is the first tensor factor.
QubitReduction partial_trace(const Matrix4& rho, int keep);

Matrix2 bloch_to_density(const Vector3& r);

double purity(const Matrix4& rho);
double linear_entropy(const Matrix4& rho);
double hs_distance(const Matrix4& a, const Matrix4& b);

/// Hilbert-Schmidt inner product Tr(a^dagger b), real part; exact for Hermitian arguments.
double hs_inner(const Matrix4& a, const Matrix4& b);

/// Full complex Tr(a^dagger b).
Complex hs_inner_complex(const Matrix4& a, const Matrix4& b);

/// x1..x16 coordinates: x1 = rho11, x2 + i x3 = rho12, ..., x16 = rho44 (stored 0-based).
RealCoordinates real_coordinates(const Matrix4& rho);
DensityMatrix from_real_coordinates(const RealCoordinates& x);

/// Pauli matrices and the 2x2 identity.
const Matrix2& sigma_x();
const Matrix2& sigma_y();
const Matrix2& sigma_z();
const Matrix2& identity2();

Matrix4 kron(const Matrix2& a, const Matrix2& b);

}  // namespace qentropy
