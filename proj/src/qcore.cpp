#include "qentropy/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qentropy/errors.hpp"

namespace qentropy {

namespace {

void require_hermitian(const Matrix4& m, double tol) {
  const double defect = hermiticity_defect(m);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "matrix is not Hermitian (defect " << defect << " > " << tol << ")";
    throw InvalidStateError(os.str());
  }
}

double entropy_of_spectrum(const auto& lambdas) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    if (l > kEigenvalueFloor) s -= l * std::log(l);
  }
  return std::max(s, 0.0);
}

}  // namespace

DensityMatrix DensityMatrix::from_matrix(const Matrix4& m) {
  if (!m.allFinite()) throw InvalidStateError("density matrix has non-finite entries");
  require_hermitian(m, kHermitianTol);
  Matrix4 h = hermitian_part(m);
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1";
    throw InvalidStateError(os.str());
  }
  const double min_eig = eigenvalues(h).minCoeff();
  if (min_eig < -kPositivityTol) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << min_eig;
    throw InvalidStateError(os.str());
  }
  return DensityMatrix(std::move(h));
}

DensityMatrix DensityMatrix::diagonal(const std::array<double, 4>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError("diagonal entries must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTraceTol) throw DomainError("diagonal entries must sum to 1");
  Matrix4 m = Matrix4::Zero();
  for (int i = 0; i < 4; ++i) m(i, i) = p[static_cast<std::size_t>(i)];
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed() { return DensityMatrix(Matrix4::Identity() * 0.25); }

Matrix4 hermitian_part(const Matrix4& m) { return 0.5 * (m + m.adjoint()); }

double hermiticity_defect(const Matrix4& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

Eigen::Vector4d eigenvalues(const Matrix4& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double von_neumann_entropy(const Matrix4& rho) {
  require_hermitian(rho, kSymmetrizationTol);
  return entropy_of_spectrum(eigenvalues(rho));
}

double von_neumann_entropy(const Matrix2& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return entropy_of_spectrum(es.eigenvalues());
}

Matrix4 log_clamped(const Matrix4& rho) {
  require_hermitian(rho, kSymmetrizationTol);
  Eigen::SelfAdjointEigenSolver<Matrix4> es(hermitian_part(rho));
  Eigen::Vector4d logs;
  for (int i = 0; i < 4; ++i) logs[i] = std::log(std::max(es.eigenvalues()[i], kEigenvalueFloor));
  const auto& v = es.eigenvectors();
  return v * logs.cast<Complex>().asDiagonal() * v.adjoint();
}

Matrix4 entropy_derivative(const Matrix4& rho) { return -log_clamped(rho) - Matrix4::Identity(); }

std::pair<double, Matrix4> entropy_with_derivative(const Matrix4& rho) {
  require_hermitian(rho, kSymmetrizationTol);
  Eigen::SelfAdjointEigenSolver<Matrix4> es(hermitian_part(rho));
  const Eigen::Vector4d& lambdas = es.eigenvalues();
  Eigen::Vector4d d;
  for (int i = 0; i < 4; ++i) d[i] = -std::log(std::max(lambdas[i], kEigenvalueFloor)) - 1.0;
  const auto& v = es.eigenvectors();
  return {entropy_of_spectrum(lambdas), v * d.cast<Complex>().asDiagonal() * v.adjoint()};
}

QubitReduction partial_trace(const Matrix4& rho, int keep) {
  if (keep != 1 && keep != 2) throw DomainError("partial_trace: keep must be 1 or 2");
  Matrix2 r = Matrix2::Zero();
  // Basis index of |a b> is 2a + b.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) {
        if (keep == 1)
          r(a, b) += rho(2 * a + k, 2 * b + k);
        else
          r(a, b) += rho(2 * k + a, 2 * k + b);
      }
  QubitReduction out;
  out.reduced = r;
  out.bloch = Vector3((r * sigma_x()).trace().real(), (r * sigma_y()).trace().real(), (r * sigma_z()).trace().real());
  return out;
}

Matrix2 bloch_to_density(const Vector3& r) {
  return 0.5 * (identity2() + r.x() * sigma_x() + r.y() * sigma_y() + r.z() * sigma_z());
}

double purity(const Matrix4& rho) { return (rho * rho).trace().real(); }

double linear_entropy(const Matrix4& rho) { return 1.0 - purity(rho); }

double hs_distance(const Matrix4& a, const Matrix4& b) {
  const Matrix4 d = a - b;
  return std::sqrt(std::max(0.0, (d * d).trace().real()));
}

Complex hs_inner_complex(const Matrix4& a, const Matrix4& b) { return (a.adjoint() * b).trace(); }

double hs_inner(const Matrix4& a, const Matrix4& b) {
  // Tr(A^dagger B) = sum conj(A_ij) B_ij
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

RealCoordinates real_coordinates(const Matrix4& rho) {
  RealCoordinates x;
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    x[k++] = rho(i, i).real();
    for (int j = i + 1; j < 4; ++j) {
      x[k++] = rho(i, j).real();
      x[k++] = rho(i, j).imag();
    }
  }
  return x;
}

DensityMatrix from_real_coordinates(const RealCoordinates& x) {
  Matrix4 m;
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    m(i, i) = x[k++];
    for (int j = i + 1; j < 4; ++j) {
      m(i, j) = Complex(x[k], x[k + 1]);
      m(j, i) = std::conj(m(i, j));
      k += 2;
    }
  }
  return DensityMatrix::from_matrix(m);
}

const Matrix2& sigma_x() {
  static const Matrix2 m = (Matrix2() << 0, 1, 1, 0).finished();
  return m;
}

const Matrix2& sigma_y() {
  static const Matrix2 m = (Matrix2() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  return m;
}

const Matrix2& sigma_z() {
  static const Matrix2 m = (Matrix2() << 1, 0, 0, -1).finished();
  return m;
}

const Matrix2& identity2() {
  static const Matrix2 m = Matrix2::Identity();
  return m;
}

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace qentropy
