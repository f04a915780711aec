#include <doctest.h>

#include <cmath>

#include "qentropy/errors.hpp"
#include "qentropy/qcore.hpp"
#include "support.hpp"

using namespace qentropy;
using testing_support::random_density;
using testing_support::random_hermitian;

TEST_CASE("entropy of reference states") {
  const double log4 = std::log(4.0);
  const double s_keep = -(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 2 * 0.1 * std::log(0.1));
  const double log2 = std::log(2.0);

  CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed().matrix()) == doctest::Approx(log4).epsilon(1e-14));
  CHECK(von_neumann_entropy(DensityMatrix::diagonal({1, 0, 0, 0}).matrix()) == 0.0);
  CHECK(von_neumann_entropy(DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix()) ==
        doctest::Approx(s_keep).epsilon(1e-14));
  CHECK(s_keep == doctest::Approx(1.168).epsilon(1e-3));
  CHECK(von_neumann_entropy(DensityMatrix::diagonal({0, 0.5, 0, 0.5}).matrix()) == doctest::Approx(log2).epsilon(1e-14));
}

TEST_CASE("entropy rejects non-Hermitian input") {
  Matrix4 m = Matrix4::Identity() * 0.25;
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(von_neumann_entropy(m), InvalidStateError);
  CHECK_THROWS_AS(entropy_derivative(m), InvalidStateError);
}

TEST_CASE("density matrix validation") {
  Matrix4 m = Matrix4::Identity() * 0.3;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), InvalidStateError);
  m = Matrix4::Zero();
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), InvalidStateError);
  CHECK_THROWS_AS(DensityMatrix::diagonal({0.5, 0.5, 0.5, -0.5}), DomainError);
  CHECK_THROWS_AS(DensityMatrix::diagonal({0.5, 0.5, 0.5, 0.5}), DomainError);
  std::mt19937_64 rng(3);
  CHECK_NOTHROW(DensityMatrix::from_matrix(random_density(rng)));
}

TEST_CASE("entropy derivative closed forms") {
  const Matrix4 expected_mixed = (std::log(4.0) - 1.0) * Matrix4::Identity();
  CHECK((entropy_derivative(DensityMatrix::maximally_mixed().matrix()) - expected_mixed).cwiseAbs().maxCoeff() < 1e-13);

  Matrix4 expected = Matrix4::Zero();
  const double p[4] = {0.5, 0.3, 0.1, 0.1};
  for (int i = 0; i < 4; ++i) expected(i, i) = -std::log(p[i]) - 1.0;
  const Matrix4 d = entropy_derivative(DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix());
  CHECK((d - expected).cwiseAbs().maxCoeff() < 1e-13);

  const double s_keep = -(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 2 * 0.1 * std::log(0.1));
  const auto [S, dS] = entropy_with_derivative(DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix());
  CHECK(S == doctest::Approx(s_keep).epsilon(1e-13));
  CHECK((dS - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("entropy derivative matches central differences on interior states") {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 500) {
    const Matrix4 rho = random_density(rng, 0.1);
    if (eigenvalues(rho).minCoeff() <= 1e-3) continue;
    Matrix4 e = random_hermitian(rng);
    e -= e.trace() / 4.0 * Matrix4::Identity();
    e /= e.norm();
    const double h = 1e-6;
    const double fd = (von_neumann_entropy(Matrix4(rho + h * e)) - von_neumann_entropy(Matrix4(rho - h * e))) / (2 * h);
    const double an = hs_inner(entropy_derivative(rho), e);
    CHECK(std::abs(fd - an) <= 1e-5 * std::max(std::abs(an), 1e-2));
    ++checked;
  }
}

TEST_CASE("entropy bounds over random states") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double s = von_neumann_entropy(random_density(rng));
    CHECK(s >= 0.0);
    CHECK(s <= std::log(4.0) + 1e-9);
  }
}

TEST_CASE("unitary invariance of entropy") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const Matrix4 rho = random_density(rng);
    const Matrix4 U = testing_support::random_unitary(rng);
    const Matrix4 rotated = hermitian_part(U * rho * U.adjoint());
    CHECK(std::abs(von_neumann_entropy(rotated) - von_neumann_entropy(rho)) < 1e-10);
  }
}

TEST_CASE("subadditivity") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const Matrix4 rho = random_density(rng);
    const double s1 = von_neumann_entropy(partial_trace(rho, 1).reduced);
    const double s2 = von_neumann_entropy(partial_trace(rho, 2).reduced);
    CHECK(von_neumann_entropy(rho) <= s1 + s2 + 1e-9);
  }
}

TEST_CASE("partial trace of reference states") {
  const QubitReduction m1 = partial_trace(DensityMatrix::maximally_mixed().matrix(), 1);
  CHECK((m1.reduced - 0.5 * Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(m1.bloch.norm() < 1e-15);

  // x1 = .5, x8 = .3, x13 = .1, x16 = .1
  const double rz1 = 0.5 + 0.3 - 0.1 - 0.1;
  const double rz2 = 0.5 - 0.3 + 0.1 - 0.1;
  const Matrix4 rho = DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix();
  const QubitReduction q1 = partial_trace(rho, 1), q2 = partial_trace(rho, 2);
  CHECK((q1.bloch - Vector3(0, 0, rz1)).norm() < 1e-12);
  CHECK((q2.bloch - Vector3(0, 0, rz2)).norm() < 1e-12);
  CHECK_THROWS_AS(partial_trace(rho, 3), DomainError);
}

TEST_CASE("partial trace recovers product factors and Bloch vectors") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Matrix2 a = testing_support::random_qubit(rng);
    const Matrix2 b = testing_support::random_qubit(rng);
    const QubitReduction q1 = partial_trace(kron(a, b), 1);
    const QubitReduction q2 = partial_trace(kron(a, b), 2);
    CHECK((q1.reduced - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((q2.reduced - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((bloch_to_density(q1.bloch) - q1.reduced).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(q1.bloch.norm() <= 1.0 + 1e-10);
  }
}

TEST_CASE("purity, linear entropy and distance") {
  CHECK(purity(DensityMatrix::maximally_mixed().matrix()) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(linear_entropy(DensityMatrix::diagonal({1, 0, 0, 0}).matrix()) == 0.0);
  std::mt19937_64 rng(6);
  const Matrix4 rho = random_density(rng);
  CHECK(hs_distance(rho, rho) == 0.0);
  const Matrix4 a = DensityMatrix::diagonal({1, 0, 0, 0}).matrix();
  const Matrix4 b = DensityMatrix::diagonal({0, 1, 0, 0}).matrix();
  CHECK(hs_distance(a, b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("real coordinates") {
  const RealCoordinates x = real_coordinates(DensityMatrix::diagonal({0.4, 0.3, 0.2, 0.1}).matrix());
  RealCoordinates expected = RealCoordinates::Zero();
  expected[0] = 0.4;
  expected[7] = 0.3;
  expected[12] = 0.2;
  expected[15] = 0.1;
  CHECK((x - expected).cwiseAbs().maxCoeff() == 0.0);

  const RealCoordinates m = real_coordinates(DensityMatrix::maximally_mixed().matrix());
  CHECK(m[0] == 0.25);
  CHECK(m[7] == 0.25);
  CHECK(m[12] == 0.25);
  CHECK(m[15] == 0.25);

  Matrix4 rho = Matrix4::Zero();
  rho(0, 0) = 0.5;
  rho(3, 3) = 0.5;
  rho(0, 1) = Complex(0.1, 0.2);
  rho(1, 0) = std::conj(rho(0, 1));
  const RealCoordinates y = real_coordinates(rho);
  CHECK(y[1] == 0.1);
  CHECK(y[2] == 0.2);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Matrix4 r = random_density(rng);
    CHECK((from_real_coordinates(real_coordinates(r)).matrix() - r).cwiseAbs().maxCoeff() <= 1e-15);
  }

  RealCoordinates bad = expected;
  bad[0] += 0.1;
  CHECK_THROWS_AS(from_real_coordinates(bad), InvalidStateError);
}

TEST_CASE("eigenvalue floor treats tiny eigenvalues as zero") {
  Matrix4 rho = Matrix4::Zero();
  rho(0, 0) = 1.0 - 1e-15;
  rho(1, 1) = 1e-15;
  CHECK(von_neumann_entropy(rho) == doctest::Approx(0.0).epsilon(1e-13));
  const Matrix4 d = entropy_derivative(rho);
  CHECK(std::isfinite(d(1, 1).real()));
  CHECK(d(1, 1).real() == doctest::Approx(-std::log(kEigenvalueFloor) - 1.0));
}
