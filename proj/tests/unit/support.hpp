#pragma once

#include <random>

#include "qentropy/qcore.hpp"

namespace testing_support {

using qentropy::Complex;
using qentropy::Matrix4;

inline Matrix4 random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix4 a;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) a(i, k) = Complex(n(rng), n(rng));
  return a;
}

/// A A^dagger / Tr, optionally mixed with I/4 to keep it away from the boundary.
inline Matrix4 random_density(std::mt19937_64& rng, double mix = 0.0) {
  const Matrix4 a = random_complex(rng);
  Matrix4 rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - mix) * rho + mix * 0.25 * Matrix4::Identity();
  return 0.5 * (rho + rho.adjoint());
}

inline Matrix4 random_hermitian(std::mt19937_64& rng) {
  const Matrix4 a = random_complex(rng);
  return 0.5 * (a + a.adjoint());
}

inline Matrix4 random_unitary(std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix4> qr(random_complex(rng));
  return qr.householderQ();
}

inline qentropy::Matrix2 random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  qentropy::Matrix2 a;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) a(i, k) = Complex(n(rng), n(rng));
  qentropy::Matrix2 r = a * a.adjoint();
  return r / r.trace().real();
}

}  // namespace testing_support
