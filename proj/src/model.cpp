#include "qentropy/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qentropy/errors.hpp"

namespace qentropy {

namespace {

constexpr double kRealityTol = 1e-9;

Matrix4 commutator(const Matrix4& a, const Matrix4& b) { return a * b - b * a; }
Matrix4 anticommutator(const Matrix4& a, const Matrix4& b) { return a * b + b * a; }

void require_nonnegative_n(const ControlValue& c) {
  if (c.n1 < 0.0 || c.n2 < 0.0) throw DomainError("incoherent controls must be nonnegative");
}

double real_checked(Complex z, const char* what) {
  if (std::abs(z.imag()) > kRealityTol) {
    std::ostringstream os;
    os << what << " has imaginary residue " << z.imag();
    throw NumericalConsistencyError(os.str());
  }
  return z.real();
}

}  // namespace

ModelParameters ModelParameters::reference() {
  using std::numbers::pi;
  ModelParameters p;
  p.epsilon = 0.1;
  p.omega = {1.0, 0.5};
  p.lamb_shift = {0.3, 0.5};
  p.dissipation = {0.2, 0.6};
  p.phi = {pi / 4, pi / 3};
  p.theta = {pi / 3, pi / 4};
  return p;
}

void ModelParameters::validate() const {
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  for (int j = 0; j < 2; ++j) {
    if (!(omega[j] > 0.0)) throw DomainError("omega must be positive");
    if (!(lamb_shift[j] > 0.0)) throw DomainError("lamb_shift must be positive");
    if (!(dissipation[j] > 0.0)) throw DomainError("dissipation must be positive");
    if (!std::isfinite(theta[j]) || !std::isfinite(phi[j])) throw DomainError("angles must be finite");
  }
}

Vector3 control_direction(double theta, double phi) {
  return Vector3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

StaticOperators build_operators(const ModelParameters& p) {
  StaticOperators ops;
  const Matrix2& I = identity2();
  ops.W[0] = kron(sigma_z(), I);
  ops.W[1] = kron(I, sigma_z());
  ops.H_S = 0.5 * p.omega[0] * ops.W[0] + 0.5 * p.omega[1] * ops.W[1];
  for (int j = 0; j < 2; ++j) {
    const Vector3 l = control_direction(p.theta[j], p.phi[j]);
    ops.Q[j] = l.x() * sigma_x() + l.y() * sigma_y() + l.z() * sigma_z();
  }
  ops.V = kron(ops.Q[0], I) + kron(I, ops.Q[1]);

  const Matrix2 sp = (Matrix2() << 0, 0, 1, 0).finished();
  const Matrix2 sm = (Matrix2() << 0, 1, 0, 0).finished();
  ops.sigma_plus = {kron(sp, I), kron(I, sp)};
  ops.sigma_minus = {kron(sm, I), kron(I, sm)};
  return ops;
}

VecState vectorize(const Matrix4& m) { return Eigen::Map<const VecState>(m.data()); }

Matrix4 unvectorize(const VecState& v) { return Eigen::Map<const Matrix4>(v.data()); }

TwoQubitModel::TwoQubitModel(const ModelParameters& p) : p_(p), ops_(build_operators(p)) {
  p_.validate();
  for (int j = 0; j < 2; ++j) {
    pm_[j] = ops_.sigma_plus[j] * ops_.sigma_minus[j];
    mp_[j] = ops_.sigma_minus[j] * ops_.sigma_plus[j];
  }
  // Columns of each block are the images of the matrix units E_kl.
  const ControlValue zero{};
  for (int col = 0; col < 16; ++col) {
    VecState e = VecState::Zero();
    e[col] = 1.0;
    const Matrix4 E = unvectorize(e);
    const Matrix4 base = liouvillian_apply(E, zero);
    L0_.col(col) = vectorize(base);
    Lu_.col(col) = vectorize(liouvillian_apply(E, {1.0, 0.0, 0.0}) - base);
    Ln_[0].col(col) = vectorize(liouvillian_apply(E, {0.0, 1.0, 0.0}) - base);
    Ln_[1].col(col) = vectorize(liouvillian_apply(E, {0.0, 0.0, 1.0}) - base);
  }
}

Matrix4 TwoQubitModel::hamiltonian(const ControlValue& c) const {
  return ops_.H_S + p_.epsilon * (p_.lamb_shift[0] * c.n1 * ops_.W[0] + p_.lamb_shift[1] * c.n2 * ops_.W[1]) +
         c.u * ops_.V;
}

Matrix4 TwoQubitModel::dissipator(const Matrix4& rho, const ControlValue& c) const {
  const std::array<double, 2> n{c.n1, c.n2};
  Matrix4 out = Matrix4::Zero();
  for (int j = 0; j < 2; ++j) {
    const Matrix4& sp = ops_.sigma_plus[j];
    const Matrix4& sm = ops_.sigma_minus[j];
    const double om = p_.dissipation[j];
    out += om * (n[j] + 1.0) * (2.0 * sm * rho * sp - pm_[j] * rho - rho * pm_[j]);
    out += om * n[j] * (2.0 * sp * rho * sm - mp_[j] * rho - rho * mp_[j]);
  }
  return out;
}

Matrix4 TwoQubitModel::adjoint_dissipator(const Matrix4& chi, const ControlValue& c) const {
  const std::array<double, 2> n{c.n1, c.n2};
  Matrix4 out = Matrix4::Zero();
  for (int j = 0; j < 2; ++j) {
    const Matrix4& sp = ops_.sigma_plus[j];
    const Matrix4& sm = ops_.sigma_minus[j];
    const double om = p_.dissipation[j];
    out += om * (n[j] + 1.0) * (2.0 * sp * chi * sm - anticommutator(pm_[j], chi));
    out += om * n[j] * (2.0 * sm * chi * sp - anticommutator(mp_[j], chi));
  }
  return out;
}

Matrix4 TwoQubitModel::liouvillian_apply(const Matrix4& rho, const ControlValue& c) const {
  require_nonnegative_n(c);
  const Complex minus_i(0.0, -1.0);
  return minus_i * commutator(hamiltonian(c), rho) + p_.epsilon * dissipator(rho, c);
}

Matrix4 TwoQubitModel::adjoint_liouvillian_apply(const Matrix4& chi, const ControlValue& c) const {
  require_nonnegative_n(c);
  const Complex plus_i(0.0, 1.0);
  return plus_i * commutator(hamiltonian(c), chi) + p_.epsilon * adjoint_dissipator(chi, c);
}

SwitchingValues TwoQubitModel::switching_functions(const Matrix4& chi, const Matrix4& rho) const {
  const Complex minus_i(0.0, -1.0);
  SwitchingValues k;
  k.ku = real_checked(hs_inner_complex(chi, minus_i * commutator(ops_.V, rho)), "K^u");
  std::array<double, 2> kn{};
  for (int j = 0; j < 2; ++j) {
    const Matrix4& sp = ops_.sigma_plus[j];
    const Matrix4& sm = ops_.sigma_minus[j];
    // The Lamb-shift term enters H_c with the eps prefactor, so its n_j-derivative carries eps too.
    const Matrix4 d = minus_i * commutator(p_.epsilon * p_.lamb_shift[j] * ops_.W[j], rho) +
                      p_.epsilon * p_.dissipation[j] * (2.0 * sm * rho * sp + 2.0 * sp * rho * sm - 2.0 * rho);
    kn[j] = real_checked(hs_inner_complex(chi, d), "K^n");
  }
  k.kn1 = kn[0];
  k.kn2 = kn[1];
  return k;
}

Superoperator TwoQubitModel::generator(const ControlValue& c) const {
  require_nonnegative_n(c);
  return L0_ + c.u * Lu_ + c.n1 * Ln_[0] + c.n2 * Ln_[1];
}

SwitchingValues TwoQubitModel::switching_functions_vec(const VecState& chi, const VecState& rho) const {
  SwitchingValues k;
  k.ku = chi.dot(Lu_ * rho).real();
  k.kn1 = chi.dot(Ln_[0] * rho).real();
  k.kn2 = chi.dot(Ln_[1] * rho).real();
  return k;
}

DensityMatrix zero_control_solution(const ModelParameters& p, const std::array<double, 4>& a, double t) {
  double sum = 0.0;
  for (double v : a) {
    if (!(v >= 0.0)) throw DomainError("zero_control_solution: initial populations must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTraceTol) throw DomainError("zero_control_solution: populations must sum to 1");
  if (!(t >= 0.0)) throw DomainError("zero_control_solution: t must be >= 0");

  const double e1 = std::exp(-2.0 * p.epsilon * p.dissipation[0] * t);
  const double e2 = std::exp(-2.0 * p.epsilon * p.dissipation[1] * t);
  const auto [a1, a2, a3, a4] = a;
  // Products of per-qubit relaxation factors; algebraically identical to the expanded closed form.
  const double x16 = a4 * e1 * e2;
  const double x8 = e2 * (a2 + a4 - a4 * e1);
  const double x13 = e1 * (a3 + a4 - a4 * e2);
  const double x1 = a1 + a2 - a2 * e2 + (1.0 - e1) * (a3 + a4 * (1.0 - e2));
  return DensityMatrix::diagonal({x1, x8, x13, x16});
}

}  // namespace qentropy
