#include <doctest.h>

#include <cmath>

#include "qentropy/errors.hpp"
#include "qentropy/gradient.hpp"
#include "support.hpp"

using namespace qentropy;

namespace {

ControlProblem problem(ObjectiveKind kind, const Matrix4& rho0, long steps) {
  ControlProblem p{TwoQubitModel(ModelParameters::reference()), rho0, ObjectiveSpec{}, steps};
  p.objective.kind = kind;
  p.objective.S_ref = von_neumann_entropy(rho0);
  p.objective.S_tar = 0.4;
  p.objective.S_bar = 1.0;
  p.objective.P = kind == ObjectiveKind::J4 ? 0.5 : 0.1;
  return p;
}

ControlSet random_controls(std::mt19937_64& rng, double T, int M) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), n(0.2, 1.5);
  ControlSet c(T, M, ControlBounds{});
  for (Eigen::Index s = 0; s < c.nodes(); ++s) c.u()[s] = u(rng), c.n1()[s] = n(rng), c.n2()[s] = n(rng);
  return c;
}

double relative(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(61);
  for (ObjectiveKind kind : {ObjectiveKind::J1, ObjectiveKind::J3, ObjectiveKind::J4}) {
    for (int i = 0; i < 2; ++i) {
      const Matrix4 rho0 = testing_support::random_density(rng, 0.3);
      const ControlProblem p = problem(kind, rho0, 400);
      const ControlSet c = random_controls(rng, 2.0, 4);
      const GradientResult g = assemble_gradient(p, c);
      const Eigen::VectorXd fd = fd_gradient_oracle(p, c, 1e-5);
      INFO(to_string(kind));
      CHECK(relative(hat_pairing(g.field, c), fd) < 1e-3);
      CHECK(g.value.value == doctest::Approx(evaluate_objective(p, c).value).epsilon(1e-14));
    }
  }
}

TEST_CASE("integral regularization adds 2 gamma_u u and gamma_n") {
  std::mt19937_64 rng(62);
  const Matrix4 rho0 = testing_support::random_density(rng, 0.3);
  ControlProblem p = problem(ObjectiveKind::J3, rho0, 400);
  const ControlSet c = random_controls(rng, 2.0, 4);
  const GradientResult plain = assemble_gradient(p, c);
  p.objective.reg.mode = RegularizationMode::Integral;
  p.objective.reg.gamma_u = 0.3;
  p.objective.reg.gamma_n = 0.07;
  const GradientResult reg = assemble_gradient(p, c);
  CHECK((reg.field.u - plain.field.u - 0.6 * c.u()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(((reg.field.n1 - plain.field.n1).array() - 0.07).abs().maxCoeff() < 1e-12);
  CHECK(((reg.field.n2 - plain.field.n2).array() - 0.07).abs().maxCoeff() < 1e-12);
  CHECK(relative(hat_pairing(reg.field, c), fd_gradient_oracle(p, c, 1e-5)) < 1e-3);
}

TEST_CASE("coherent switching function vanishes on diagonal dynamics") {
  // zero controls from a diagonal state keep rho and chi diagonal, so <chi, -i[V, rho]> = 0
  const Matrix4 rho0 = DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix();
  const ControlProblem p = problem(ObjectiveKind::J1, rho0, 2000);
  const ControlSet zero(50.0, 20, ControlBounds{});
  const GradientResult g = assemble_gradient(p, zero);
  CHECK(g.field.dense.col(0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.field.n1.cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("transversality and penalty source are entropy derivatives") {
  std::mt19937_64 rng(63);
  int checked = 0;
  while (checked < 500) {
    const Matrix4 rho = testing_support::random_density(rng, 0.2);
    if (eigenvalues(rho).minCoeff() < 1e-3) continue;
    Matrix4 e = testing_support::random_hermitian(rng);
    e -= e.trace() / 4.0 * Matrix4::Identity();
    e /= e.norm();
    const double h = 1e-6;
    const double Sp = von_neumann_entropy(Matrix4(rho + h * e)), Sm = von_neumann_entropy(Matrix4(rho - h * e));
    for (ObjectiveKind kind : {ObjectiveKind::J1, ObjectiveKind::J3, ObjectiveKind::J4}) {
      ObjectiveSpec spec;
      spec.kind = kind;
      spec.S_ref = 0.9;
      spec.S_tar = 0.4;
      spec.S_bar = 0.8;
      const double fF = (terminal_F(Sp, spec) - terminal_F(Sm, spec)) / (2 * h);
      const double fg = (running_g(Sp, spec) - running_g(Sm, spec)) / (2 * h);
      CHECK(std::abs(-hs_inner(transversality(kind, rho, spec), e) - fF) < 1e-5);
      CHECK(std::abs(hs_inner(penalty_source(kind, rho, spec), e) - fg) < 1e-5);
    }
    ++checked;
  }
}

TEST_CASE("PMP residual") {
  ControlSet c(1.0, 2, ControlBounds{4.0, 4.0});
  c.u() << 4.0, 0.0, -4.0;
  c.n1() << 0.0, 1.0, 4.0;
  GradientField g;
  g.u = Eigen::VectorXd::Zero(3);
  g.n1 = Eigen::VectorXd::Zero(3);
  g.n2 = Eigen::VectorXd::Zero(3);
  CHECK(pmp_residual(c, g, 1.0) == 0.0);

  // pushing against active bounds is stationary
  g.u << -1.0, 0.0, 1.0;
  g.n1 << 2.0, 0.0, -3.0;
  g.n2 << 5.0, 5.0, 5.0;
  CHECK(pmp_residual(c, g, 1.0) == 0.0);

  g.u[1] = 1.0;
  CHECK(pmp_residual(c, g, 0.5) == 0.5);
  g.n1[1] = -10.0;
  CHECK(pmp_residual(c, g, 1.0) == 3.0);
  CHECK_THROWS_AS(pmp_residual(c, g, 0.0), DomainError);
}

TEST_CASE("hat pairing of a constant field") {
  ControlSet c(3.0, 3, ControlBounds{});
  GradientField f;
  f.T = 3.0;
  f.steps = 300;
  f.dense = Eigen::MatrixXd::Ones(301, 3);
  const Eigen::VectorXd pair = hat_pairing(f, c);
  // integral of each hat: dt/2 at the ends, dt inside
  CHECK(pair[0] == doctest::Approx(0.5));
  CHECK(pair[1] == doctest::Approx(1.0));
  CHECK(pair[3] == doctest::Approx(0.5));
  CHECK(pair.sum() == doctest::Approx(9.0));
}
