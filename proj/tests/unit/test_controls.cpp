#include <doctest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qentropy/controls.hpp"
#include "qentropy/errors.hpp"

using namespace qentropy;

namespace {

Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST_CASE("box projection") {
  Eigen::VectorXd u(3), n1(3), n2(3);
  u << 35.0, -31.0, 2.5;
  n1 << -0.2, 4.0, 12.0;
  n2 << 0.0, 10.0, 3.0;
  const ControlSet c = project_box(u, n1, n2, 5.0, ControlBounds{30.0, 10.0});
  CHECK(c.u()[0] == 30.0);
  CHECK(c.u()[1] == -30.0);
  CHECK(c.u()[2] == 2.5);
  CHECK(c.n1()[0] == 0.0);
  CHECK(c.n1()[1] == 4.0);
  CHECK(c.n1()[2] == 10.0);
  CHECK(c.n2() == n2);
  CHECK(c.admissible());
  CHECK_THROWS_AS(project_box(u, n1.head(2), n2, 5.0, ControlBounds{}), DomainError);
}

TEST_CASE("projection is idempotent and non-expansive in the sup norm") {
  std::mt19937_64 rng(31);
  const ControlBounds b{3.0, 2.0};
  for (int i = 0; i < 500; ++i) {
    const Eigen::Index n = 6;
    const ControlSet a = project_box(uniform(rng, n, -6, 6), uniform(rng, n, -3, 5), uniform(rng, n, -3, 5), 1.0, b);
    const ControlSet c = project_box(uniform(rng, n, -6, 6), uniform(rng, n, -3, 5), uniform(rng, n, -3, 5), 1.0, b);
    const ControlSet aa = project_box(a);
    CHECK(aa.stacked() == a.stacked());
    ControlSet ra = a, rc = c;
    const Eigen::VectorXd xa = uniform(rng, 3 * n, -8, 8), xc = uniform(rng, 3 * n, -8, 8);
    ra.set_stacked(xa);
    rc.set_stacked(xc);
    const double before = (xa - xc).cwiseAbs().maxCoeff();
    const double after = (project_box(ra).stacked() - project_box(rc).stacked()).cwiseAbs().maxCoeff();
    CHECK(after <= before + 1e-15);
  }
}

TEST_CASE("piecewise-linear evaluation") {
  ControlSet c(4.0, 4, ControlBounds{});
  c.u() << 0.0, 1.0, 3.0, -1.0, 2.0;
  c.n1() << 0.0, 0.5, 0.5, 0.0, 1.0;
  for (Eigen::Index s = 0; s < c.nodes(); ++s) {
    CHECK(c.evaluate(c.node_time(s)).u == c.u()[s]);
    CHECK(c.evaluate(c.node_time(s)).n1 == c.n1()[s]);
  }
  CHECK(c.evaluate(1.5).u == doctest::Approx(2.0));
  CHECK(c.evaluate(2.25).u == doctest::Approx(2.0));
  CHECK(c.evaluate(3.5).n1 == doctest::Approx(0.5));

  ControlSet r(10.0, 2, ControlBounds{}, 0.3);
  r.u() << 1.0, 2.0, 3.0;
  CHECK(r.node_time(2) == doctest::Approx(3.0));
  CHECK(r.evaluate(1.5).u == doctest::Approx(2.0));
  CHECK(r.evaluate(3.0).u == doctest::Approx(3.0));
  CHECK(r.evaluate(3.5).u == 0.0);
  CHECK(r.evaluate(9.0).u == 0.0);
}

TEST_CASE("GA parameter vectors") {
  const ParameterLayout keep{10, 5.0, ControlBounds{4.0, 4.0}, false, 1.0, std::nullopt};
  CHECK(keep.size() == 33);
  const ControlSet zero(5.0, 10, ControlBounds{4.0, 4.0});
  CHECK(ga_encode(zero, keep).isZero(0.0));

  ParameterLayout free{20, 40.0, ControlBounds{4.0, 10.0}, true, 0.3, std::make_pair(38.0, 40.0)};
  CHECK(free.size() == 22);
  CHECK(free.lower()[21] == 38.0);
  CHECK(free.upper()[21] == 40.0);
  CHECK(free.lower()[0] == -4.0);

  std::mt19937_64 rng(32);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd a = keep.lower() + (keep.upper() - keep.lower()).cwiseProduct(uniform(rng, 33, 0.0, 1.0));
    CHECK(ga_encode(ga_decode(a, keep), keep) == a);
    Eigen::VectorXd f = free.lower() + (free.upper() - free.lower()).cwiseProduct(uniform(rng, 22, 0.0, 1.0));
    const ControlSet c = ga_decode(f, free);
    CHECK(c.horizon() == f[21]);
    CHECK(c.n1().isZero(0.0));
    CHECK(ga_encode(c, free) == f);
  }

  Eigen::VectorXd out = Eigen::VectorXd::Constant(33, 9.0);
  const ControlSet clamped = ga_decode(out, keep);
  CHECK(clamped.u().maxCoeff() == 4.0);
  CHECK(clamped.admissible());
  CHECK_THROWS_AS(ga_decode(Eigen::VectorXd::Zero(32), keep), DomainError);
}

TEST_CASE("integral regularization") {
  RegularizationSpec spec;
  spec.mode = RegularizationMode::Integral;
  spec.gamma_u = 1.0;
  spec.gamma_n = 0.5;
  CHECK(regularization_integral(ControlSet(5.0, 10, ControlBounds{}), spec, 1000) == 0.0);

  const ControlSet ones = ControlSet::constant(5.0, 10, ControlBounds{}, {1.0, 0.0, 0.0});
  CHECK(regularization_integral(ones, spec, 1000) == doctest::Approx(5.0).epsilon(1e-14));

  const ControlSet n = ControlSet::constant(5.0, 10, ControlBounds{}, {0.0, 2.0, 1.0});
  CHECK(regularization_integral(n, spec, 1000) == doctest::Approx(0.5 * 3.0 * 5.0).epsilon(1e-14));

  // u(t) = t on [0, 2]: int t^2 = 8/3 up to the trapezoid error h^2 T^3 / 6... for the quadratic
  ControlSet ramp(2.0, 2, ControlBounds{});
  ramp.u() << 0.0, 1.0, 2.0;
  CHECK(regularization_integral(ramp, spec, 2000) == doctest::Approx(8.0 / 3.0).epsilon(1e-6));

  RegularizationSpec none;
  CHECK(regularization_integral(ones, none, 100) == 0.0);
}

TEST_CASE("sup-norm and jump regularizations") {
  RegularizationSpec spec;
  spec.gamma_u = 0.1;
  spec.gamma_n = 0.01;
  spec.delta_n = {1.0, 1.0};
  ControlSet c(5.0, 4, ControlBounds{4.0, 4.0});
  c.n1() << 0.0, 2.0, 0.0, 0.0, 0.0;
  CHECK(regularization_jumps(c, spec) == doctest::Approx(0.01 * (2.0 - 1.0)));
  CHECK(jump_violation(c, spec) == doctest::Approx(1.0));

  c.n1() << 0.0, 0.5, 1.0, 0.2, 0.0;
  CHECK(jump_violation(c, spec) == 0.0);
  CHECK(regularization_jumps(c, spec) == 0.0);

  c.u() << 0.0, -3.0, 1.0, 0.0, 0.0;
  CHECK(regularization_jumps(c, spec) == doctest::Approx(0.3));
  CHECK(regularization_supnorm(c, spec) == doctest::Approx(0.1 * 3.0 + 0.01 * 1.0));

  ControlSet zero(5.0, 4, ControlBounds{});
  CHECK(regularization_supnorm(zero, spec) == 0.0);
}

TEST_CASE("control serialization") {
  ControlSet c(2.0, 2, ControlBounds{5.0, 3.0});
  c.u() << 0.1, -0.2, 0.3;
  c.n2() << 1.0, 2.0, 3.0;
  std::ostringstream os;
  write_controls_csv(os, c);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,u,n1,n2\n", 0) == 0);
  CHECK(csv.find("1,-0.20000000000000001,0,2\n") != std::string::npos);

  const nlohmann::json j = controls_to_json(c);
  const ControlSet back = controls_from_json(j);
  CHECK(back.stacked() == c.stacked());
  CHECK(back.horizon() == 2.0);
  CHECK(back.bounds().n_max == 3.0);
}

TEST_CASE("bounds validation") {
  CHECK_THROWS_AS(ControlBounds({0.0, 1.0}).validate(), DomainError);
  CHECK_THROWS_AS(ControlSet(0.0, 4, ControlBounds{}), DomainError);
  CHECK_THROWS_AS(ControlSet(1.0, 0, ControlBounds{}), DomainError);
  const ControlValue v = ControlBounds{2.0, 1.0}.clamp({5.0, -1.0, 3.0});
  CHECK(v.u == 2.0);
  CHECK(v.n1 == 0.0);
  CHECK(v.n2 == 1.0);
}
