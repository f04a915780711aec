#include "qentropy/controls.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qentropy/errors.hpp"

namespace qentropy {

void ControlBounds::validate() const {
  if (!(u_max > 0.0)) throw DomainError("u_max must be positive");
  if (!(n_max > 0.0)) throw DomainError("n_max must be positive");
}

ControlValue ControlBounds::clamp(const ControlValue& c) const {
  return {std::clamp(c.u, -u_max, u_max), std::clamp(c.n1, 0.0, n_max), std::clamp(c.n2, 0.0, n_max)};
}

ControlSet::ControlSet(double T, int M, ControlBounds bounds, double support_fraction)
    : T_(T), M_(M), support_(support_fraction), bounds_(bounds) {
  if (!(T > 0.0)) throw DomainError("control horizon T must be positive");
  if (M < 1) throw DomainError("control grid needs at least one subinterval");
  if (!(support_fraction > 0.0 && support_fraction <= 1.0)) throw DomainError("support fraction must lie in (0, 1]");
  bounds_.validate();
  u_ = Eigen::VectorXd::Zero(M + 1);
  n1_ = Eigen::VectorXd::Zero(M + 1);
  n2_ = Eigen::VectorXd::Zero(M + 1);
}

ControlSet ControlSet::constant(double T, int M, ControlBounds bounds, ControlValue value) {
  ControlSet c(T, M, bounds);
  const ControlValue v = bounds.clamp(value);
  c.u_.setConstant(v.u);
  c.n1_.setConstant(v.n1);
  c.n2_.setConstant(v.n2);
  return c;
}

ControlValue ControlSet::evaluate(double t) const {
  const double dt = node_spacing();
  const double end = support_ * T_;
  if (support_ < 1.0 && t > end * (1.0 + 1e-12)) return {};
  const double x = std::clamp(t / dt, 0.0, static_cast<double>(M_));
  Eigen::Index s = static_cast<Eigen::Index>(std::floor(x));
  if (s >= M_) s = M_ - 1;
  const double w = x - static_cast<double>(s);
  if (w == 0.0) return {u_[s], n1_[s], n2_[s]};
  auto lerp = [&](const Eigen::VectorXd& v) { return v[s] + w * (v[s + 1] - v[s]); };
  return {lerp(u_), lerp(n1_), lerp(n2_)};
}

Eigen::VectorXd ControlSet::stacked() const {
  Eigen::VectorXd v(3 * nodes());
  v << u_, n1_, n2_;
  return v;
}

void ControlSet::set_stacked(const Eigen::VectorXd& v) {
  if (v.size() != 3 * nodes()) throw DomainError("stacked control vector has wrong length");
  u_ = v.segment(0, nodes());
  n1_ = v.segment(nodes(), nodes());
  n2_ = v.segment(2 * nodes(), nodes());
}

bool ControlSet::admissible() const {
  return u_.cwiseAbs().maxCoeff() <= bounds_.u_max && n1_.minCoeff() >= 0.0 && n2_.minCoeff() >= 0.0 &&
         n1_.maxCoeff() <= bounds_.n_max && n2_.maxCoeff() <= bounds_.n_max;
}

ControlSet ControlSet::with_horizon(double T) const {
  ControlSet c(T, M_, bounds_, support_);
  c.u_ = u_;
  c.n1_ = n1_;
  c.n2_ = n2_;
  return c;
}

ControlSet project_box(const Eigen::VectorXd& u, const Eigen::VectorXd& n1, const Eigen::VectorXd& n2, double T,
                       const ControlBounds& bounds, double support_fraction) {
  if (u.size() != n1.size() || u.size() != n2.size()) throw DomainError("control sequences differ in length");
  if (u.size() < 2) throw DomainError("control sequences need at least two nodes");
  ControlSet c(T, static_cast<int>(u.size() - 1), bounds, support_fraction);
  c.u() = u.cwiseMax(-bounds.u_max).cwiseMin(bounds.u_max);
  c.n1() = n1.cwiseMax(0.0).cwiseMin(bounds.n_max);
  c.n2() = n2.cwiseMax(0.0).cwiseMin(bounds.n_max);
  return c;
}

ControlSet project_box(const ControlSet& raw) {
  return project_box(raw.u(), raw.n1(), raw.n2(), raw.horizon(), raw.bounds(), raw.support_fraction());
}

void RegularizationSpec::validate() const {
  if (!(gamma_u >= 0.0) || !(gamma_n >= 0.0)) throw DomainError("regularization coefficients must be nonnegative");
  if (!(delta_n[0] > 0.0) || !(delta_n[1] > 0.0)) throw DomainError("jump bounds must be positive");
}

double regularization_integral(const ControlSet& c, const RegularizationSpec& spec, long steps) {
  if (steps < 1) throw DomainError("regularization_integral: steps must be positive");
  if (spec.gamma_u == 0.0 && spec.gamma_n == 0.0) return 0.0;
  const double h = c.horizon() / static_cast<double>(steps);
  double acc = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const ControlValue v = c.evaluate(static_cast<double>(k) * h);
    const double f = spec.gamma_u * v.u * v.u + spec.gamma_n * (v.n1 + v.n2);
    acc += (k == 0 || k == steps) ? 0.5 * f : f;
  }
  return acc * h;
}

double regularization_supnorm(const ControlSet& c, const RegularizationSpec& spec) {
  return spec.gamma_u * c.u().cwiseAbs().maxCoeff() + spec.gamma_n * (c.n1().maxCoeff() + c.n2().maxCoeff());
}

double jump_violation(const ControlSet& c, const RegularizationSpec& spec) {
  double total = 0.0;
  const std::array<const Eigen::VectorXd*, 2> n{&c.n1(), &c.n2()};
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd& v = *n[j];
    double worst = 0.0;
    for (Eigen::Index s = 0; s + 1 < v.size(); ++s) worst = std::max(worst, std::abs(v[s + 1] - v[s]) - spec.delta_n[j]);
    total += worst;
  }
  return total;
}

double regularization_jumps(const ControlSet& c, const RegularizationSpec& spec) {
  return spec.gamma_u * c.u().cwiseAbs().maxCoeff() + spec.gamma_n * jump_violation(c, spec);
}

std::size_t ParameterLayout::size() const {
  const std::size_t per = static_cast<std::size_t>(M + 1);
  return (coherent_only ? per : 3 * per) + (free_horizon ? 1 : 0);
}

Eigen::VectorXd ParameterLayout::lower() const {
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  lo.head(M + 1).setConstant(-bounds.u_max);
  if (free_horizon) lo[lo.size() - 1] = free_horizon->first;
  return lo;
}

Eigen::VectorXd ParameterLayout::upper() const {
  Eigen::VectorXd hi(static_cast<Eigen::Index>(size()));
  hi.head(M + 1).setConstant(bounds.u_max);
  if (!coherent_only) hi.segment(M + 1, 2 * (M + 1)).setConstant(bounds.n_max);
  if (free_horizon) hi[hi.size() - 1] = free_horizon->second;
  return hi;
}

Eigen::VectorXd ga_encode(const ControlSet& c, const ParameterLayout& layout) {
  if (c.subintervals() != layout.M) throw DomainError("ga_encode: control grid does not match layout");
  Eigen::VectorXd a(static_cast<Eigen::Index>(layout.size()));
  const Eigen::Index n = c.nodes();
  a.head(n) = c.u();
  if (!layout.coherent_only) {
    a.segment(n, n) = c.n1();
    a.segment(2 * n, n) = c.n2();
  }
  if (layout.free_horizon) a[a.size() - 1] = c.horizon();
  return a;
}

ControlSet ga_decode(const Eigen::VectorXd& a, const ParameterLayout& layout) {
  if (static_cast<std::size_t>(a.size()) != layout.size()) throw DomainError("ga_decode: parameter vector has wrong length");
  const Eigen::VectorXd x = a.cwiseMax(layout.lower()).cwiseMin(layout.upper());
  const double T = layout.free_horizon ? x[x.size() - 1] : layout.T;
  ControlSet c(T, layout.M, layout.bounds, layout.support_fraction);
  const Eigen::Index n = c.nodes();
  c.u() = x.head(n);
  if (!layout.coherent_only) {
    c.n1() = x.segment(n, n);
    c.n2() = x.segment(2 * n, n);
  }
  return c;
}

void write_controls_csv(std::ostream& os, const ControlSet& c) {
  const auto old = os.precision(17);
  os << "t,u,n1,n2\n";
  for (Eigen::Index s = 0; s < c.nodes(); ++s)
    os << c.node_time(s) << ',' << c.u()[s] << ',' << c.n1()[s] << ',' << c.n2()[s] << '\n';
  os.precision(old);
}

nlohmann::json controls_to_json(const ControlSet& c) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"T", c.horizon()},
          {"M", c.subintervals()},
          {"support_fraction", c.support_fraction()},
          {"bounds", {{"u_max", c.bounds().u_max}, {"n_max", c.bounds().n_max}}},
          {"u", vec(c.u())},
          {"n1", vec(c.n1())},
          {"n2", vec(c.n2())}};
}

ControlSet controls_from_json(const nlohmann::json& j) {
  ControlBounds b{j.at("bounds").at("u_max").get<double>(), j.at("bounds").at("n_max").get<double>()};
  auto vec = [&](const char* key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  ControlSet c = project_box(vec("u"), vec("n1"), vec("n2"), j.at("T").get<double>(), b,
                             j.value("support_fraction", 1.0));
  if (c.subintervals() != j.at("M").get<int>()) throw DomainError("controls JSON: M does not match sample count");
  return c;
}

}  // namespace qentropy
