#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "qentropy/errors.hpp"
#include "qentropy/scenario.hpp"

namespace qentropy {

namespace fs = std::filesystem;

double simulate_free_evolution(const SimulateOptions& opts, std::ostream& csv) {
  if (!(opts.horizon > 0.0)) throw DomainError("simulate: horizon must be positive");
  if (opts.steps < 1 || opts.stride < 1) throw DomainError("simulate: steps and stride must be positive");
  opts.model.validate();
  const TwoQubitModel model(opts.model);
  const Matrix4 rho0 = DensityMatrix::diagonal(opts.a).matrix();
  const ControlSet zero(opts.horizon, 1, ControlBounds{});
  const Trajectory traj = solve_forward(model, rho0, zero, opts.steps);

  const auto old = csv.precision(17);
  csv << "t,S,x1,x8,x13,x16,S_q1,S_q2,S_q1_plus_S_q2,S_exact,x1_exact,x8_exact,x13_exact,x16_exact,hs_error\n";
  double worst = 0.0;
  for (long k = 0; k <= traj.steps(); ++k) {
    const double t = traj.time(k);
    const Matrix4& rho = traj.state(k);
    const Matrix4 exact = zero_control_solution(opts.model, opts.a, t).matrix();
    const double err = hs_distance(rho, exact);
    worst = std::max(worst, err);
    if (k % opts.stride != 0 && k != traj.steps()) continue;
    const double s1 = von_neumann_entropy(partial_trace(rho, 1).reduced);
    const double s2 = von_neumann_entropy(partial_trace(rho, 2).reduced);
    csv << t << ',' << von_neumann_entropy(rho);
    for (int i = 0; i < 4; ++i) csv << ',' << rho(i, i).real();
    csv << ',' << s1 << ',' << s2 << ',' << s1 + s2 << ',' << von_neumann_entropy(exact);
    for (int i = 0; i < 4; ++i) csv << ',' << exact(i, i).real();
    csv << ',' << err << '\n';
  }
  csv.precision(old);
  return worst;
}

namespace {

Matrix4 random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix4 a;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) a(i, k) = Complex(n(rng), n(rng));
  return a;
}

Matrix4 random_density(std::mt19937_64& rng, double mix = 0.0) {
  const Matrix4 a = random_complex(rng);
  Matrix4 rho = a * a.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - mix) * rho + mix * 0.25 * Matrix4::Identity();
  return hermitian_part(rho);
}

Matrix4 random_hermitian(std::mt19937_64& rng) { return hermitian_part(random_complex(rng)); }

ControlValue random_control(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), n(0.0, 3.0);
  return {u(rng), n(rng), n(rng)};
}

CheckResult make(std::string name, double error, double tol) { return {std::move(name), error < tol, error, tol}; }

ControlSet random_controls(std::mt19937_64& rng, double T, int M) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), n(0.1, 1.0);
  ControlSet c(T, M, ControlBounds{});
  for (Eigen::Index s = 0; s < c.nodes(); ++s) {
    c.u()[s] = u(rng);
    c.n1()[s] = n(rng);
    c.n2()[s] = n(rng);
  }
  return c;
}

double gradient_error(ObjectiveKind kind, std::mt19937_64& rng) {
  const TwoQubitModel model(ModelParameters::reference());
  const Matrix4 rho0 = random_density(rng, 0.5);
  const double S0 = von_neumann_entropy(rho0);
  ObjectiveSpec spec;
  spec.kind = kind;
  spec.S_ref = S0;
  spec.S_tar = S0 - 0.3;
  spec.S_bar = S0 + 1e-3;
  spec.P = kind == ObjectiveKind::J4 ? 0.5 : 0.1;
  const ControlProblem problem{model, rho0, spec, 400};
  const ControlSet c = random_controls(rng, 2.0, 4);
  const GradientResult g = assemble_gradient(problem, c);
  const Eigen::VectorXd pair = hat_pairing(g.field, c);
  const Eigen::VectorXd fd = fd_gradient_oracle(problem, c, 1e-5);
  return (pair - fd).norm() / fd.norm();
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<CheckResult> out;
  const ModelParameters ref = ModelParameters::reference();
  const TwoQubitModel model(ref);

  {
    ModelParameters oracle = ref;
    if (opts.oracle_omega2) oracle.dissipation[1] = *opts.oracle_omega2;
    const std::array<double, 4> a{0.25, 0.25, 0.25, 0.25};
    const Trajectory traj = solve_forward(model, DensityMatrix::diagonal(a).matrix(), ControlSet(300.0, 1, {}), 30000);
    double err = 0.0;
    for (long k = 0; k <= traj.steps(); ++k)
      err = std::max(err, hs_distance(traj.state(k), zero_control_solution(oracle, a, traj.time(k)).matrix()));
    out.push_back(make("zero-control closed form, [0,300], h=0.01", err, 1e-6));
  }

  {
    const Matrix4 rho0 = DensityMatrix::diagonal({0.5, 0.3, 0.1, 0.1}).matrix();
    ModelParameters p = ref;
    p.epsilon = 0.0;
    const Trajectory traj = solve_forward(TwoQubitModel(p), rho0, ControlSet(5.0, 1, {}), 500);
    double err = 0.0;
    for (const Matrix4& rho : traj.states()) err = std::max(err, hs_distance(rho, rho0));
    out.push_back(make("fixed point at eps=0", err, 1e-10));
  }

  {
    double trace = 0.0, herm = 0.0, adj = 0.0;
    for (int i = 0; i < 500; ++i) {
      const Matrix4 rho = random_density(rng);
      const Matrix4 chi = random_hermitian(rng);
      const ControlValue c = random_control(rng);
      const Matrix4 l = model.liouvillian_apply(rho, c);
      trace = std::max(trace, std::abs(l.trace()));
      herm = std::max(herm, hermiticity_defect(l));
      adj = std::max(adj, std::abs(hs_inner_complex(chi, l) - hs_inner_complex(model.adjoint_liouvillian_apply(chi, c), rho)));
    }
    out.push_back(make("trace preservation", trace, 1e-12));
    out.push_back(make("hermiticity preservation", herm, 1e-12));
    out.push_back(make("adjointness <chi,L rho> = <L^+ chi,rho>", adj, 1e-11));
  }

  {
    double err = 0.0;
    const double h = 1e-3;
    for (int i = 0; i < 200; ++i) {
      const Matrix4 rho = random_density(rng);
      const Matrix4 chi = random_hermitian(rng);
      const ControlValue c = random_control(rng);
      const SwitchingValues k = model.switching_functions(chi, rho);
      auto pairing = [&](ControlValue v) { return hs_inner(chi, model.liouvillian_apply(rho, v)); };
      ControlValue a = c, b = c;
      a.u += h;
      b.u -= h;
      err = std::max(err, std::abs((pairing(a) - pairing(b)) / (2 * h) - k.ku));
      a = c, b = c;
      a.n1 += h;
      b.n1 = std::max(0.0, b.n1 - h);
      err = std::max(err, std::abs((pairing(a) - pairing(b)) / (a.n1 - b.n1) - k.kn1));
      a = c, b = c;
      a.n2 += h;
      b.n2 = std::max(0.0, b.n2 - h);
      err = std::max(err, std::abs((pairing(a) - pairing(b)) / (a.n2 - b.n2) - k.kn2));
    }
    out.push_back(make("switching functions vs directional derivatives", err, 1e-9));
  }

  {
    double err = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Matrix4 rho = random_density(rng, 0.2);
      Matrix4 e = random_hermitian(rng);
      e -= e.trace() / 4.0 * Matrix4::Identity();
      e /= e.norm();
      const double h = 1e-6;
      const double fd = (von_neumann_entropy(Matrix4(rho + h * e)) - von_neumann_entropy(Matrix4(rho - h * e))) / (2 * h);
      const double an = hs_inner(entropy_derivative(rho), e);
      err = std::max(err, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
    }
    out.push_back(make("entropy derivative vs central differences", err, 1e-5));
  }

  {
    const std::array<double, 4> a{0.25, 0.25, 0.25, 0.25};
    const Matrix4 rho0 = DensityMatrix::diagonal(a).matrix();
    auto error_at = [&](long steps) {
      const Trajectory traj = solve_forward(model, rho0, ControlSet(50.0, 1, {}), steps);
      double e = 0.0;
      for (long k = 0; k <= steps; ++k)
        e = std::max(e, hs_distance(traj.state(k), zero_control_solution(ref, a, traj.time(k)).matrix()));
      return e;
    };
    const double ratio = error_at(100) / error_at(200);
    CheckResult r{"RK4 error ratio under step halving in [8,32]", ratio >= 8.0 && ratio <= 32.0, ratio, 32.0};
    out.push_back(r);
  }

  for (ObjectiveKind kind : {ObjectiveKind::J1, ObjectiveKind::J3, ObjectiveKind::J4}) {
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, gradient_error(kind, rng));
    out.push_back(make("adjoint gradient vs finite differences (" + to_string(kind) + ")", err, 1e-3));
  }
  return out;
}

int verify(const VerifyOptions& opts, std::ostream& os) {
  const std::vector<CheckResult> checks = run_verification(opts);
  bool all = true;
  std::size_t width = 0;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  for (const auto& c : checks) {
    all = all && c.pass;
    os << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << c.name;
    if (opts.verbose) os << "  measured " << std::scientific << std::setprecision(3) << c.error << " (tol " << c.tolerance << ")" << std::defaultfloat;
    os << '\n';
  }
  os << (all ? "all checks passed" : "some checks failed") << '\n';
  return all ? 0 : 1;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("column " + name + " not found");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::optional<Table> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  Table t;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

void write_columns(const fs::path& p, const Table& t, const std::vector<std::string>& cols) {
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(t.column(c));
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << row.at(idx[i]);
    out << '\n';
  }
}

}  // namespace

int export_figures(const fs::path& run_dir, std::ostream& log) {
  if (!fs::is_directory(run_dir)) throw Error("not a directory: " + run_dir.string());
  const fs::path fig = run_dir / "figures";
  fs::create_directories(fig);
  nlohmann::json manifest = nlohmann::json::object();
  int written = 0;
  auto emit = [&](const std::string& file, const Table& t, const std::vector<std::string>& cols) {
    write_columns(fig / file, t, cols);
    manifest[file] = cols;
    log << "  wrote " << (fig / file).string() << '\n';
    ++written;
  };

  if (auto t = read_csv(run_dir / "trajectory.csv")) {
    // linear entropy is derived from purity
    Table ext = *t;
    ext.header.push_back("linear_entropy");
    const std::size_t pc = t->column("purity");
    for (auto& row : ext.rows) {
      std::ostringstream os;
      os.precision(17);
      os << 1.0 - std::stod(row.at(pc));
      row.push_back(os.str());
    }
    emit("entropy.csv", ext, {"t", "S", "S_q1", "S_q2", "linear_entropy"});
    emit("distances.csv", ext, {"t", "purity", "hs_rho0", "hs_mixed"});
    emit("bloch.csv", ext, {"t", "rz_q1", "rz_q2"});
  }
  if (auto t = read_csv(run_dir / "free_evolution.csv")) {
    emit("free_evolution_coordinates.csv", *t, {"t", "x1", "x8", "x13", "x16", "x1_exact", "x8_exact", "x13_exact", "x16_exact"});
    emit("free_evolution_entropy.csv", *t, {"t", "S", "S_exact", "S_q1", "S_q2", "S_q1_plus_S_q2"});
  }
  if (auto t = read_csv(run_dir / "controls.csv")) emit("controls.csv", *t, {"t", "u", "n1", "n2"});

  std::ifstream hist(run_dir / "history.jsonl");
  if (hist) {
    std::vector<nlohmann::json> records;
    std::string line;
    while (std::getline(hist, line))
      if (!line.empty()) records.push_back(nlohmann::json::parse(line));
    if (!records.empty()) {
      std::vector<std::string> cols;
      for (const char* key : {"k", "iteration", "value", "terminal", "integral", "reg", "residual", "terminal_term",
                              "integral_term", "reg_term"})
        if (records.front().contains(key)) cols.emplace_back(key);
      Table t;
      t.header = cols;
      for (const auto& r : records) {
        std::vector<std::string> row;
        for (const auto& c : cols) row.push_back(r.value(c, nlohmann::json()).dump());
        t.rows.push_back(row);
      }
      emit("convergence.csv", t, cols);
    }
  }
  if (written == 0) throw Error("no run outputs found in " + run_dir.string());
  std::ofstream(fig / "manifest.json") << manifest.dump(2) << '\n';
  return written;
}

}  // namespace qentropy
