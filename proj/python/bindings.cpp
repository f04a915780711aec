#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qentropy/errors.hpp"
#include "qentropy/scenario.hpp"

namespace py = pybind11;
using namespace qentropy;

namespace {

py::array_t<Complex> stack_states(const Trajectory& traj) {
  py::array_t<Complex> out({static_cast<py::ssize_t>(traj.size()), py::ssize_t{4}, py::ssize_t{4}});
  auto v = out.mutable_unchecked<3>();
  for (std::size_t k = 0; k < traj.size(); ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) v(k, i, j) = traj.states()[k](i, j);
  return out;
}

py::dict trajectory_dict(const Trajectory& traj) {
  std::vector<double> t(traj.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = traj.time(static_cast<long>(k));
  py::dict d;
  d["t"] = py::array(py::cast(t));
  d["states"] = stack_states(traj);
  d["entropy"] = py::array(py::cast(entropy_profile(traj)));
  return d;
}

py::dict value_dict(const ObjectiveValue& v) {
  py::dict d;
  d["value"] = v.value;
  d["terminal"] = v.terminal;
  d["integral"] = v.integral;
  d["integral_raw"] = v.integral_raw;
  d["reg"] = v.reg;
  return d;
}

ControlProblem make_problem(const ModelParameters& p, const Matrix4& rho0, ObjectiveSpec spec, long steps) {
  spec.S_ref = von_neumann_entropy(rho0);
  spec.validate();
  return ControlProblem{TwoQubitModel(p), rho0, spec, steps};
}

py::dict gpm_dict(const GPMResult& r) {
  py::list history;
  for (const IterationRecord& rec : r.history) {
    py::dict h;
    h["k"] = rec.k;
    h["value"] = rec.value;
    h["terminal"] = rec.terminal;
    h["integral"] = rec.integral;
    h["reg"] = rec.reg;
    h["residual"] = rec.residual;
    history.append(h);
  }
  py::dict d;
  d["controls"] = r.controls;
  d["history"] = history;
  d["final"] = value_dict(r.final_value);
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["stopped_by"] = r.stopped_by;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qentropy, m) {
  m.doc() = "Entropy control of an open two-qubit system";

  // translators run newest first, so the base class is registered first
  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InvalidStateError>(m, "InvalidStateError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  // qcore
  m.def("von_neumann_entropy", py::overload_cast<const Matrix4&>(&von_neumann_entropy), py::arg("rho"));
  m.def("entropy_derivative", &entropy_derivative, py::arg("rho"));
  m.def(
      "partial_trace",
      [](const Matrix4& rho, int keep) {
        const QubitReduction q = partial_trace(rho, keep);
        return py::make_tuple(q.reduced, q.bloch);
      },
      py::arg("rho"), py::arg("keep"), "reduced state of qubit `keep` (1 or 2) and its Bloch vector");
  m.def("purity", &purity);
  m.def("linear_entropy", &linear_entropy);
  m.def("hs_distance", &hs_distance);
  m.def("hs_inner", &hs_inner);
  m.def("diagonal_state", [](const std::array<double, 4>& p) { return DensityMatrix::diagonal(p).matrix(); });
  m.def("validate_state", [](const Matrix4& rho) { return DensityMatrix::from_matrix(rho).matrix(); });

  // model
  py::class_<ModelParameters>(m, "ModelParameters")
      .def(py::init<>())
      .def_static("reference", &ModelParameters::reference)
      .def_readwrite("epsilon", &ModelParameters::epsilon)
      .def_readwrite("omega", &ModelParameters::omega)
      .def_readwrite("lamb_shift", &ModelParameters::lamb_shift)
      .def_readwrite("dissipation", &ModelParameters::dissipation)
      .def_readwrite("theta", &ModelParameters::theta)
      .def_readwrite("phi", &ModelParameters::phi)
      .def("validate", &ModelParameters::validate);

  py::class_<ControlValue>(m, "ControlValue")
      .def(py::init([](double u, double n1, double n2) { return ControlValue{u, n1, n2}; }), py::arg("u") = 0.0,
           py::arg("n1") = 0.0, py::arg("n2") = 0.0)
      .def_readwrite("u", &ControlValue::u)
      .def_readwrite("n1", &ControlValue::n1)
      .def_readwrite("n2", &ControlValue::n2)
      .def("__repr__", [](const ControlValue& c) {
        std::ostringstream os;
        os << "ControlValue(" << c.u << ", " << c.n1 << ", " << c.n2 << ")";
        return os.str();
      });

  py::class_<TwoQubitModel>(m, "TwoQubitModel")
      .def(py::init<const ModelParameters&>(), py::arg("params") = ModelParameters::reference())
      .def("hamiltonian", &TwoQubitModel::hamiltonian)
      .def("liouvillian_apply", &TwoQubitModel::liouvillian_apply, py::arg("rho"), py::arg("c") = ControlValue{})
      .def("adjoint_liouvillian_apply", &TwoQubitModel::adjoint_liouvillian_apply, py::arg("chi"),
           py::arg("c") = ControlValue{})
      .def("switching_functions", [](const TwoQubitModel& model, const Matrix4& chi, const Matrix4& rho) {
        const SwitchingValues k = model.switching_functions(chi, rho);
        return py::make_tuple(k.ku, k.kn1, k.kn2);
      });

  m.def("zero_control_solution",
        [](const ModelParameters& p, const std::array<double, 4>& a, double t) {
          return zero_control_solution(p, a, t).matrix();
        },
        py::arg("params"), py::arg("a"), py::arg("t"));

  // controls
  py::class_<ControlBounds>(m, "ControlBounds")
      .def(py::init([](double u_max, double n_max) { return ControlBounds{u_max, n_max}; }), py::arg("u_max") = 30.0,
           py::arg("n_max") = 10.0)
      .def_readwrite("u_max", &ControlBounds::u_max)
      .def_readwrite("n_max", &ControlBounds::n_max);

  py::class_<ControlSet>(m, "ControlSet")
      .def(py::init<double, int, ControlBounds, double>(), py::arg("T"), py::arg("M"),
           py::arg("bounds") = ControlBounds{}, py::arg("support_fraction") = 1.0)
      .def_static("constant", &ControlSet::constant, py::arg("T"), py::arg("M"), py::arg("bounds"), py::arg("value"))
      .def_property_readonly("horizon", &ControlSet::horizon)
      .def_property_readonly("subintervals", &ControlSet::subintervals)
      .def_property_readonly("bounds", &ControlSet::bounds)
      .def_property(
          "u", [](const ControlSet& c) { return Eigen::VectorXd(c.u()); },
          [](ControlSet& c, const Eigen::VectorXd& v) {
            if (v.size() != c.nodes()) throw DomainError("u needs M + 1 samples");
            c.u() = v;
          })
      .def_property(
          "n1", [](const ControlSet& c) { return Eigen::VectorXd(c.n1()); },
          [](ControlSet& c, const Eigen::VectorXd& v) {
            if (v.size() != c.nodes()) throw DomainError("n1 needs M + 1 samples");
            c.n1() = v;
          })
      .def_property(
          "n2", [](const ControlSet& c) { return Eigen::VectorXd(c.n2()); },
          [](ControlSet& c, const Eigen::VectorXd& v) {
            if (v.size() != c.nodes()) throw DomainError("n2 needs M + 1 samples");
            c.n2() = v;
          })
      .def("node_times",
           [](const ControlSet& c) {
             Eigen::VectorXd t(c.nodes());
             for (Eigen::Index s = 0; s < c.nodes(); ++s) t[s] = c.node_time(s);
             return t;
           })
      .def("evaluate", &ControlSet::evaluate, py::arg("t"))
      .def("admissible", &ControlSet::admissible)
      .def("project", [](const ControlSet& c) { return project_box(c); });

  // dynamics and objectives
  m.def(
      "simulate",
      [](const ModelParameters& p, const Matrix4& rho0, const ControlSet& c, long steps) {
        const TwoQubitModel model(p);
        return trajectory_dict(solve_forward(model, rho0, c, steps > 0 ? steps : default_steps(c.subintervals())));
      },
      py::arg("params"), py::arg("rho0"), py::arg("controls"), py::arg("steps") = 0,
      "RK4 forward solve; returns dict(t, states, entropy)");

  py::enum_<ObjectiveKind>(m, "ObjectiveKind")
      .value("JO", ObjectiveKind::JO)
      .value("J1", ObjectiveKind::J1)
      .value("J2", ObjectiveKind::J2)
      .value("J3", ObjectiveKind::J3)
      .value("J4", ObjectiveKind::J4)
      .value("J5", ObjectiveKind::J5);

  py::enum_<RegularizationMode>(m, "RegularizationMode")
      .value("none", RegularizationMode::None)
      .value("integral", RegularizationMode::Integral)
      .value("supnorm", RegularizationMode::SupNorm)
      .value("jumps", RegularizationMode::Jumps);

  py::class_<ObjectiveSpec>(m, "ObjectiveSpec")
      .def(py::init([](ObjectiveKind kind, double S_tar, double S_bar, double P) {
             ObjectiveSpec s;
             s.kind = kind;
             s.S_tar = S_tar;
             s.S_bar = S_bar;
             s.P = P;
             return s;
           }),
           py::arg("kind"), py::arg("S_tar") = 0.0, py::arg("S_bar") = 0.0, py::arg("P") = 0.1)
      .def_readwrite("kind", &ObjectiveSpec::kind)
      .def_readwrite("S_tar", &ObjectiveSpec::S_tar)
      .def_readwrite("S_bar", &ObjectiveSpec::S_bar)
      .def_readwrite("P", &ObjectiveSpec::P)
      .def_readwrite("beta", &ObjectiveSpec::beta)
      .def_readwrite("O", &ObjectiveSpec::O)
      .def_property(
          "regularization",
          [](const ObjectiveSpec& s) { return py::make_tuple(s.reg.mode, s.reg.gamma_u, s.reg.gamma_n); },
          [](ObjectiveSpec& s, const py::tuple& t) {
            s.reg.mode = t[0].cast<RegularizationMode>();
            s.reg.gamma_u = t[1].cast<double>();
            s.reg.gamma_n = t[2].cast<double>();
          });

  m.def(
      "evaluate_objective",
      [](const ModelParameters& p, const Matrix4& rho0, const ObjectiveSpec& spec, const ControlSet& c, long steps) {
        return value_dict(evaluate_objective(make_problem(p, rho0, spec, steps), c));
      },
      py::arg("params"), py::arg("rho0"), py::arg("objective"), py::arg("controls"), py::arg("steps") = 0);

  m.def(
      "gradient",
      [](const ModelParameters& p, const Matrix4& rho0, const ObjectiveSpec& spec, const ControlSet& c, long steps) {
        const GradientResult g = assemble_gradient(make_problem(p, rho0, spec, steps), c);
        py::dict d;
        d["u"] = g.field.u;
        d["n1"] = g.field.n1;
        d["n2"] = g.field.n2;
        d["pairing"] = hat_pairing(g.field, c);
        d["value"] = value_dict(g.value);
        return d;
      },
      py::arg("params"), py::arg("rho0"), py::arg("objective"), py::arg("controls"), py::arg("steps") = 0,
      "adjoint gradient at the control nodes plus its hat-function pairing");

  m.def(
      "fd_gradient",
      [](const ModelParameters& p, const Matrix4& rho0, const ObjectiveSpec& spec, const ControlSet& c, long steps,
         double h) { return fd_gradient_oracle(make_problem(p, rho0, spec, steps), c, h); },
      py::arg("params"), py::arg("rho0"), py::arg("objective"), py::arg("controls"), py::arg("steps") = 0,
      py::arg("h") = 1e-5);

  // optimizers
  py::class_<GPMConfig>(m, "GPMConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &GPMConfig::alpha)
      .def_readwrite("beta", &GPMConfig::beta)
      .def_readwrite("max_iters", &GPMConfig::max_iters)
      .def_readwrite("eps1", &GPMConfig::eps1)
      .def_readwrite("eps2", &GPMConfig::eps2);

  m.def(
      "gpm",
      [](const ModelParameters& p, const Matrix4& rho0, const ObjectiveSpec& spec, const ControlSet& c0,
         const GPMConfig& cfg, bool heavy_ball, long steps) {
        const ControlProblem problem = make_problem(p, rho0, spec, steps);
        GPMResult r;
        {
          py::gil_scoped_release release;
          r = heavy_ball ? gpm2(problem, c0, cfg) : gpm1(problem, c0, cfg);
        }
        return gpm_dict(r);
      },
      py::arg("params"), py::arg("rho0"), py::arg("objective"), py::arg("c0"), py::arg("config") = GPMConfig{},
      py::arg("heavy_ball") = true, py::arg("steps") = 0);

  py::class_<GAConfig>(m, "GAConfig")
      .def(py::init<>())
      .def_readwrite("population", &GAConfig::population)
      .def_readwrite("max_iters", &GAConfig::max_iters)
      .def_readwrite("mutation_prob", &GAConfig::mutation_prob)
      .def_readwrite("crossover_prob", &GAConfig::crossover_prob)
      .def_readwrite("elite_fraction", &GAConfig::elite_fraction)
      .def_readwrite("tournament_size", &GAConfig::tournament_size)
      .def_readwrite("mutation_scale", &GAConfig::mutation_scale)
      .def_readwrite("trials", &GAConfig::trials)
      .def_readwrite("seed", &GAConfig::seed);

  m.def(
      "ga_minimize",
      [](const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& lower,
         const Eigen::VectorXd& upper, GAConfig cfg) {
        cfg.parallel = false;  // the objective may be a Python callable
        const GAResult r = ga_minimize(f, lower, upper, cfg);
        py::dict d;
        d["best"] = r.best;
        d["value"] = r.value;
        d["history"] = r.history;
        d["best_trial"] = r.best_trial;
        return d;
      },
      py::arg("objective"), py::arg("lower"), py::arg("upper"), py::arg("config") = GAConfig{});

  // harness
  m.def(
      "run_scenario",
      [](const std::filesystem::path& file, const std::filesystem::path& root, std::optional<std::uint64_t> seed,
         std::optional<long> steps, std::optional<int> max_iters, std::optional<int> trials) {
        Scenario s = load_scenario(file);
        RunOverrides o;
        o.seed = seed;
        o.steps = steps;
        o.max_iters = max_iters;
        o.trials = trials;
        apply_overrides(s, o);
        std::ostringstream log;
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_scenario(s, root, log);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["directory"] = r.directory;
        d["summary"] = py::module_::import("json").attr("loads")(r.summary.dump());
        d["log"] = log.str();
        return d;
      },
      py::arg("scenario"), py::arg("output_root"), py::arg("seed") = py::none(), py::arg("steps") = py::none(),
      py::arg("max_iters") = py::none(), py::arg("trials") = py::none());

  m.def(
      "verify",
      [](bool verbose) {
        VerifyOptions o;
        o.verbose = verbose;
        py::list out;
        for (const CheckResult& c : run_verification(o)) out.append(py::make_tuple(c.name, c.pass, c.error, c.tolerance));
        return out;
      },
      py::arg("verbose") = false, "list of (name, passed, measured error, tolerance)");

  m.def(
      "simulate_free_evolution",
      [](const std::array<double, 4>& a, double T, long steps, long stride) {
        SimulateOptions o;
        o.a = a;
        o.horizon = T;
        o.steps = steps;
        o.stride = stride;
        std::ostringstream csv;
        const double err = simulate_free_evolution(o, csv);
        return py::make_tuple(csv.str(), err);
      },
      py::arg("a") = std::array<double, 4>{0.25, 0.25, 0.25, 0.25}, py::arg("T") = 300.0, py::arg("steps") = 30000,
      py::arg("stride") = 100, "CSV text and the max Hilbert-Schmidt error against the closed form");

  m.def("export_figures", [](const std::filesystem::path& dir) {
    std::ostringstream log;
    return export_figures(dir, log);
  });
}
