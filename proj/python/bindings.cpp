#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/errors.hpp"
#include "giant_swing/reduction_transforms.hpp"
#include "giant_swing/scenarios.hpp"
#include "giant_swing/supervisor.hpp"
#include "giant_swing/vnhc.hpp"

namespace py = pybind11;
using namespace giant_swing;

namespace {

py::dict trajectory_dict(const Trajectory& traj) {
  std::vector<std::vector<double>> states;
  states.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) states.push_back(traj.state(i));
  py::dict d;
  d["t"] = traj.times();
  d["x"] = states;
  return d;
}

py::list crossings_list(const std::vector<CrossingRecord>& crossings) {
  py::list out;
  for (const CrossingRecord& c : crossings) {
    py::dict d;
    d["t"] = c.t;
    d["section"] = std::string(to_string(c.section));
    d["q_u"] = c.state.q_u;
    d["p_u"] = c.state.p_u;
    d["norm"] = c.norm;
    out.append(d);
  }
  return out;
}

Command command_from(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "montecarlo") return Command::montecarlo;
  if (name == "regulate") return Command::regulate;
  if (name == "verify-theorems" || name == "verify") return Command::verify;
  if (name == "energy") return Command::energy;
  throw py::value_error("unknown command: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Acrobot constraint numerics";

  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SimplifiedParams>(m, "SimplifiedParams")
      .def(py::init<>())
      .def(py::init([](double m_, double l, double g) {
             return SimplifiedParams{m_, l, g};
           }),
           py::arg("m") = 1.0, py::arg("l") = 1.0, py::arg("g") = 9.81)
      .def_readwrite("m", &SimplifiedParams::m)
      .def_readwrite("l", &SimplifiedParams::l)
      .def_readwrite("g", &SimplifiedParams::g);

  py::class_<DistributedParams>(m, "DistributedParams")
      .def(py::init<>())
      .def_static("rig", &DistributedParams::rig)
      .def_readwrite("m_u", &DistributedParams::m_u)
      .def_readwrite("m_a", &DistributedParams::m_a)
      .def_readwrite("l_u", &DistributedParams::l_u)
      .def_readwrite("l_a", &DistributedParams::l_a)
      .def_readwrite("l_cu", &DistributedParams::l_cu)
      .def_readwrite("l_ca", &DistributedParams::l_ca)
      .def_readwrite("J_u", &DistributedParams::J_u)
      .def_readwrite("J_a", &DistributedParams::J_a)
      .def_readwrite("g", &DistributedParams::g);

  py::class_<AcrobotModel>(m, "AcrobotModel")
      .def(py::init<const SimplifiedParams&>())
      .def(py::init<const DistributedParams&>())
      .def_static("simplified", [] { return AcrobotModel(SimplifiedParams{}); })
      .def_static("rig", [] { return AcrobotModel(DistributedParams::rig()); })
      .def_property_readonly("name",
                             [](const AcrobotModel& a) { return std::string(a.name()); })
      .def("inertia", &AcrobotModel::inertia, py::arg("q_a"))
      .def("potential", &AcrobotModel::potential, py::arg("q_u"), py::arg("q_a"))
      .def_property_readonly("pendulum_inertia", &AcrobotModel::pendulum_inertia)
      .def_property_readonly("kinetic_coefficient", &AcrobotModel::kinetic_coefficient)
      .def_property_readonly("potential_coefficient",
                             &AcrobotModel::potential_coefficient)
      .def_property_readonly("critical_level", &AcrobotModel::critical_level)
      .def_property_readonly("boundary_momentum", &AcrobotModel::boundary_momentum)
      .def("nominal_energy", [](const AcrobotModel& a, double q_u, double p_u) {
        return nominal_energy(a, {q_u, p_u});
      }, py::arg("q_u"), py::arg("p_u"))
      .def("classify", [](const AcrobotModel& a, double q_u, double p_u) {
        return std::string(to_string(classify(a, {q_u, p_u})));
      }, py::arg("q_u"), py::arg("p_u"));

  py::class_<VnhcSpec>(m, "VnhcSpec")
      .def(py::init([](double qa_bar, double I, double k_p, double k_d) {
             VnhcSpec s{qa_bar, I, k_p, k_d};
             validate(s);
             return s;
           }),
           py::arg("qa_bar") = 1.0, py::arg("I") = 0.0, py::arg("k_p") = 100.0,
           py::arg("k_d") = 20.0)
      .def_readwrite("qa_bar", &VnhcSpec::qa_bar)
      .def_readwrite("I", &VnhcSpec::I)
      .def_readwrite("k_p", &VnhcSpec::k_p)
      .def_readwrite("k_d", &VnhcSpec::k_d);

  m.def("constraint_f", &constraint_f, py::arg("spec"), py::arg("p_u"));
  m.def("decoupling_scalar_closed_form", &decoupling_scalar_closed_form,
        py::arg("params"), py::arg("q_a"), py::arg("df_dqu") = 0.0);
  m.def("momentum_completion_g",
        [](const AcrobotModel& a, const VnhcSpec& s, double q_u, double p_u) {
          return momentum_completion_g(a, s, {q_u, p_u});
        },
        py::arg("model"), py::arg("spec"), py::arg("q_u"), py::arg("p_u"));
  m.def("reduced_vector_field",
        [](const AcrobotModel& a, const VnhcSpec& s, double q_u, double p_u) {
          const Eigen::Vector2d f = reduced_vector_field(a, s, {q_u, p_u});
          return std::pair<double, double>(f(0), f(1));
        },
        py::arg("model"), py::arg("spec"), py::arg("q_u"), py::arg("p_u"));

  m.def("simulate_reduced",
        [](const AcrobotModel& a, const VnhcSpec& s, double q_u, double p_u,
           double duration, double rel_tol, double abs_tol, double max_step) {
          IntegratorConfig cfg;
          cfg.rel_tol = rel_tol;
          cfg.abs_tol = abs_tol;
          cfg.max_step = max_step;
          const SimulationRun run = simulate_reduced(a, s, {q_u, p_u}, duration, cfg);
          py::dict out = trajectory_dict(run.result.trajectory);
          out["crossings"] = crossings_list(run.crossings);
          if (const auto onset = rotation_onset(run.crossings)) {
            out["rotation_onset_time"] = onset->t;
            out["rotation_onset_p_u"] = onset->p_u_at_axis;
          } else {
            out["rotation_onset_time"] = py::none();
            out["rotation_onset_p_u"] = py::none();
          }
          return out;
        },
        py::arg("model"), py::arg("spec"), py::arg("q_u"), py::arg("p_u"),
        py::arg("duration"), py::arg("rel_tol") = 1e-10,
        py::arg("abs_tol") = 1e-12, py::arg("max_step") = 0.05);

  m.def("regulate",
        [](const AcrobotModel& a, const std::string& mode, double target,
           double delta, double I_mag, double q_u, double p_u, double duration,
           double qa_bar) {
          RegulationConfig cfg;
          if (mode == "oscillation") {
            cfg.mode = RegulationMode::oscillation;
          } else if (mode == "rotation") {
            cfg.mode = RegulationMode::rotation;
          } else {
            throw py::value_error("mode must be 'oscillation' or 'rotation'");
          }
          cfg.target = target;
          cfg.delta = delta;
          cfg.I_mag = I_mag;
          VnhcSpec spec;
          spec.qa_bar = qa_bar;
          const RegulatedRun run =
              run_regulated(a, spec, cfg, {q_u, p_u}, duration, IntegratorConfig{});
          py::list log;
          for (const SwitchRecord& s : run.supervisor.switch_log) {
            log.append(py::make_tuple(s.t, std::string(to_string(s.trigger)),
                                      s.value, std::string(to_string(s.decision))));
          }
          const CaptureReport cap = band_capture(run, cfg);
          py::dict out = trajectory_dict(run.trajectory);
          out["switches"] = log;
          out["captured"] = cap.captured;
          out["trailing_extends"] = cap.trailing_extends;
          out["final_value"] = cap.final_value;
          return out;
        },
        py::arg("model"), py::arg("mode"), py::arg("target"), py::arg("delta"),
        py::arg("I_mag") = 10.0, py::arg("q_u") = 0.0, py::arg("p_u") = 0.0,
        py::arg("duration") = 60.0, py::arg("qa_bar") = 1.0);

  m.def("osc_gain_integral", &osc_gain_integral, py::arg("r"));
  m.def("integrand_a", &integrand_a, py::arg("r"), py::arg("theta"));
  m.def("rotation_gain_integral", &rotation_gain_integral, py::arg("model"),
        py::arg("spec"), py::arg("r"));
  m.def("gain_scale", &gain_scale, py::arg("model"), py::arg("spec"));
  m.def("to_polar_osc",
        [](const AcrobotModel& a, double q_u, double p_u) {
          const PolarState s = to_polar_osc(a, {q_u, p_u});
          return std::pair<double, double>(s.r, s.theta);
        },
        py::arg("model"), py::arg("q_u"), py::arg("p_u"));
  m.def("from_polar_osc",
        [](const AcrobotModel& a, double r, double theta) {
          const ReducedState s = from_polar_osc(a, r, theta);
          return std::pair<double, double>(s.q_u, s.p_u);
        },
        py::arg("model"), py::arg("r"), py::arg("theta"));
  m.def("poincare",
        [](const AcrobotModel& a, const VnhcSpec& s, double r0,
           const std::string& chart) {
          Chart c = Chart::oscillation;
          if (chart == "rotation") {
            c = Chart::rotation_plus;
          } else if (chart != "oscillation") {
            throw py::value_error("chart must be 'oscillation' or 'rotation'");
          }
          IntegratorConfig cfg;
          cfg.rel_tol = 1e-12;
          cfg.abs_tol = 1e-13;
          cfg.max_step = 0.02;
          return std::pair<double, double>(poincare_numeric(a, s, r0, c, cfg),
                                           poincare_first_order(a, s, r0, c));
        },
        py::arg("model"), py::arg("spec"), py::arg("r0"),
        py::arg("chart") = "oscillation");

  m.def("run_command",
        [](const std::string& command, const std::filesystem::path& config,
           std::optional<std::filesystem::path> out,
           std::optional<std::uint64_t> seed, unsigned threads) {
          CommandOptions opts;
          opts.out_dir = std::move(out);
          opts.seed = seed;
          opts.threads = threads;
          const Command cmd = command_from(command);
          const ScenarioConfig cfg = load_scenario(config);
          py::gil_scoped_release release;
          return run_command(cmd, cfg, opts);
        },
        py::arg("command"), py::arg("config"), py::arg("out") = py::none(),
        py::arg("seed") = py::none(), py::arg("threads") = 0,
        "Runs a CLI subcommand and returns its summary as JSON text.");
}
