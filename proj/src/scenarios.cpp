#include "giant_swing/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Converts a validation failure into a config error pointing at a field.
template <class F>
void checked(const IniFile& ini, const std::string& section,
             const std::string& key, F&& check) {
  try {
    check();
  } catch (const DomainError& e) {
    const IniFile::Entry* entry = ini.find(section, key);
    throw ConfigError(e.what(), entry ? entry->line : 0, section + "." + key);
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

std::string cell(const std::optional<double>& v) {
  return v ? csv_number(*v) : std::string();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

// One trajectory.csv row per accepted step. `gain` gives the gain in force.
template <class GainAt>
void write_trajectory(const fs::path& path, const AcrobotModel& model,
                      const VnhcSpec& base, const Trajectory& traj,
                      Dynamics dynamics, GainAt gain) {
  std::ofstream out = open_csv(path);
  out << "t,q_u,q_a,p_u,p_a,E,e,e_dot,I\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.time(i);
    const auto& x = traj.state(i);
    VnhcSpec spec = base;
    spec.I = gain(t);
    double q_u = 0.0, q_a = 0.0, p_u = 0.0, p_a = 0.0, e = 0.0, e_dot = 0.0;
    if (dynamics == Dynamics::reduced) {
      q_u = x[0];
      p_u = x[1];
      q_a = constraint_f(spec, p_u);
      p_a = momentum_completion_g(model, spec, {q_u, p_u});
    } else {
      q_u = x[0];
      q_a = x[1];
      p_u = x[2];
      p_a = x[3];
      FullState s{Vector(2), Vector(2)};
      s.q << q_u, q_a;
      s.p << p_u, p_a;
      const ConstraintError err =
          constraint_error(model.system(), arctan_constraint(spec), s);
      e = err.e;
      e_dot = err.e_dot;
    }
    const double E = nominal_energy(model, {q_u, p_u});
    out << csv_number(t) << ',' << csv_number(wrap_angle(q_u)) << ','
        << csv_number(wrap_angle(q_a)) << ',' << csv_number(p_u) << ','
        << csv_number(p_a) << ',' << csv_number(E) << ',' << csv_number(e)
        << ',' << csv_number(e_dot) << ',' << csv_number(spec.I) << '\n';
  }
}

void write_crossings(const fs::path& path, const AcrobotModel& model,
                     const std::vector<CrossingRecord>& crossings) {
  std::ofstream out = open_csv(path);
  out << "t,section,q_u,p_u,norm,E\n";
  for (const CrossingRecord& c : crossings) {
    out << csv_number(c.t) << ',' << to_string(c.section) << ','
        << csv_number(c.state.q_u) << ',' << csv_number(c.state.p_u) << ','
        << csv_number(c.norm) << ',' << csv_number(nominal_energy(model, c.state))
        << '\n';
  }
}

json model_json(const AcrobotModel& model) {
  return {{"name", model.name()},
          {"pendulum_inertia", model.pendulum_inertia()},
          {"kinetic_coefficient", model.kinetic_coefficient()},
          {"potential_coefficient", model.potential_coefficient()},
          {"critical_level", model.critical_level()},
          {"boundary_momentum", model.boundary_momentum()}};
}

json verdict_json(const std::vector<CrossingRecord>& crossings, double R1,
                  double R2, const AcrobotModel& model, const Trajectory& traj,
                  StateLayout layout) {
  try {
    const EnergyVerdict v = verdict(crossings, R1, R2, model, traj, layout);
    return {{"kind", to_string(v.kind)},
            {"trend", to_string(v.trend)},
            {"exit_time", optional_json(v.exit_time)},
            {"exit_level", optional_json(v.exit_level)},
            {"samples", v.samples},
            {"R1", R1},
            {"R2", R2}};
  } catch (const DomainError& e) {
    return {{"error", e.what()}};
  }
}

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

FullState initial_full_state(const ScenarioConfig& cfg) {
  return lift_to_manifold(cfg.model.system(), arctan_constraint(cfg.spec),
                          cfg.initial, cfg.initial_e, cfg.initial_e_dot);
}

json cmd_simulate(const ScenarioConfig& cfg, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const AcrobotModel& model = cfg.model;
  SimulationRun run;
  StateLayout layout = StateLayout::reduced();
  if (cfg.dynamics == Dynamics::reduced) {
    run = simulate_reduced(model, cfg.spec, cfg.initial, cfg.duration,
                           cfg.integrator);
  } else {
    layout = StateLayout::full();
    run = simulate_full(model, cfg.spec, initial_full_state(cfg), cfg.duration,
                        cfg.integrator);
  }
  const Trajectory& traj = run.result.trajectory;
  write_trajectory(out / "trajectory.csv", model, cfg.spec, traj, cfg.dynamics,
                   [&](double) { return cfg.spec.I; });
  write_crossings(out / "crossings.csv", model, run.crossings);

  auto energy_of = [&](std::size_t i) {
    const auto& x = traj.state(i);
    return nominal_energy(model, {x[layout.q_u], x[layout.p_u]});
  };
  const double E0 = energy_of(0);
  double drift = 0.0;
  double max_e = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    drift = std::max(drift, std::abs(energy_of(i) - E0));
    if (cfg.dynamics == Dynamics::full) {
      const auto& x = traj.state(i);
      FullState s{Vector(2), Vector(2)};
      s.q << x[0], x[1];
      s.p << x[2], x[3];
      const ConstraintError err =
          constraint_error(model.system(), arctan_constraint(cfg.spec), s);
      max_e = std::max({max_e, std::abs(err.e), std::abs(err.e_dot)});
    }
  }
  const double r_bar = model.critical_level();
  const auto onset = rotation_onset(run.crossings);
  json summary = {
      {"command", "simulate"},
      {"model", model_json(model)},
      {"dynamics", to_string(cfg.dynamics)},
      {"I", cfg.spec.I},
      {"qa_bar", cfg.spec.qa_bar},
      {"initial", {{"q_u", cfg.initial.q_u}, {"p_u", cfg.initial.p_u}}},
      {"duration", cfg.duration},
      {"initial_energy", E0},
      {"final_energy", energy_of(traj.size() - 1)},
      {"max_energy_drift", drift},
      {"verdict", verdict_json(run.crossings, cfg.R1.value_or(0.05 * r_bar),
                               cfg.R2.value_or(r_bar), model, traj, layout)},
      {"rotation_onset_time", onset ? json(onset->t) : json(nullptr)},
      {"rotation_onset_p_u",
       onset ? optional_json(onset->p_u_at_axis) : json(nullptr)},
      {"crossing_count", run.crossings.size()},
      {"switch_count", 0},
      {"steps", traj.size()},
  };
  if (cfg.dynamics == Dynamics::full) summary["max_constraint_error"] = max_e;
  summary["wall_time"] = seconds_since(start);
  return summary;
}

json cmd_montecarlo(const ScenarioConfig& cfg, const CommandOptions& opts,
                    const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::optional<std::uint64_t> seed = opts.seed ? opts.seed : cfg.seed;
  if (!seed) {
    throw ConfigError("montecarlo needs a seed (config or --seed)", 0,
                      "montecarlo.seed");
  }
  const unsigned threads = thread_count(opts.threads);
  const std::vector<MonteCarloRun> runs =
      monte_carlo(cfg.model, cfg.spec, cfg.montecarlo, cfg.integrator, *seed,
                  threads);

  std::ofstream csv = open_csv(out / "runs.csv");
  csv << "run,q_u0,p_u0,E0,rotated,onset_time,onset_p_u\n";
  std::vector<double> onsets;
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const MonteCarloRun& r = runs[i];
    csv << i << ',' << csv_number(r.x0.q_u) << ',' << csv_number(r.x0.p_u)
        << ',' << csv_number(r.E0) << ',' << (r.onset ? 1 : 0) << ','
        << (r.onset ? csv_number(r.onset->t) : std::string()) << ','
        << (r.onset ? cell(r.onset->p_u_at_axis) : std::string()) << '\n';
    if (r.onset) {
      onsets.push_back(r.onset->t);
      if (r.onset->t >= cfg.montecarlo.window_lo &&
          r.onset->t <= cfg.montecarlo.window_hi) {
        ++in_window;
      }
    }
  }
  json stats = nullptr;
  if (!onsets.empty()) {
    std::vector<double> sorted = onsets;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2]
                                : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double mean = 0.0;
    for (double t : sorted) mean += t;
    mean /= static_cast<double>(n);
    stats = {{"min", sorted.front()},
             {"max", sorted.back()},
             {"mean", mean},
             {"median", median}};
  }
  const double level = nominal_energy(cfg.model, {cfg.montecarlo.ref_q_u, 0.0});
  return {{"command", "montecarlo"},
          {"model", model_json(cfg.model)},
          {"I", cfg.spec.I},
          {"seed", *seed},
          {"samples", runs.size()},
          {"sublevel", level},
          {"duration_cap", cfg.montecarlo.duration},
          {"rotated", onsets.size()},
          {"fraction_rotated",
           runs.empty() ? 0.0
                        : static_cast<double>(onsets.size()) /
                              static_cast<double>(runs.size())},
          {"onset_time", stats},
          {"window", {cfg.montecarlo.window_lo, cfg.montecarlo.window_hi}},
          {"in_window", in_window},
          {"fraction_in_window",
           runs.empty() ? 0.0
                        : static_cast<double>(in_window) /
                              static_cast<double>(runs.size())},
          {"threads", threads},
          {"wall_time", seconds_since(start)}};
}

json cmd_regulate(const ScenarioConfig& cfg, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  if (!cfg.regulation) {
    throw ConfigError("regulate needs a [regulation] section", 0, "regulation");
  }
  const RegulationConfig& reg = *cfg.regulation;
  const RegulatedRun run =
      run_regulated(cfg.model, cfg.spec, reg, cfg.initial, cfg.duration,
                    cfg.integrator, cfg.dynamics);
  write_trajectory(out / "trajectory.csv", cfg.model, cfg.spec, run.trajectory,
                   run.dynamics, [&](double t) { return run.gain_at(t); });
  write_crossings(out / "crossings.csv", cfg.model, run.crossings);

  std::ofstream csv = open_csv(out / "switches.csv");
  csv << "t,trigger,value,decision\n";
  std::size_t changes = 0;
  SupervisorDecision previous = SupervisorDecision::extend;
  for (const SwitchRecord& s : run.supervisor.switch_log) {
    csv << csv_number(s.t) << ',' << to_string(s.trigger) << ','
        << csv_number(s.value) << ',' << to_string(s.decision) << '\n';
    if (s.decision != previous) ++changes;
    previous = s.decision;
  }

  const CaptureReport cap = band_capture(run, reg);
  std::optional<double> final_rate;
  for (auto it = run.supervisor.switch_log.rbegin();
       it != run.supervisor.switch_log.rend(); ++it) {
    if (it->trigger == Trigger::p_axis) {
      // Signed rate at the last p_u-axis trigger.
      const auto x = run.trajectory.at(it->t);
      final_rate = x[run.layout().p_u];
      break;
    }
  }
  const auto& last = run.trajectory.back();
  return {{"command", "regulate"},
          {"model", model_json(cfg.model)},
          {"dynamics", to_string(run.dynamics)},
          {"mode", to_string(reg.mode)},
          {"target", reg.target},
          {"delta", reg.delta},
          {"I_mag", reg.I_mag},
          {"band", {(1.0 - reg.delta) * reg.target, (1.0 + reg.delta) * reg.target}},
          {"initial", {{"q_u", cfg.initial.q_u}, {"p_u", cfg.initial.p_u}}},
          {"duration", cfg.duration},
          {"decisions", run.supervisor.switch_log.size()},
          {"switch_count", changes},
          {"trailing_extends", cap.trailing_extends},
          {"final_trigger_value", optional_json(cap.final_value)},
          {"final_in_band", cap.final_in_band},
          {"captured", cap.captured},
          {"final_signed_rate", optional_json(final_rate)},
          {"final_energy",
           nominal_energy(cfg.model,
                          {last[run.layout().q_u], last[run.layout().p_u]})},
          {"wall_time", seconds_since(start)}};
}

json cmd_verify(const ScenarioConfig& cfg, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<VerifyRow> rows;
  for (double r : cfg.verify.osc_r) {
    rows.push_back(verify_row(cfg.model, cfg.spec, Chart::oscillation, r,
                              cfg.verify.I, cfg.integrator));
  }
  for (double r : cfg.verify.rot_r) {
    rows.push_back(verify_row(cfg.model, cfg.spec, Chart::rotation_plus, r,
                              cfg.verify.I, cfg.integrator));
  }
  std::ofstream csv = open_csv(out / "verify.csv");
  csv << "chart,r,int_a,S,I,numeric_delta,first_order_delta,residual,"
         "residual_half,ratio,numeric_delta_I0,status\n";
  std::optional<double> min_a;
  std::optional<double> min_S;
  std::size_t failed = 0;
  for (const VerifyRow& row : rows) {
    csv << (row.chart == Chart::oscillation ? "oscillation" : "rotation") << ','
        << csv_number(row.r) << ',' << cell(row.int_a) << ',' << cell(row.S)
        << ',' << csv_number(row.I) << ',' << cell(row.numeric_delta) << ','
        << cell(row.first_order_delta) << ',' << cell(row.residual) << ','
        << cell(row.residual_half) << ',' << cell(row.ratio) << ','
        << cell(row.numeric_delta_I0) << ',' << '"' << row.status << '"'
        << '\n';
    if (row.int_a) min_a = std::min(min_a.value_or(*row.int_a), *row.int_a);
    if (row.S) min_S = std::min(min_S.value_or(*row.S), *row.S);
    if (row.status != "ok") ++failed;
  }
  return {{"command", "verify-theorems"},
          {"model", model_json(cfg.model)},
          {"I", cfg.verify.I},
          {"gain_scale", gain_scale(cfg.model, cfg.spec)},
          {"rows", rows.size()},
          {"flagged_rows", failed},
          {"min_int_a", optional_json(min_a)},
          {"min_S", optional_json(min_S)},
          {"wall_time", seconds_since(start)}};
}

json cmd_energy(const ScenarioConfig& cfg) {
  const AcrobotModel& model = cfg.model;
  json summary = {{"command", "energy"}, {"model", model_json(model)}};
  // The rigid pendulum the nominal energy stands for, evaluated directly from
  // the full Hamiltonian with q_a = 0 and p_a completing the rigid motion.
  const double p_u = 0.1;
  FullState rigid{Vector(2), Vector(2)};
  const Eigen::Matrix2d M = model.inertia(0.0);
  const double omega = p_u / M(0, 0);
  rigid.q << 0.3, 0.0;
  rigid.p << M(0, 0) * omega, M(1, 0) * omega;
  const double brute = total_energy(model.system(), rigid) -
                       model.potential(0.0, 0.0);
  summary["rigid_check"] = {
      {"q_u", 0.3},
      {"p_u", p_u},
      {"hamiltonian", brute},
      {"nominal_energy", nominal_energy(model, {0.3, p_u})}};
  if (cfg.reference_kinetic_coefficient) {
    const double ref = *cfg.reference_kinetic_coefficient;
    summary["reference_kinetic_coefficient"] = ref;
    summary["kinetic_coefficient_ratio"] = ref / model.kinetic_coefficient();
    summary["boundary_momentum_from_reference"] =
        std::sqrt(model.critical_level() / ref);
  }
  if (cfg.reference_boundary_momentum) {
    const double ref = *cfg.reference_boundary_momentum;
    summary["reference_boundary_momentum"] = ref;
    summary["boundary_momentum_relative_error"] =
        (model.boundary_momentum() - ref) / ref;
    if (cfg.reference_kinetic_coefficient) {
      summary["reference_coefficient_boundary_relative_error"] =
          (std::sqrt(model.critical_level() / *cfg.reference_kinetic_coefficient) -
           ref) /
          ref;
    }
  }
  return summary;
}

std::vector<std::string> parameter_keys(const IniFile& ini,
                                        const std::string& kind) {
  if (kind == "simplified") return {"m", "l", "g"};
  if (kind == "distributed") {
    return {"m_u", "m_a", "l_u", "l_a", "l_cu", "l_ca", "J_u", "J_a", "g"};
  }
  const IniFile::Entry* e = ini.find("model", "kind");
  throw ConfigError(
      fmt::format("unknown model '{}' (simplified or distributed)", kind),
      e ? e->line : 0, "model.kind");
}

}  // namespace

std::string csv_number(double value) { return fmt::format("{:.17g}", value); }

AcrobotModel load_model(const IniFile& ini, const std::string& kind,
                        const std::string& section) {
  if (kind == "simplified") {
    ini.expect_keys(section, {"m", "l", "g"});
    SimplifiedParams p;
    p.m = ini.number_or(section, "m", p.m);
    p.l = ini.number_or(section, "l", p.l);
    p.g = ini.number_or(section, "g", p.g);
    checked(ini, section, "m", [&] { validate(p); });
    return AcrobotModel(p);
  }
  if (kind == "distributed") {
    ini.expect_keys(section, {"m_u", "m_a", "l_u", "l_a", "l_cu", "l_ca", "J_u",
                              "J_a", "g"});
    DistributedParams p = DistributedParams::rig();
    p.m_u = ini.number_or(section, "m_u", p.m_u);
    p.m_a = ini.number_or(section, "m_a", p.m_a);
    p.l_u = ini.number_or(section, "l_u", p.l_u);
    p.l_a = ini.number_or(section, "l_a", p.l_a);
    p.l_cu = ini.number_or(section, "l_cu", p.l_cu);
    p.l_ca = ini.number_or(section, "l_ca", p.l_ca);
    p.J_u = ini.number_or(section, "J_u", p.J_u);
    p.J_a = ini.number_or(section, "J_a", p.J_a);
    p.g = ini.number_or(section, "g", p.g);
    checked(ini, section, "m_u", [&] { validate(p); });
    return AcrobotModel(p);
  }
  const IniFile::Entry* e = ini.find("model", "kind");
  throw ConfigError(
      fmt::format("unknown model '{}' (simplified or distributed)", kind),
      e ? e->line : 0, "model.kind");
}

ScenarioConfig parse_scenario(const IniFile& ini, const fs::path& base_dir) {
  static const std::set<std::string> known_sections = {
      "model",      "simplified", "distributed", "constraint",
      "initial",    "run",        "integrator",  "analysis",
      "montecarlo", "regulation", "verify",      "output",
      "reference"};
  for (const std::string& s : ini.sections()) {
    if (!known_sections.count(s)) throw ConfigError("unknown section", 0, s);
  }
  ScenarioConfig cfg;

  ini.expect_keys("model", {"kind", "parameters"});
  const std::string kind = ini.text_or("model", "kind", "simplified");
  if (ini.has("model", "parameters")) {
    const fs::path file = resolve(base_dir, ini.text("model", "parameters"));
    IniFile params;
    try {
      params = IniFile::load(file);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", file.string(), e.what()),
                        ini.find("model", "parameters")->line,
                        "model.parameters");
    }
    // File values first, then overrides from the scenario's own section.
    const std::vector<std::string> keys = parameter_keys(ini, kind);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    params.expect_keys(kind, allowed);
    ini.expect_keys(kind, allowed);
    std::string text = "[" + kind + "]\n";
    for (const std::string& key : keys) {
      const IniFile::Entry* e = ini.find(kind, key);
      if (!e) e = params.find(kind, key);
      if (e) text += key + " = " + e->value + "\n";
    }
    cfg.model = load_model(IniFile::parse(text), kind, kind);
  } else {
    cfg.model = load_model(ini, kind, kind);
  }

  ini.expect_keys("constraint", {"qa_bar", "I", "k_p", "k_d", "leg_limit"});
  cfg.spec.qa_bar = ini.number_or("constraint", "qa_bar", cfg.spec.qa_bar);
  cfg.spec.I = ini.number_or("constraint", "I", cfg.spec.I);
  cfg.spec.k_p = ini.number_or("constraint", "k_p", cfg.spec.k_p);
  cfg.spec.k_d = ini.number_or("constraint", "k_d", cfg.spec.k_d);
  const double leg_limit =
      ini.number_or("constraint", "leg_limit", kDefaultLegLimit);
  checked(ini, "constraint", "qa_bar", [&] { validate(cfg.spec, leg_limit); });

  ini.expect_keys("initial", {"q_u", "p_u", "e", "e_dot"});
  cfg.initial.q_u = ini.number_or("initial", "q_u", 0.0);
  cfg.initial.p_u = ini.number_or("initial", "p_u", 0.0);
  cfg.initial_e = ini.number_or("initial", "e", 0.0);
  cfg.initial_e_dot = ini.number_or("initial", "e_dot", 0.0);

  ini.expect_keys("run", {"duration", "dynamics"});
  cfg.duration = ini.number_or("run", "duration", cfg.duration);
  if (!(cfg.duration > 0.0)) {
    throw ConfigError("duration must be positive",
                      ini.find("run", "duration")->line, "run.duration");
  }
  const std::string dyn = ini.text_or("run", "dynamics", "reduced");
  if (dyn == "reduced") {
    cfg.dynamics = Dynamics::reduced;
  } else if (dyn == "full") {
    cfg.dynamics = Dynamics::full;
  } else {
    throw ConfigError("dynamics must be 'reduced' or 'full'",
                      ini.find("run", "dynamics")->line, "run.dynamics");
  }

  ini.expect_keys("integrator", {"rel_tol", "abs_tol", "max_step"});
  cfg.integrator.rel_tol = ini.number_or("integrator", "rel_tol", cfg.integrator.rel_tol);
  cfg.integrator.abs_tol = ini.number_or("integrator", "abs_tol", cfg.integrator.abs_tol);
  cfg.integrator.max_step =
      ini.number_or("integrator", "max_step", cfg.integrator.max_step);
  checked(ini, "integrator", "rel_tol", [&] { validate(cfg.integrator); });

  ini.expect_keys("analysis", {"R1", "R2", "R1_fraction", "R2_fraction"});
  const double r_bar = cfg.model.critical_level();
  cfg.R1 = ini.maybe_number("analysis", "R1");
  cfg.R2 = ini.maybe_number("analysis", "R2");
  if (auto f = ini.maybe_number("analysis", "R1_fraction")) cfg.R1 = *f * r_bar;
  if (auto f = ini.maybe_number("analysis", "R2_fraction")) cfg.R2 = *f * r_bar;

  ini.expect_keys("montecarlo", {"samples", "duration", "ref_q_u", "seed",
                                 "window_lo", "window_hi"});
  cfg.montecarlo.samples = static_cast<std::size_t>(
      ini.unsigned_or("montecarlo", "samples", cfg.montecarlo.samples));
  cfg.montecarlo.duration =
      ini.number_or("montecarlo", "duration", cfg.montecarlo.duration);
  cfg.montecarlo.ref_q_u =
      ini.number_or("montecarlo", "ref_q_u", cfg.montecarlo.ref_q_u);
  cfg.montecarlo.window_lo =
      ini.number_or("montecarlo", "window_lo", cfg.montecarlo.window_lo);
  cfg.montecarlo.window_hi =
      ini.number_or("montecarlo", "window_hi", cfg.montecarlo.window_hi);
  if (ini.has("montecarlo", "seed")) {
    cfg.seed = ini.unsigned_or("montecarlo", "seed", 0);
  }
  if (!(cfg.montecarlo.duration > 0.0)) {
    throw ConfigError("duration must be positive",
                      ini.find("montecarlo", "duration")->line,
                      "montecarlo.duration");
  }

  if (ini.has_section("regulation")) {
    ini.expect_keys("regulation", {"mode", "target", "delta", "I_mag"});
    RegulationConfig reg;
    const std::string mode = ini.text("regulation", "mode");
    if (mode == "oscillation") {
      reg.mode = RegulationMode::oscillation;
    } else if (mode == "rotation") {
      reg.mode = RegulationMode::rotation;
    } else {
      throw ConfigError("mode must be 'oscillation' or 'rotation'",
                        ini.find("regulation", "mode")->line, "regulation.mode");
    }
    reg.target = ini.number("regulation", "target");
    reg.delta = ini.number("regulation", "delta");
    reg.I_mag = ini.number_or("regulation", "I_mag", reg.I_mag);
    checked(ini, "regulation", "delta", [&] { validate(reg, cfg.model); });
    cfg.regulation = reg;
  }

  ini.expect_keys("verify", {"osc_r", "rot_r", "I"});
  if (ini.has("verify", "osc_r")) cfg.verify.osc_r = ini.number_list("verify", "osc_r");
  if (ini.has("verify", "rot_r")) cfg.verify.rot_r = ini.number_list("verify", "rot_r");
  cfg.verify.I = ini.number_or("verify", "I", cfg.verify.I);

  ini.expect_keys("output", {"dir"});
  cfg.output_dir = ini.text_or("output", "dir", "out");

  ini.expect_keys("reference", {"kinetic_coefficient", "boundary_momentum"});
  cfg.reference_kinetic_coefficient =
      ini.maybe_number("reference", "kinetic_coefficient");
  cfg.reference_boundary_momentum =
      ini.maybe_number("reference", "boundary_momentum");
  return cfg;
}

ScenarioConfig load_scenario(const fs::path& path) {
  return parse_scenario(IniFile::load(path), path.parent_path());
}

std::mt19937_64 run_generator(std::uint64_t seed, std::uint64_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run),
                    static_cast<std::uint32_t>(run >> 32)};
  return std::mt19937_64(seq);
}

ReducedState sample_sublevel(const AcrobotModel& model, double level,
                             std::mt19937_64& rng) {
  const double c = model.potential_coefficient();
  if (!(level > 0.0)) return {0.0, 0.0};
  const double q_max =
      level >= 2.0 * c ? kPi : std::acos(std::max(-1.0, 1.0 - level / c));
  const double p_max = std::sqrt(level / model.kinetic_coefficient());
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const ReducedState s{q_max * (2.0 * uniform01(rng) - 1.0),
                         p_max * (2.0 * uniform01(rng) - 1.0)};
    if (nominal_energy(model, s) <= level) return s;
  }
  throw NumericError("rejection sampling did not accept a point");
}

std::vector<MonteCarloRun> monte_carlo(const AcrobotModel& model,
                                       const VnhcSpec& spec,
                                       const MonteCarloConfig& mc,
                                       const IntegratorConfig& icfg,
                                       std::uint64_t seed, unsigned threads) {
  const double level = nominal_energy(model, {mc.ref_q_u, 0.0});
  std::vector<MonteCarloRun> runs(mc.samples);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      try {
        std::mt19937_64 rng = run_generator(seed, i);
        MonteCarloRun& run = runs[i];
        run.x0 = sample_sublevel(model, level, rng);
        run.E0 = nominal_energy(model, run.x0);
        std::vector<EventSpec> events = section_events();
        // Stop at the first passage over the top.
        IntegratorConfig cfg = icfg;
        cfg.max_time = mc.duration;
        events[2].terminal = true;
        const double x0[2] = {run.x0.q_u, run.x0.p_u};
        const IntegrationResult res =
            integrate(reduced_field(model, spec), 0.0, x0, cfg, events);
        run.onset = rotation_onset(extract_crossings(res, model));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = runs.size();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, mc.samples));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return runs;
}

VerifyRow verify_row(const AcrobotModel& model, const VnhcSpec& spec,
                     Chart chart, double r, double I,
                     const IntegratorConfig& icfg) {
  VerifyRow row;
  row.chart = chart;
  row.r = r;
  row.I = I;
  std::vector<std::string> problems;
  auto attempt = [&](const char* what, auto&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("{}: {}", what, e.what()));
    }
  };
  VnhcSpec at_I = spec;
  at_I.I = I;
  VnhcSpec at_half = spec;
  at_half.I = 0.5 * I;
  VnhcSpec at_zero = spec;
  at_zero.I = 0.0;

  if (chart == Chart::oscillation) {
    attempt("int_a", [&] { row.int_a = osc_gain_integral(r); });
  } else {
    attempt("S", [&] { row.S = rotation_gain_integral(model, spec, r); });
  }
  attempt("return map", [&] {
    const double p_full = poincare_numeric(model, at_I, r, chart, icfg);
    const double p_half = poincare_numeric(model, at_half, r, chart, icfg);
    const double pred_full = poincare_first_order(model, at_I, r, chart);
    const double pred_half = poincare_first_order(model, at_half, r, chart);
    row.numeric_delta = p_full - r;
    row.first_order_delta = pred_full - r;
    row.residual = p_full - pred_full;
    row.residual_half = p_half - pred_half;
    if (*row.residual_half != 0.0) row.ratio = *row.residual / *row.residual_half;
  });
  attempt("return map at I = 0", [&] {
    row.numeric_delta_I0 = poincare_numeric(model, at_zero, r, chart, icfg) - r;
  });
  if (!problems.empty()) {
    row.status.clear();
    for (const std::string& p : problems) {
      if (!row.status.empty()) row.status += "; ";
      row.status += p;
    }
  }
  return row;
}

std::string run_command(Command command, const ScenarioConfig& config,
                        const CommandOptions& options) {
  const fs::path out = options.out_dir.value_or(config.output_dir);
  json summary;
  if (command != Command::energy) fs::create_directories(out);
  switch (command) {
    case Command::simulate:
      summary = cmd_simulate(config, out);
      break;
    case Command::montecarlo:
      summary = cmd_montecarlo(config, options, out);
      break;
    case Command::regulate:
      summary = cmd_regulate(config, out);
      break;
    case Command::verify:
      summary = cmd_verify(config, out);
      break;
    case Command::energy:
      summary = cmd_energy(config);
      if (options.out_dir) {
        fs::create_directories(out);
        write_json(out / "summary.json", summary);
      }
      return summary.dump(2);
  }
  write_json(out / "summary.json", summary);
  return summary.dump(2);
}

}  // namespace giant_swing
