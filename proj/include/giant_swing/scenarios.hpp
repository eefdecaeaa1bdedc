#pragma once

// Scenario files and the runners behind the giant-swing subcommands. Each
// runner writes its artifacts into an output directory and returns the run
// summary that also lands in summary.json.
//
// CSV files use a fixed column order and print floats with 17 significant
// digits:
//   trajectory.csv  t,q_u,q_a,p_u,p_a,E,e,e_dot,I
//   crossings.csv   t,section,q_u,p_u,norm,E
//   switches.csv    t,trigger,value,decision
//   runs.csv        run,q_u0,p_u0,E0,rotated,onset_time,onset_p_u
//   verify.csv      chart,r,int_a,S,I,numeric_delta,first_order_delta,
//                   residual,residual_half,ratio,numeric_delta_I0,status

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "giant_swing/acrobot_models.hpp"
#include "giant_swing/config.hpp"
#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/integrator.hpp"
#include "giant_swing/reduction_transforms.hpp"
#include "giant_swing/supervisor.hpp"
#include "giant_swing/vnhc.hpp"

namespace giant_swing {

struct MonteCarloConfig {
  std::size_t samples = 100;
  double duration = 120.0;  // cap on each run, s
  // Initial conditions fill the sublevel set E <= E(ref_q_u, 0).
  double ref_q_u = kPi / 32.0;
  double window_lo = 15.0;  // onset window reported in the summary, s
  double window_hi = 45.0;
};

struct VerifyConfig {
  std::vector<double> osc_r;  // oscillation-chart radii
  std::vector<double> rot_r;  // rotation-chart radii
  double I = 1e-3;
};

struct ScenarioConfig {
  AcrobotModel model{SimplifiedParams{}};
  VnhcSpec spec;
  ReducedState initial;
  double initial_e = 0.0;  // constraint error at start (full dynamics only)
  double initial_e_dot = 0.0;
  double duration = 30.0;
  Dynamics dynamics = Dynamics::reduced;
  IntegratorConfig integrator;
  // Levels the energy verdict exits at; default to 0.05 R_bar and R_bar.
  std::optional<double> R1;
  std::optional<double> R2;
  MonteCarloConfig montecarlo;
  std::optional<RegulationConfig> regulation;
  VerifyConfig verify;
  std::optional<std::uint64_t> seed;  // required by montecarlo
  std::filesystem::path output_dir = "out";
  // Reference values to compare the model against (energy subcommand).
  std::optional<double> reference_kinetic_coefficient;
  std::optional<double> reference_boundary_momentum;
};

/// Parses a scenario; a relative parameter-file path is resolved against
/// `base_dir`, the output directory against the working directory. Throws ConfigError with line and field.
ScenarioConfig parse_scenario(const IniFile& ini,
                              const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Reads model parameters from a [simplified] or [distributed] section.
AcrobotModel load_model(const IniFile& ini, const std::string& kind,
                        const std::string& section);

/// Per-run generator: a fixed hash of (seed, run index), so streams do not
/// depend on scheduling.
std::mt19937_64 run_generator(std::uint64_t seed, std::uint64_t run);

/// Uniform sample of {E <= level} by rejection from the bounding box.
ReducedState sample_sublevel(const AcrobotModel& model, double level,
                             std::mt19937_64& rng);

struct MonteCarloRun {
  ReducedState x0;
  double E0 = 0.0;
  std::optional<RotationOnset> onset;
};

/// Runs are independent and collected by index; the result does not depend
/// on `threads`.
std::vector<MonteCarloRun> monte_carlo(const AcrobotModel& model,
                                       const VnhcSpec& spec,
                                       const MonteCarloConfig& mc,
                                       const IntegratorConfig& icfg,
                                       std::uint64_t seed, unsigned threads);

struct VerifyRow {
  Chart chart = Chart::oscillation;
  double r = 0.0;
  std::optional<double> int_a;
  std::optional<double> S;
  double I = 0.0;
  std::optional<double> numeric_delta;      // P(r) - r at I
  std::optional<double> first_order_delta;  // prediction - r at I
  std::optional<double> residual;           // numeric - prediction at I
  std::optional<double> residual_half;      // same at I / 2
  std::optional<double> ratio;              // residual / residual_half
  std::optional<double> numeric_delta_I0;   // P(r) - r at I = 0
  std::string status = "ok";
};

VerifyRow verify_row(const AcrobotModel& model, const VnhcSpec& spec,
                     Chart chart, double r, double I,
                     const IntegratorConfig& icfg);

enum class Command { simulate, montecarlo, regulate, verify, energy };

struct CommandOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs a subcommand, writes its artifacts and returns the summary as JSON
/// text. NumericError and DomainError propagate.
std::string run_command(Command command, const ScenarioConfig& config,
                        const CommandOptions& options);

/// Formats a double with 17 significant digits.
std::string csv_number(double value);

}  // namespace giant_swing
