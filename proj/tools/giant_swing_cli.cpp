// giant-swing: runs acrobot scenarios from a config file.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure,
// 1 anything else.

#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "giant_swing/errors.hpp"
#include "giant_swing/scenarios.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace giant_swing;

  CLI::App app{"Acrobot giant-swing simulator"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"simulate", {Command::simulate, "Simulate reduced or full closed loop"}},
      {"montecarlo", {Command::montecarlo, "Seeded rotation-onset campaign"}},
      {"regulate", {Command::regulate, "Supervised energy regulation"}},
      {"verify-theorems", {Command::verify, "Gain integrals and return maps"}},
      {"energy", {Command::energy, "Nominal energy coefficients of a model"}},
  };

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", config_path, "Scenario file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads (0: all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Command command = commands.at(chosen->get_name()).first;
  CommandOptions options;
  if (!out_dir.empty()) options.out_dir = out_dir;
  if (chosen->count("--seed") > 0) options.seed = seed;
  options.threads = threads;

  try {
    const ScenarioConfig config = load_scenario(config_path);
    std::cout << run_command(command, config, options) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
