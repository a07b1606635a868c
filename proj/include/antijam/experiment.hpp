#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "antijam/agents.hpp"
#include "antijam/harness.hpp"

namespace antijam::experiment {

enum class Suite { Train, Deploy, Timing, Full };

std::string_view to_string(Suite suite);
Suite parse_suite(std::string_view name);

// Malformed or out-of-range configuration. `key()` names the offending field
// when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Flat experiment description; every field maps to one config-file key.
struct ExperimentConfig {
  // Simulation parameters.
  std::size_t n_channels = 8;
  double initial_frequency_mhz = 5180.0;
  double channel_spacing_mhz = 20.0;
  env::JammerStrategy jammer = env::JammerStrategy::DynamicPattern;
  double jamming_power_dbm = 10.0;
  double jammer_distance_m = 0.2;
  env::RadioParams radio;

  // Experiment grid.
  std::vector<agents::AgentKind> agents{agents::kAllAgentKinds.begin(),
                                        agents::kAllAgentKinds.end()};
  std::vector<double> switching_costs{0.0, 0.05, 0.10, 0.15};
  std::vector<std::uint64_t> seeds{1};

  // DRL hyper-parameters.
  std::size_t training_episodes = 100;
  std::size_t testing_episodes = 100;
  std::size_t time_steps = 100;
  double gamma_discount = 0.95;
  double initial_exploration_rate = 1.0;
  double exploration_decay = 0.005;
  double min_exploration_rate = 0.01;
  std::size_t buffer_size = 10000;
  std::size_t batch_size = 32;
  std::size_t averaging_window = 10;
  // Empty disables early termination.
  std::optional<double> early_termination_reward = 90.0;
  std::size_t target_sync_period = 50;
  double learning_rate = 1e-3;
  std::vector<std::size_t> hidden_units{64, 64};
  double per_alpha = 0.6;
  double per_beta = 0.4;
  double per_beta_final = 1.0;
  double per_epsilon = 1e-6;

  // Timing.
  std::size_t inference_states = 10000;
  std::size_t timing_folds = 10;

  // Runner.
  Suite suite = Suite::Full;
  std::string output_dir = "results";
  std::size_t jobs = 1;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

struct ExperimentSpec {
  ExperimentConfig config;
  // Cartesian product agents x switching_costs x seeds, in that nesting order.
  std::vector<harness::RunConfig> runs;
};

ExperimentSpec expand(const ExperimentConfig& config);

// JSON object; unset keys keep their defaults, unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentSpec parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

struct SummaryRecord {
  agents::AgentKind agent = agents::AgentKind::DQN;
  double gamma_switch = 0.0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::size_t episodes_run = 0;
  std::optional<std::size_t> converged_at;
  double final_moving_avg = 0.0;
  std::optional<double> deploy_throughput;
  std::optional<double> switch_rate;
  double convergence_s = 0.0;
  std::optional<double> inference_rate_hz;
  std::optional<double> inference_rate_std_hz;
  std::optional<double> learn_step_s;
  std::optional<double> learn_step_std_s;
};

// Relative directory of one run under the output directory.
std::string run_directory(const harness::RunConfig& run);

// Formats `episode,reward,moving_avg,switches,jam_hits` rows, floats at 6
// significant digits.
std::string episodes_csv(const harness::RunMetrics& metrics);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRunFailure = 2, kExitIo = 3 };

// Executes every run and writes its artifacts. Returns an ExitCode.
int run_suite(const ExperimentSpec& spec, std::ostream& log);

}  // namespace antijam::experiment
