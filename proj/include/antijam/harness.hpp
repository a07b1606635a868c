#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antijam/agents.hpp"
#include "antijam/spectrum_env.hpp"

namespace antijam::harness {

struct RunConfig {
  env::ChannelPlan plan;
  env::JammerStrategy jammer = env::JammerStrategy::DynamicPattern;
  double p_jam_dbm = 10.0;
  double d_jt_m = 0.2;
  env::RadioParams radio;
  agents::AgentKind agent_kind = agents::AgentKind::DDQN;
  double gamma_switch = 0.0;
  std::size_t episodes = 100;
  std::size_t steps_per_episode = 100;
  // n_inputs/n_actions are overwritten from plan.n_channels.
  agents::AgentConfig hyper;
  std::size_t window = 10;
  // +infinity disables early termination.
  double early_stop_reward = 90.0;
  std::uint64_t master_seed = 1;
  // Greedy decisions timed after training; 0 skips the measurement.
  std::size_t inference_states = 1000;

  void validate() const;
  env::EnvConfig env_config() const;
  agents::AgentConfig agent_config() const;
};

struct RunMetrics {
  std::vector<double> episode_rewards;
  std::vector<std::size_t> episode_switches;
  std::vector<std::size_t> episode_jam_hits;
  std::vector<double> moving_avg;
  std::optional<std::size_t> converged_at_episode;
  double wall_clock_train_s = 0.0;
  double inference_rate_hz = 0.0;
  double inference_rate_std_hz = 0.0;
};

struct DeployReport {
  double normalized_throughput = 0.0;
  double switch_rate = 0.0;
  std::vector<double> episode_throughput;
  std::vector<double> episode_switch_rate;
  std::vector<double> episode_rewards;
};

struct TrainResult {
  agents::Agent agent;
  RunMetrics metrics;
};

// Per-slot counters of one rollout.
struct EpisodeStats {
  double reward = 0.0;
  std::size_t switches = 0;
  std::size_t jam_hits = 0;
  std::size_t successes = 0;
  std::size_t steps = 0;
};

// Policy signature for scripted rollouts: (observation, env) -> channel.
using Policy = std::function<std::size_t(const env::SpectralState&, const env::SpectrumEnv&)>;

// Session indices used by deploy() start here so test sessions never repeat a
// training session.
inline constexpr std::uint64_t kDeploySessionBase = 1'000'000;

std::uint64_t jammer_seed(std::uint64_t master_seed);
std::uint64_t noise_seed(std::uint64_t master_seed, std::uint64_t session_index);

// Runs one full episode of `policy` in a fresh session.
EpisodeStats run_episode(env::SpectrumEnv& environment, std::uint64_t session_index,
                         std::uint64_t noise_seed_value, const Policy& policy);

TrainResult train(const RunConfig& config);

// Greedy rollouts (eps = 0, no learning) over `episodes` fresh sessions.
DeployReport deploy(const agents::Agent& agent, const RunConfig& config, std::size_t episodes);

// Same accounting as deploy() for an arbitrary policy.
DeployReport evaluate_policy(const Policy& policy, const RunConfig& config, std::size_t episodes,
                             std::uint64_t session_base = kDeploySessionBase);

std::vector<double> moving_average(std::span<const double> values, std::size_t window);

struct FoldStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> folds;

  // "mean (± std)" with the given number of decimals.
  std::string format(int decimals = 2) const;
};

FoldStats fold_stats(std::vector<double> folds);

// Greedy decisions per second over `folds` folds of `n_states` synthetic states.
FoldStats measure_inference_rate(const agents::Agent& agent, std::size_t n_states,
                                 std::uint64_t seed, std::size_t folds = 10);

// Seconds per learn_step() with a full batch available, over `folds` folds.
FoldStats measure_learn_step_time(agents::AgentKind kind, const RunConfig& config,
                                  std::size_t steps_per_fold, std::size_t folds = 10);

// The index of the strongest channel in a scan.
std::size_t strongest_channel(const env::SpectralState& state);

}  // namespace antijam::harness
