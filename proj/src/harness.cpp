#include "antijam/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "antijam/qnet.hpp"
#include "antijam/rng.hpp"

namespace antijam::harness {

namespace {

constexpr std::uint64_t kTagJammer = 0x4a414d;
constexpr std::uint64_t kTagNoise = 0x4e4f4953;
constexpr std::uint64_t kTagAgent = 0x4147454e;
constexpr std::uint64_t kTagExplore = 0x4558504c;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> observe(const env::SpectralState& state) {
  return qnet::normalize_powers(state.powers_dbm);
}

// Neumaier compensated sum, so an episode total is the correctly rounded sum
// of its per-slot rewards.
class RewardSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

void RunConfig::validate() const {
  env_config().validate();
  agent_config().validate();
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (std::isnan(early_stop_reward)) throw std::invalid_argument("early_stop_reward is NaN");
}

env::EnvConfig RunConfig::env_config() const {
  env::EnvConfig cfg;
  cfg.plan = plan;
  cfg.jammer = env::JammerSpec{jammer, p_jam_dbm, d_jt_m, jammer_seed(master_seed)};
  cfg.radio = radio;
  cfg.gamma_switch = gamma_switch;
  cfg.steps_per_episode = steps_per_episode;
  cfg.initial_channel = 0;
  return cfg;
}

agents::AgentConfig RunConfig::agent_config() const {
  agents::AgentConfig cfg = hyper;
  cfg.n_inputs = plan.n_channels;
  cfg.n_actions = plan.n_channels;
  cfg.per_beta_anneal_steps = episodes * steps_per_episode;
  return cfg;
}

std::uint64_t jammer_seed(std::uint64_t master_seed) { return derive_seed(master_seed, kTagJammer); }

std::uint64_t noise_seed(std::uint64_t master_seed, std::uint64_t session_index) {
  return derive_seed(derive_seed(master_seed, kTagNoise), session_index);
}

std::size_t strongest_channel(const env::SpectralState& state) {
  return agents::argmax(state.powers_dbm);
}

EpisodeStats run_episode(env::SpectrumEnv& environment, std::uint64_t session_index,
                         std::uint64_t noise_seed_value, const Policy& policy) {
  EpisodeStats stats;
  RewardSum total;
  environment.reset(session_index, noise_seed_value);
  while (!environment.done()) {
    const std::size_t action = policy(environment.state(), environment);
    const auto out = environment.step(action);
    total.add(out.reward);
    stats.switches += out.switched ? 1 : 0;
    stats.jam_hits += out.jammed ? 1 : 0;
    stats.successes += (!out.jammed && out.throughput == 1) ? 1 : 0;
    ++stats.steps;
  }
  stats.reward = total.value();
  return stats;
}

TrainResult train(const RunConfig& config) {
  config.validate();
  env::SpectrumEnv environment(config.env_config());
  agents::Agent agent(config.agent_kind, config.agent_config(),
                      derive_seed(config.master_seed, kTagAgent));
  Rng explore(derive_seed(config.master_seed, kTagExplore));

  RunMetrics metrics;
  const auto start = Clock::now();
  double window_sum = 0.0;
  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    EpisodeStats stats;
    RewardSum total;
    auto state = observe(environment.reset(episode, noise_seed(config.master_seed, episode)));
    while (!environment.done()) {
      const std::size_t action = agent.select_action(state, explore);
      auto out = environment.step(action);
      auto next = observe(out.next_state);
      total.add(out.reward);
      stats.switches += out.switched ? 1 : 0;
      stats.jam_hits += out.jammed ? 1 : 0;
      agent.learn_step(replay::Transition{state, action, out.reward, next, out.done});
      state = std::move(next);
    }
    stats.reward = total.value();
    metrics.episode_rewards.push_back(stats.reward);
    metrics.episode_switches.push_back(stats.switches);
    metrics.episode_jam_hits.push_back(stats.jam_hits);

    window_sum += stats.reward;
    if (episode >= config.window) window_sum -= metrics.episode_rewards[episode - config.window];
    const std::size_t span = std::min(episode + 1, config.window);
    const double avg = window_sum / static_cast<double>(span);
    metrics.moving_avg.push_back(avg);

    // Early termination needs a full averaging window.
    if (episode + 1 >= config.window && avg >= config.early_stop_reward) {
      metrics.converged_at_episode = episode;
      break;
    }
  }
  metrics.wall_clock_train_s = seconds_since(start);

  if (config.inference_states > 0) {
    const auto rate = measure_inference_rate(agent, config.inference_states,
                                             derive_seed(config.master_seed, 7));
    metrics.inference_rate_hz = rate.mean;
    metrics.inference_rate_std_hz = rate.stddev;
  }
  return TrainResult{std::move(agent), std::move(metrics)};
}

DeployReport evaluate_policy(const Policy& policy, const RunConfig& config, std::size_t episodes,
                             std::uint64_t session_base) {
  config.validate();
  env::SpectrumEnv environment(config.env_config());
  DeployReport report;
  const double steps = static_cast<double>(config.steps_per_episode);
  for (std::size_t e = 0; e < episodes; ++e) {
    const std::uint64_t session = session_base + e;
    const auto stats =
        run_episode(environment, session, noise_seed(config.master_seed, session), policy);
    report.episode_throughput.push_back(static_cast<double>(stats.successes) / steps);
    report.episode_switch_rate.push_back(static_cast<double>(stats.switches) / steps);
    report.episode_rewards.push_back(stats.reward);
  }
  if (episodes > 0) {
    const double n = static_cast<double>(episodes);
    report.normalized_throughput =
        std::accumulate(report.episode_throughput.begin(), report.episode_throughput.end(), 0.0) / n;
    report.switch_rate =
        std::accumulate(report.episode_switch_rate.begin(), report.episode_switch_rate.end(), 0.0) /
        n;
  }
  return report;
}

DeployReport deploy(const agents::Agent& agent, const RunConfig& config, std::size_t episodes) {
  // A CSA is counted whenever the greedy choice differs from the channel in use.
  const Policy greedy = [&agent](const env::SpectralState& s, const env::SpectrumEnv&) {
    return agent.greedy_action(observe(s));
  };
  return evaluate_policy(greedy, config, episodes);
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window < 1) throw std::invalid_argument("moving_average window must be >= 1");
  std::vector<double> out;
  out.reserve(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    out.push_back(sum / static_cast<double>(std::min(i + 1, window)));
  }
  return out;
}

FoldStats fold_stats(std::vector<double> folds) {
  FoldStats stats;
  stats.folds = std::move(folds);
  if (stats.folds.empty()) return stats;
  const double n = static_cast<double>(stats.folds.size());
  stats.mean = std::accumulate(stats.folds.begin(), stats.folds.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : stats.folds) ss += (v - stats.mean) * (v - stats.mean);
  stats.stddev = stats.folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return stats;
}

std::string FoldStats::format(int decimals) const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f (± %.*f)", decimals, mean, decimals, stddev);
  return buf;
}

FoldStats measure_inference_rate(const agents::Agent& agent, std::size_t n_states,
                                 std::uint64_t seed, std::size_t folds) {
  if (n_states == 0) throw std::invalid_argument("n_states must be >= 1");
  const std::size_t n_channels = agent.config().n_inputs;
  env::ChannelPlan plan;
  plan.n_channels = n_channels;
  const env::JammerSpec jammer;
  const env::RadioParams radio;
  Rng rng(seed);
  std::vector<std::vector<double>> states;
  states.reserve(n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    const auto scan = env::synth_state(plan, rng.uniform_index(n_channels), jammer, radio, rng);
    states.push_back(observe(scan));
  }

  agents::Agent greedy = agent;
  greedy.set_epsilon(0.0);
  Rng decision_rng(derive_seed(seed, 1));
  std::vector<double> rates;
  volatile std::size_t sink = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const auto start = Clock::now();
    for (const auto& s : states) sink = sink + greedy.select_action(s, decision_rng);
    const double secs = seconds_since(start);
    rates.push_back(static_cast<double>(n_states) / std::max(secs, 1e-12));
  }
  return fold_stats(std::move(rates));
}

FoldStats measure_learn_step_time(agents::AgentKind kind, const RunConfig& config,
                                  std::size_t steps_per_fold, std::size_t folds) {
  RunConfig cfg = config;
  cfg.agent_kind = kind;
  cfg.validate();
  env::SpectrumEnv environment(cfg.env_config());
  agents::Agent agent(kind, cfg.agent_config(), derive_seed(cfg.master_seed, kTagAgent));
  Rng explore(derive_seed(cfg.master_seed, kTagExplore));

  const std::size_t warmup = cfg.hyper.batch_size;
  const std::size_t total = warmup + steps_per_fold * folds;
  std::vector<replay::Transition> transitions;
  transitions.reserve(total);
  std::uint64_t session = 0;
  auto state = observe(environment.reset(session, noise_seed(cfg.master_seed, session)));
  while (transitions.size() < total) {
    if (environment.done()) {
      ++session;
      state = observe(environment.reset(session, noise_seed(cfg.master_seed, session)));
    }
    const std::size_t action = explore.uniform_index(cfg.plan.n_channels);
    auto out = environment.step(action);
    auto next = observe(out.next_state);
    transitions.push_back(replay::Transition{state, action, out.reward, next, out.done});
    state = std::move(next);
  }

  std::size_t cursor = 0;
  for (; cursor < warmup; ++cursor) agent.learn_step(transitions[cursor]);
  std::vector<double> per_step;
  for (std::size_t f = 0; f < folds; ++f) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < steps_per_fold; ++i) agent.learn_step(transitions[cursor++]);
    per_step.push_back(seconds_since(start) / static_cast<double>(steps_per_fold));
  }
  return fold_stats(std::move(per_step));
}

}  // namespace antijam::harness
