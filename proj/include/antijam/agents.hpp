#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "antijam/qnet.hpp"
#include "antijam/replay.hpp"
#include "antijam/rng.hpp"

namespace antijam::agents {

enum class AgentKind : std::uint8_t {
  DQN = 0,
  DQNFixedTargets = 1,
  DDQN = 2,
  DuelingDQN = 3,
  DDQNPrioritized = 4,
};

inline constexpr std::array<AgentKind, 5> kAllAgentKinds{
    AgentKind::DQN, AgentKind::DQNFixedTargets, AgentKind::DDQN, AgentKind::DuelingDQN,
    AgentKind::DDQNPrioritized};

// Short names: dqn, dqn_fixed_targets, ddqn, dueling_dqn, ddqn_per.
std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);
std::string_view display_name(AgentKind kind);

bool has_target_network(AgentKind kind);
bool uses_double_q(AgentKind kind);
bool uses_prioritized_replay(AgentKind kind);
qnet::Head head_for(AgentKind kind);

struct ExplorationSchedule {
  double eps = 1.0;
  double delta = 0.005;
  double eps_min = 0.01;

  void decay() { eps = eps - delta < eps_min ? eps_min : eps - delta; }
  bool operator==(const ExplorationSchedule&) const = default;
};

struct AgentConfig {
  std::size_t n_inputs = 8;
  std::size_t n_actions = 8;
  std::array<std::size_t, 2> hidden_dims{64, 64};
  double gamma = 0.95;
  double learning_rate = 1e-3;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 32;
  // Learn steps between target syncs for kinds with a target network.
  std::size_t sync_period = 50;
  ExplorationSchedule schedule;
  double per_alpha = 0.6;
  double per_beta = 0.4;
  double per_beta_final = 1.0;
  // Steps over which beta is annealed linearly to per_beta_final.
  std::size_t per_beta_anneal_steps = 10000;
  double per_epsilon = 1e-6;

  void validate() const;
  bool operator==(const AgentConfig&) const = default;
};

class Agent {
 public:
  Agent(AgentKind kind, AgentConfig config, std::uint64_t seed);

  AgentKind kind() const { return kind_; }
  const AgentConfig& config() const { return config_; }
  const ExplorationSchedule& schedule() const { return schedule_; }
  double epsilon() const { return schedule_.eps; }
  void set_epsilon(double eps) { schedule_.eps = eps; }
  std::size_t step_count() const { return steps_; }
  std::size_t replay_size() const;
  double current_beta() const;

  // Epsilon-greedy: draws X ~ U(0,1) and explores when X < eps.
  std::size_t select_action(std::span<const double> state, Rng& rng) const;
  // Argmax of the online network, ties to the lowest index.
  std::size_t greedy_action(std::span<const double> state) const;

  std::vector<double> compute_targets(std::span<const replay::Transition> batch) const;

  // Stores the transition and, once the buffer holds a batch, performs one SGD
  // update. Returns the batch loss when an update happened.
  std::optional<double> learn_step(replay::Transition transition);

  void sync_target();

  const qnet::QParams& online() const { return online_; }
  const qnet::QParams* target() const { return target_ ? &*target_ : nullptr; }
  void set_online(qnet::QParams params);
  void set_target(qnet::QParams params);

  const replay::UniformBuffer* uniform_buffer() const;
  const replay::PrioritizedBuffer* prioritized_buffer() const;

 private:
  const qnet::QParams& bootstrap_net() const;

  AgentKind kind_;
  AgentConfig config_;
  qnet::QParams online_;
  std::optional<qnet::QParams> target_;
  ExplorationSchedule schedule_;
  std::variant<replay::UniformBuffer, replay::PrioritizedBuffer> buffer_;
  Rng sample_rng_;
  std::size_t steps_ = 0;
};

std::size_t argmax(std::span<const double> values);

}  // namespace antijam::agents
