#include "antijam/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "antijam/errors.hpp"

namespace antijam::agents {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::DQN: return "dqn";
    case AgentKind::DQNFixedTargets: return "dqn_fixed_targets";
    case AgentKind::DDQN: return "ddqn";
    case AgentKind::DuelingDQN: return "dueling_dqn";
    case AgentKind::DDQNPrioritized: return "ddqn_per";
  }
  return "unknown";
}

std::string_view display_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::DQN: return "DQN";
    case AgentKind::DQNFixedTargets: return "DQN with Fixed Targets";
    case AgentKind::DDQN: return "DDQN";
    case AgentKind::DuelingDQN: return "Dueling DQN";
    case AgentKind::DDQNPrioritized: return "DDQN with Prioritized Replay";
  }
  return "unknown";
}

AgentKind parse_agent_kind(std::string_view name) {
  for (AgentKind k : kAllAgentKinds) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown agent kind '" + std::string(name) + "'");
}

bool has_target_network(AgentKind kind) { return kind != AgentKind::DQN; }

bool uses_double_q(AgentKind kind) {
  return kind == AgentKind::DDQN || kind == AgentKind::DDQNPrioritized;
}

bool uses_prioritized_replay(AgentKind kind) { return kind == AgentKind::DDQNPrioritized; }

qnet::Head head_for(AgentKind kind) {
  return kind == AgentKind::DuelingDQN ? qnet::Head::Dueling : qnet::Head::Standard;
}

void AgentConfig::validate() const {
  if (n_inputs == 0 || n_actions < 1) throw std::invalid_argument("agent dimensions must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (buffer_capacity < 1 || batch_size < 1) {
    throw std::invalid_argument("buffer_capacity and batch_size must be >= 1");
  }
  if (sync_period < 1) throw std::invalid_argument("sync_period must be >= 1");
  if (!(schedule.eps_min >= 0.0 && schedule.eps_min <= schedule.eps && schedule.eps <= 1.0)) {
    throw std::invalid_argument("exploration rates must satisfy 0 <= eps_min <= eps <= 1");
  }
  if (!(schedule.delta >= 0.0)) throw std::invalid_argument("exploration decay must be >= 0");
  if (!(per_alpha >= 0.0)) throw std::invalid_argument("per_alpha must be >= 0");
  if (!(per_beta >= 0.0 && per_beta <= 1.0 && per_beta_final >= 0.0 && per_beta_final <= 1.0)) {
    throw std::invalid_argument("per_beta values must lie in [0, 1]");
  }
  if (!(per_epsilon > 0.0)) throw std::invalid_argument("per_epsilon must be > 0");
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

namespace {

std::variant<replay::UniformBuffer, replay::PrioritizedBuffer> make_buffer(
    AgentKind kind, const AgentConfig& config) {
  if (uses_prioritized_replay(kind)) {
    return replay::PrioritizedBuffer(config.buffer_capacity, config.per_alpha, config.per_epsilon);
  }
  return replay::UniformBuffer(config.buffer_capacity);
}

qnet::NetArch arch_for(AgentKind kind, const AgentConfig& config) {
  return qnet::NetArch{config.n_inputs, config.hidden_dims, config.n_actions, head_for(kind)};
}

}  // namespace

Agent::Agent(AgentKind kind, AgentConfig config, std::uint64_t seed)
    : kind_(kind),
      config_((config.validate(), config)),
      online_(qnet::init_params(arch_for(kind, config_), derive_seed(seed, 1))),
      schedule_(config_.schedule),
      buffer_(make_buffer(kind, config_)),
      sample_rng_(derive_seed(seed, 2)) {
  if (has_target_network(kind_)) target_ = online_;
}

std::size_t Agent::replay_size() const {
  return std::visit([](const auto& b) { return b.size(); }, buffer_);
}

double Agent::current_beta() const {
  if (config_.per_beta_anneal_steps == 0) return config_.per_beta_final;
  const double frac = std::min(
      1.0, static_cast<double>(steps_) / static_cast<double>(config_.per_beta_anneal_steps));
  return config_.per_beta + frac * (config_.per_beta_final - config_.per_beta);
}

std::size_t Agent::greedy_action(std::span<const double> state) const {
  const auto q = qnet::forward(online_, state);
  return argmax(q);
}

std::size_t Agent::select_action(std::span<const double> state, Rng& rng) const {
  const double x = rng.uniform();
  if (x < schedule_.eps) return rng.uniform_index(config_.n_actions);
  return greedy_action(state);
}

const qnet::QParams& Agent::bootstrap_net() const { return target_ ? *target_ : online_; }

std::vector<double> Agent::compute_targets(std::span<const replay::Transition> batch) const {
  std::vector<double> y(batch.size());
  const qnet::QParams& evaluator = bootstrap_net();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    if (t.done) {
      y[i] = t.reward;
      continue;
    }
    double bootstrap = 0.0;
    if (uses_double_q(kind_)) {
      const std::size_t a_star = argmax(qnet::forward(online_, t.next_state));
      bootstrap = qnet::forward(evaluator, t.next_state)[a_star];
    } else {
      const auto q = qnet::forward(evaluator, t.next_state);
      bootstrap = *std::max_element(q.begin(), q.end());
    }
    y[i] = t.reward + config_.gamma * bootstrap;
  }
  return y;
}

std::optional<double> Agent::learn_step(replay::Transition transition) {
  if (transition.state.size() != config_.n_inputs ||
      transition.next_state.size() != config_.n_inputs) {
    throw UsageError("transition state length does not match the network input");
  }
  if (transition.action >= config_.n_actions) throw UsageError("transition action out of range");

  std::optional<double> loss;
  const std::size_t k = config_.batch_size;
  if (auto* uniform = std::get_if<replay::UniformBuffer>(&buffer_)) {
    uniform->push(std::move(transition));
    if (uniform->size() >= k) {
      const auto batch = uniform->sample(k, sample_rng_);
      std::vector<std::vector<double>> states;
      std::vector<std::size_t> actions;
      states.reserve(k);
      actions.reserve(k);
      for (const auto& t : batch) {
        states.push_back(t.state);
        actions.push_back(t.action);
      }
      const auto targets = compute_targets(batch);
      const std::vector<double> weights(k, 1.0);
      auto result = qnet::td_loss(online_, states, actions, targets, weights);
      qnet::sgd_step(online_, result.grads, config_.learning_rate);
      loss = result.loss;
    }
  } else {
    auto& per = std::get<replay::PrioritizedBuffer>(buffer_);
    per.push(std::move(transition));
    if (per.size() >= k) {
      const auto sample = per.sample(k, current_beta(), sample_rng_);
      std::vector<std::vector<double>> states;
      std::vector<std::size_t> actions;
      states.reserve(k);
      actions.reserve(k);
      for (const auto& t : sample.transitions) {
        states.push_back(t.state);
        actions.push_back(t.action);
      }
      const auto targets = compute_targets(sample.transitions);
      auto result = qnet::td_loss(online_, states, actions, targets, sample.is_weights);
      qnet::sgd_step(online_, result.grads, config_.learning_rate);
      per.update(sample.indices, result.residuals);
      loss = result.loss;
    }
  }

  schedule_.decay();
  ++steps_;
  if (target_ && steps_ % config_.sync_period == 0) sync_target();
  return loss;
}

void Agent::sync_target() {
  if (!has_target_network(kind_)) {
    throw UsageError(std::string(to_string(kind_)) + " has no target network to sync");
  }
  target_ = online_;
}

void Agent::set_online(qnet::QParams params) {
  if (params.arch != online_.arch) throw UsageError("online network architecture mismatch");
  online_ = std::move(params);
}

void Agent::set_target(qnet::QParams params) {
  if (!target_) throw UsageError(std::string(to_string(kind_)) + " has no target network");
  if (params.arch != online_.arch) throw UsageError("target network architecture mismatch");
  target_ = std::move(params);
}

const replay::UniformBuffer* Agent::uniform_buffer() const {
  return std::get_if<replay::UniformBuffer>(&buffer_);
}

const replay::PrioritizedBuffer* Agent::prioritized_buffer() const {
  return std::get_if<replay::PrioritizedBuffer>(&buffer_);
}

}  // namespace antijam::agents
