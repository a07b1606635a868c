// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "antijam/agents.hpp"
#include "antijam/experiment.hpp"
#include "antijam/harness.hpp"
#include "antijam/qnet.hpp"
#include "antijam/replay.hpp"

using namespace antijam;
using agents::AgentKind;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<double> kGammas{0.0, 0.05, 0.10, 0.15};

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v) {
  std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string name(AgentKind k) { return std::string(agents::to_string(k)); }

harness::RunConfig base_run(AgentKind kind, std::uint64_t seed) {
  harness::RunConfig c;
  c.agent_kind = kind;
  c.master_seed = seed;
  c.inference_states = 0;
  return c;
}

// Training is deterministic, so results are shared between criteria.
std::map<std::tuple<AgentKind, int, double, std::uint64_t, bool>, harness::TrainResult> cache;

harness::RunConfig run_for(AgentKind kind, env::JammerStrategy jam, double gamma,
                           std::uint64_t seed, bool full_budget) {
  auto c = base_run(kind, seed);
  c.jammer = jam;
  c.gamma_switch = gamma;
  if (full_budget) c.early_stop_reward = kInf;
  return c;
}

const harness::TrainResult& trained(AgentKind kind, env::JammerStrategy jam, double gamma,
                                    std::uint64_t seed, bool full_budget) {
  const auto key = std::make_tuple(kind, int(jam), gamma, seed, full_budget);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, harness::train(run_for(kind, jam, gamma, seed, full_budget)))
      .first->second;
}

harness::FoldStats scaled(const harness::FoldStats& s, double factor) {
  std::vector<double> folds;
  for (double f : s.folds) folds.push_back(f * factor);
  return harness::fold_stats(folds);
}

// 1. Learning convergence under dynamic-pattern jamming.
Verdict learning_convergence() {
  bool pass = true;
  std::string detail;
  double slowest = 0.0;
  for (AgentKind k : {AgentKind::DQNFixedTargets, AgentKind::DDQN, AgentKind::DDQNPrioritized}) {
    int hit = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto& r = trained(k, env::JammerStrategy::DynamicPattern, 0.0, seed, false);
      const auto& ma = r.metrics.moving_avg;
      bool reached = false;
      for (std::size_t e = 9; e < ma.size(); ++e) reached |= ma[e] >= 90.0;
      hit += reached;
      slowest = std::max(slowest, r.metrics.wall_clock_train_s);
    }
    pass &= hit >= 8;
    detail += fmt("%s %d/10, ", name(k).c_str(), hit);
  }
  pass &= slowest < 60.0;
  return {pass, detail + fmt("need >= 8/10 each; slowest run %.1f s (limit 60 s)", slowest)};
}

// 2. Deployed throughput under dynamic-pattern jamming.
Verdict throughput_evasion() {
  bool pass = true;
  std::string detail;
  for (AgentKind k : {AgentKind::DDQN, AgentKind::DDQNPrioritized}) {
    detail += name(k) + " [";
    for (double g : kGammas) {
      const auto c = run_for(k, env::JammerStrategy::DynamicPattern, g, 1, true);
      const auto& r = trained(k, env::JammerStrategy::DynamicPattern, g, 1, true);
      const double thr = harness::deploy(r.agent, c, 100).normalized_throughput;
      const double need = 0.95 * (1.0 - g);
      pass &= thr >= need;
      detail += fmt(" %.3f>=%.4f", thr, need);
    }
    detail += " ] ";
  }
  return {pass, detail};
}

// 3. Deployed switch rate for every agent under sweep and dynamic jamming.
Verdict switching_behaviour() {
  bool pass = true;
  std::string detail;
  for (auto jam : {env::JammerStrategy::Sweep, env::JammerStrategy::DynamicPattern}) {
    double jam_min = 2.0;
    std::string jam_worst;
    for (AgentKind k : agents::kAllAgentKinds) {
      for (double g : kGammas) {
        const auto c = run_for(k, jam, g, 1, true);
        const double rate = harness::deploy(trained(k, jam, g, 1, true).agent, c, 100).switch_rate;
        pass &= rate >= 0.95;
        if (rate < jam_min) {
          jam_min = rate;
          jam_worst = fmt("%s/gamma=%.2f", name(k).c_str(), g);
        }
      }
    }
    detail += fmt("%s min %.3f (%s), ", std::string(env::to_string(jam)).c_str(), jam_min,
                  jam_worst.c_str());
  }
  return {pass, detail + "need >= 0.95 everywhere"};
}

// 4. Plain DQN ends below DDQN-PER.
Verdict agent_ordering() {
  int below = 0;
  std::string detail = "final MA dqn/ddqn_per:";
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double dqn = trained(AgentKind::DQN, env::JammerStrategy::DynamicPattern, 0.0, seed, true)
                           .metrics.moving_avg.back();
    const double per =
        trained(AgentKind::DDQNPrioritized, env::JammerStrategy::DynamicPattern, 0.0, seed, true)
            .metrics.moving_avg.back();
    below += dqn < per;
    detail += fmt(" %.1f/%.1f", dqn, per);
  }
  return {below >= 7, detail + fmt("; strictly below on %d/10 (need >= 7)", below)};
}

// 5. Inference and learn-step timing order.
Verdict timing_ordering() {
  const auto& dqn = trained(AgentKind::DQN, env::JammerStrategy::DynamicPattern, 0.0, 1, true);
  const auto& per =
      trained(AgentKind::DDQNPrioritized, env::JammerStrategy::DynamicPattern, 0.0, 1, true);
  const auto rate_dqn = scaled(harness::measure_inference_rate(dqn.agent, 10000, 11, 10), 1e-3);
  const auto rate_per = scaled(harness::measure_inference_rate(per.agent, 10000, 11, 10), 1e-3);
  const auto cfg = base_run(AgentKind::DQN, 1);
  const auto step_dqn =
      scaled(harness::measure_learn_step_time(AgentKind::DQN, cfg, 200, 10), 1e3);
  const auto step_per =
      scaled(harness::measure_learn_step_time(AgentKind::DDQNPrioritized, cfg, 200, 10), 1e3);
  const bool inference_ok = rate_dqn.mean >= rate_per.mean;
  const bool learn_ok = step_per.mean >= step_dqn.mean;
  return {inference_ok && learn_ok,
          "inference kHz dqn " + rate_dqn.format() + " vs ddqn_per " + rate_per.format() +
              (inference_ok ? " ok" : " WRONG ORDER") + "; learn-step ms ddqn_per " +
              step_per.format(4) + " vs dqn " + step_dqn.format(4) +
              (learn_ok ? " ok" : " WRONG ORDER")};
}

// 6. Analytic gradients against central finite differences.
Verdict gradient_oracle() {
  constexpr double kStep = 1e-5;
  constexpr double kRel = 1e-4;
  constexpr double kAbs = 1e-7;
  bool pass = true;
  std::string detail;
  for (qnet::Head head : {qnet::Head::Standard, qnet::Head::Dueling}) {
    qnet::NetArch arch;
    arch.head = head;
    Rng rng(head == qnet::Head::Standard ? 601 : 602);
    int accepted = 0, rejected = 0;
    std::size_t checked = 0;
    double worst = 0.0;
    std::uint64_t seed = 0;
    while (accepted < 100) {
      auto p = qnet::init_params(arch, ++seed);
      for (auto& l : p.layers) {
        for (auto& b : l.bias) b = rng.uniform(-0.3, 0.3);
      }
      const std::size_t k = 4;
      std::vector<std::vector<double>> states;
      std::vector<std::size_t> actions;
      std::vector<double> targets, weights;
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> s(arch.input_dim);
        for (auto& v : s) v = rng.uniform(0.0, 1.3);
        states.push_back(s);
        actions.push_back(rng.uniform_index(arch.output_dim));
        targets.push_back(rng.uniform(-2.0, 2.0));
        weights.push_back(rng.uniform(0.1, 1.0));
      }
      // Redraw fixtures with a hidden pre-activation inside the difference
      // window of a ReLU kink.
      bool near_kink = false;
      for (const auto& s : states) {
        std::vector<double> h = s;
        for (int layer = 0; layer < 2; ++layer) {
          const auto& l = p.layers[layer];
          std::vector<double> z(l.out);
          for (std::size_t r = 0; r < l.out; ++r) {
            double acc = l.bias[r];
            for (std::size_t c = 0; c < l.in; ++c) acc += l.w(r, c) * h[c];
            near_kink |= std::abs(acc) < 1e-3;
            z[r] = std::max(0.0, acc);
          }
          h = z;
        }
      }
      if (near_kink) {
        ++rejected;
        continue;
      }
      ++accepted;

      const auto grads = qnet::td_loss(p, states, actions, targets, weights).grads;
      auto probe = p;
      auto tensors = probe.tensors();
      const auto g = grads.tensors();
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        for (std::size_t j = 0; j < tensors[t].size(); ++j) {
          const double orig = tensors[t][j];
          tensors[t][j] = orig + kStep;
          const double up = qnet::td_loss(probe, states, actions, targets, weights).loss;
          tensors[t][j] = orig - kStep;
          const double down = qnet::td_loss(probe, states, actions, targets, weights).loss;
          tensors[t][j] = orig;
          const double numeric = (up - down) / (2.0 * kStep);
          const double err = std::abs(g[t][j] - numeric);
          const double allowed = kRel * std::max(std::abs(g[t][j]), std::abs(numeric)) + kAbs;
          worst = std::max(worst, err / allowed);
          pass &= err <= allowed;
          ++checked;
        }
      }
    }
    detail += fmt("%s: 100 fixtures (%d redrawn), %zu params, worst err/allowed %.3f; ",
                  head == qnet::Head::Standard ? "standard" : "dueling", rejected, checked, worst);
  }
  return {pass, detail + "rel 1e-4, abs floor 1e-7"};
}

replay::Transition tagged(std::size_t i) {
  replay::Transition t;
  t.state = {double(i)};
  t.next_state = {double(i)};
  t.action = i;
  return t;
}

// 7. Sum-tree consistency, proportional sampling, alpha = 0 uniformity.
Verdict replay_oracles() {
  std::string detail;

  // Exact consistency: internal sums are recomputed from children, so exact
  // equality is required.
  bool tree_ok = true;
  {
    replay::SumTree tree(50);
    Rng rng(71);
    for (int op = 0; op < 10000; ++op) {
      tree.set(rng.uniform_index(50), rng.uniform() < 0.05 ? 0.0 : rng.uniform(0.0, 5.0));
      const auto n = tree.nodes();
      for (std::size_t i = 1; i < tree.leaf_count(); ++i) tree_ok &= n[i] == n[2 * i] + n[2 * i + 1];
    }
  }
  detail += fmt("sum tree 10k ops %s; ", tree_ok ? "exact" : "INCONSISTENT");

  bool freq_ok = true;
  double worst_dev = 0.0;
  {
    replay::PrioritizedBuffer buf(6, 1.0);
    const double pr[] = {0.5, 1.0, 1.5, 2.0, 4.0, 1.0};
    const double total = 10.0;
    for (std::size_t i = 0; i < 6; ++i) buf.push(tagged(i), pr[i]);
    Rng rng(72);
    std::vector<int> counts(6, 0);
    const int n = 100000;
    for (int d = 0; d < n / 32 + 1; ++d) {
      for (auto idx : buf.sample(32, 0.4, rng).indices) ++counts[idx];
    }
    const int drawn = (n / 32 + 1) * 32;
    for (std::size_t i = 0; i < 6; ++i) {
      const double dev = std::abs(counts[i] / double(drawn) - pr[i] / total);
      worst_dev = std::max(worst_dev, dev);
      freq_ok &= dev <= 0.01;
    }
  }
  detail += fmt("PER freq worst |f-P| %.4f (<= 0.01); ", worst_dev);

  // Two-sample chi-square homogeneity: alpha = 0 PER vs the uniform buffer.
  double chi2 = 0.0;
  {
    const std::size_t n_items = 8;
    replay::PrioritizedBuffer per(n_items, 0.0);
    replay::UniformBuffer uni(n_items);
    Rng prio_rng(73);
    for (std::size_t i = 0; i < n_items; ++i) {
      uni.push(tagged(i));
      per.push(tagged(i), 1.0);
    }
    std::vector<std::size_t> idx;
    std::vector<double> err;
    for (std::size_t i = 0; i < n_items; ++i) {
      idx.push_back(i);
      err.push_back(prio_rng.uniform(0.0, 10.0));
    }
    per.update(idx, err);
    std::vector<double> a(n_items, 0.0), b(n_items, 0.0);
    Rng ra(74), rb(75);
    for (int d = 0; d < 100000 / int(n_items); ++d) {
      for (auto i : per.sample(n_items, 0.4, ra).indices) a[i] += 1;
      for (const auto& t : uni.sample(n_items, rb)) b[t.action] += 1;
    }
    const double na = std::accumulate(a.begin(), a.end(), 0.0);
    const double nb = std::accumulate(b.begin(), b.end(), 0.0);
    for (std::size_t i = 0; i < n_items; ++i) {
      const double pooled = (a[i] + b[i]) / (na + nb);
      const double ea = pooled * na, eb = pooled * nb;
      chi2 += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    }
  }
  // 7 degrees of freedom, 1% significance.
  const double critical = 18.475;
  const bool uniform_ok = chi2 < critical;
  detail += fmt("alpha=0 vs uniform chi2 %.2f (< %.3f, df 7, p 0.01)", chi2, critical);
  return {tree_ok && freq_ok && uniform_ok, detail};
}

// 8. Scripted hop policy against a sweep jammer.
Verdict environment_oracle() {
  bool pass = true;
  std::string detail;
  const harness::Policy hop = [](const env::SpectralState&, const env::SpectrumEnv& e) {
    return (e.current_jam_channel() + 1) % e.config().plan.n_channels;
  };
  for (double g : kGammas) {
    harness::RunConfig c;
    c.jammer = env::JammerStrategy::Sweep;
    c.gamma_switch = g;
    const auto report = harness::evaluate_policy(hop, c, 100);
    // First action is channel 1 and the initial channel is 0, so the
    // first-slot correction term is zero.
    const bool first_unchanged = (0 + 1) % c.plan.n_channels == 0;
    const double expect = c.steps_per_episode * (1.0 - g) + g * (first_unchanged ? 1.0 : 0.0);
    bool exact = true;
    for (double r : report.episode_rewards) exact &= r == expect;
    pass &= exact;
    detail += fmt("gamma=%.2f %s%.2f, ", g, exact ? "every episode == " : "MISMATCH vs ", expect);
  }
  return {pass, detail + "100 episodes each"};
}

// 9. Two-state MDP solved by every variant.
Verdict mdp_oracle() {
  constexpr double kGamma = 0.9;
  auto next = [](std::size_t, std::size_t a) -> std::size_t { return a == 0 ? 0 : 1; };
  auto reward = [](std::size_t s, std::size_t a) {
    if (s == 0) return a == 0 ? 0.3 : 0.0;
    return a == 0 ? 1.0 : 0.0;
  };
  auto encode = [](std::size_t s) {
    return s == 0 ? std::vector<double>{1, 0} : std::vector<double>{0, 1};
  };
  double q[2][2] = {};
  for (int it = 0; it < 2000; ++it) {
    double nq[2][2];
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        const std::size_t n = next(s, a);
        nq[s][a] = reward(s, a) + kGamma * std::max(q[n][0], q[n][1]);
      }
    }
    std::copy(&nq[0][0], &nq[0][0] + 4, &q[0][0]);
  }
  const std::size_t opt[2] = {q[0][1] > q[0][0] ? 1u : 0u, q[1][1] > q[1][0] ? 1u : 0u};

  bool pass = true;
  std::string detail = fmt("optimal policy (%zu, %zu); ", opt[0], opt[1]);
  for (AgentKind k : agents::kAllAgentKinds) {
    agents::AgentConfig cfg;
    cfg.n_inputs = 2;
    cfg.n_actions = 2;
    cfg.gamma = kGamma;
    cfg.learning_rate = 1e-2;
    cfg.per_beta_anneal_steps = 5000;
    agents::Agent agent(k, cfg, 21);
    Rng rng(99);
    for (int i = 0; i < 5000; ++i) {
      const std::size_t s = rng.uniform_index(2);
      const std::size_t a = rng.uniform_index(2);
      agent.learn_step(replay::Transition{encode(s), a, reward(s, a), encode(next(s, a)), false});
    }
    const std::size_t g0 = agent.greedy_action(encode(0));
    const std::size_t g1 = agent.greedy_action(encode(1));
    const bool ok = g0 == opt[0] && g1 == opt[1];
    pass &= ok;
    detail += fmt("%s %s, ", name(k).c_str(), ok ? "ok" : "WRONG");
  }
  return {pass, detail + "5000 learn steps"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Identical config and seed give identical episodes.csv bytes.
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "antijam_acceptance_determinism";
  fs::remove_all(root);
  experiment::ExperimentConfig cfg;
  cfg.agents = {AgentKind::DQN, AgentKind::DDQNPrioritized};
  cfg.switching_costs = {0.05};
  cfg.suite = experiment::Suite::Train;
  std::vector<std::string> bodies[2];
  for (int pass = 0; pass < 2; ++pass) {
    cfg.output_dir = (root / ("exec" + std::to_string(pass))).string();
    const auto spec = experiment::expand(cfg);
    std::ostringstream log;
    if (experiment::run_suite(spec, log) != experiment::kExitOk) {
      return {false, "run_suite failed: " + log.str()};
    }
    for (const auto& run : spec.runs) {
      bodies[pass].push_back(slurp(fs::path(cfg.output_dir) / experiment::run_directory(run) /
                                   "episodes.csv"));
    }
  }
  fs::remove_all(root);
  const bool same = bodies[0] == bodies[1] && !bodies[0].empty() && !bodies[0][0].empty();
  std::size_t bytes = 0;
  for (const auto& b : bodies[0]) bytes += b.size();
  return {same, fmt("%zu runs, %zu CSV bytes, %s", bodies[0].size(), bytes,
                    same ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  report(1, "learning convergence", learning_convergence());
  report(2, "throughput evasion", throughput_evasion());
  report(3, "switching behaviour", switching_behaviour());
  report(4, "relative agent ordering", agent_ordering());
  report(5, "timing ordering", timing_ordering());
  report(6, "gradient oracle", gradient_oracle());
  report(7, "replay oracles", replay_oracles());
  report(8, "environment oracle", environment_oracle());
  report(9, "MDP fixture oracle", mdp_oracle());
  report(10, "determinism", determinism());
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
