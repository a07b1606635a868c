// Experiment runner: trains, deploys and times the anti-jamming agents over a
// grid of agents x switching costs x seeds and writes CSV/JSON/TSV artifacts.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "antijam/experiment.hpp"

namespace ex = antijam::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Deep-Q anti-jamming experiment runner"};

  std::string config_path;
  std::optional<std::string> suite;
  std::vector<std::string> agent_names;
  std::vector<double> gamma_switch;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> episodes;
  std::optional<std::string> jammer;
  std::optional<std::size_t> jobs;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON config file (unset keys take defaults)");
  app.add_option("--suite", suite, "train, deploy, timing or full");
  app.add_option("--agent", agent_names,
                 "agent(s): dqn, dqn_fixed_targets, ddqn, dueling_dqn, ddqn_per")
      ->delimiter(',');
  app.add_option("--gamma-switch", gamma_switch, "channel switching cost(s)")->delimiter(',');
  app.add_option("--seed", seeds, "master seed(s)")->delimiter(',');
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--episodes", episodes, "training episodes per run");
  app.add_option("--jammer", jammer, "constant, sweep, random or dynamic");
  app.add_option("--jobs", jobs, "parallel runs (timing suites always use 1)");
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ex::kExitOk : ex::kExitConfig;
  }

  ex::ExperimentSpec spec;
  try {
    ex::ExperimentConfig config =
        config_path.empty() ? ex::ExperimentConfig{} : ex::parse_config(config_path).config;
    if (suite) config.suite = ex::parse_suite(*suite);
    if (!agent_names.empty()) {
      config.agents.clear();
      for (const auto& name : agent_names) {
        try {
          config.agents.push_back(antijam::agents::parse_agent_kind(name));
        } catch (const std::invalid_argument& e) {
          throw ex::ConfigError("agent", std::string("--agent: ") + e.what());
        }
      }
    }
    if (!gamma_switch.empty()) config.switching_costs = gamma_switch;
    if (!seeds.empty()) config.seeds = seeds;
    if (out_dir) config.output_dir = *out_dir;
    if (episodes) config.training_episodes = *episodes;
    if (jammer) {
      try {
        config.jammer = antijam::env::parse_jammer_strategy(*jammer);
      } catch (const std::invalid_argument& e) {
        throw ex::ConfigError("jammer", std::string("--jammer: ") + e.what());
      }
    }
    if (jobs) config.jobs = *jobs;
    spec = ex::expand(config);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ex::kExitConfig;
  }

  if (print_config) {
    std::cout << ex::serialize_config(spec.config);
    return ex::kExitOk;
  }
  std::cerr << "running " << spec.runs.size() << " run(s), suite "
            << ex::to_string(spec.config.suite) << ", output " << spec.config.output_dir << "\n";
  return ex::run_suite(spec, std::cerr);
}
