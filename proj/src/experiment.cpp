#include "antijam/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "antijam/model_io.hpp"

namespace antijam::experiment {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string_view to_string(Suite suite) {
  switch (suite) {
    case Suite::Train: return "train";
    case Suite::Deploy: return "deploy";
    case Suite::Timing: return "timing";
    case Suite::Full: return "full";
  }
  return "unknown";
}

Suite parse_suite(std::string_view name) {
  if (name == "train") return Suite::Train;
  if (name == "deploy") return Suite::Deploy;
  if (name == "timing") return Suite::Timing;
  if (name == "full") return Suite::Full;
  throw ConfigError("suite", "suite: unknown value '" + std::string(name) +
                                 "' (expected train, deploy, timing or full)");
}

namespace {

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, std::string(key) + ": " + what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void ExperimentConfig::validate() const {
  require(n_channels >= 2, "n_channels", "must be >= 2");
  require(finite(initial_frequency_mhz), "initial_frequency_mhz", "must be finite");
  require(finite(channel_spacing_mhz) && channel_spacing_mhz > 0, "channel_spacing_mhz",
          "must be > 0");
  require(finite(jamming_power_dbm), "jamming_power_dbm", "must be finite");
  require(jammer_distance_m > 0 && finite(jammer_distance_m), "jammer_distance_m", "must be > 0");
  require(finite(radio.gamma0_db), "gamma0_db", "must be finite");
  require(radio.path_loss_exp >= 2 && finite(radio.path_loss_exp), "path_loss_exponent",
          "must be >= 2");
  require(finite(radio.noise_floor_dbm), "noise_floor_dbm", "must be finite");
  require(finite(radio.p_tx_dbm), "tx_power_dbm", "must be finite");
  require(radio.d_tr_m > 0 && finite(radio.d_tr_m), "tx_rx_distance_m", "must be > 0");
  require(radio.d_jr_m > 0 && finite(radio.d_jr_m), "jammer_rx_distance_m", "must be > 0");
  require(finite(radio.sinr_th_db), "sinr_threshold_db", "must be finite");

  require(!agents.empty(), "agents", "must list at least one agent");
  require(!switching_costs.empty(), "switching_costs", "must list at least one value");
  for (double g : switching_costs) {
    require(g >= 0.0 && g < 1.0, "switching_costs", "every value must lie in [0, 1)");
  }
  require(!seeds.empty(), "seeds", "must list at least one seed");

  require(training_episodes >= 1, "training_episodes", "must be >= 1");
  require(testing_episodes >= 1, "testing_episodes", "must be >= 1");
  require(time_steps >= 1, "time_steps", "must be >= 1");
  require(gamma_discount >= 0.0 && gamma_discount < 1.0, "gamma_discount", "must lie in [0, 1)");
  require(initial_exploration_rate >= 0.0 && initial_exploration_rate <= 1.0,
          "initial_exploration_rate", "must lie in [0, 1]");
  require(exploration_decay >= 0.0 && finite(exploration_decay), "exploration_decay",
          "must be >= 0");
  require(min_exploration_rate >= 0.0 && min_exploration_rate <= initial_exploration_rate,
          "min_exploration_rate", "must lie in [0, initial_exploration_rate]");
  require(buffer_size >= 1, "buffer_size", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(averaging_window >= 1, "averaging_window", "must be >= 1");
  require(!early_termination_reward || finite(*early_termination_reward),
          "early_termination_reward", "must be finite or null");
  require(target_sync_period >= 1, "target_sync_period", "must be >= 1");
  require(learning_rate > 0.0 && finite(learning_rate), "learning_rate", "must be > 0");
  require(hidden_units.size() == 2, "hidden_units", "must list exactly two layer widths");
  for (std::size_t h : hidden_units) require(h >= 1, "hidden_units", "widths must be >= 1");
  require(per_alpha >= 0.0 && finite(per_alpha), "per_alpha", "must be >= 0");
  require(per_beta >= 0.0 && per_beta <= 1.0, "per_beta", "must lie in [0, 1]");
  require(per_beta_final >= 0.0 && per_beta_final <= 1.0, "per_beta_final", "must lie in [0, 1]");
  require(per_epsilon > 0.0 && finite(per_epsilon), "per_epsilon", "must be > 0");
  require(inference_states >= 1000, "inference_states", "must be >= 1000");
  require(timing_folds >= 1, "timing_folds", "must be >= 1");
  require(!output_dir.empty(), "output_dir", "must not be empty");
  require(jobs >= 1, "jobs", "must be >= 1");
}

ExperimentSpec expand(const ExperimentConfig& config) {
  config.validate();
  ExperimentSpec spec{config, {}};
  for (agents::AgentKind kind : config.agents) {
    for (double gamma_switch : config.switching_costs) {
      for (std::uint64_t seed : config.seeds) {
        harness::RunConfig run;
        run.plan = env::ChannelPlan{config.n_channels, config.initial_frequency_mhz,
                                    config.channel_spacing_mhz};
        run.jammer = config.jammer;
        run.p_jam_dbm = config.jamming_power_dbm;
        run.d_jt_m = config.jammer_distance_m;
        run.radio = config.radio;
        run.agent_kind = kind;
        run.gamma_switch = gamma_switch;
        run.episodes = config.training_episodes;
        run.steps_per_episode = config.time_steps;
        run.hyper.hidden_dims = {config.hidden_units[0], config.hidden_units[1]};
        run.hyper.gamma = config.gamma_discount;
        run.hyper.learning_rate = config.learning_rate;
        run.hyper.buffer_capacity = config.buffer_size;
        run.hyper.batch_size = config.batch_size;
        run.hyper.sync_period = config.target_sync_period;
        run.hyper.schedule = agents::ExplorationSchedule{
            config.initial_exploration_rate, config.exploration_decay, config.min_exploration_rate};
        run.hyper.per_alpha = config.per_alpha;
        run.hyper.per_beta = config.per_beta;
        run.hyper.per_beta_final = config.per_beta_final;
        run.hyper.per_epsilon = config.per_epsilon;
        run.window = config.averaging_window;
        run.early_stop_reward = config.early_termination_reward.value_or(HUGE_VAL);
        run.master_seed = seed;
        // Timing suites measure inference separately, after training.
        run.inference_states = 0;
        spec.runs.push_back(run);
      }
    }
  }
  return spec;
}

namespace {

template <typename T>
T as(const Json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, key + ": wrong value type");
  }
}

std::size_t as_count(const Json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError(key, key + ": expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

double as_real(const Json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError(key, key + ": expected a number");
  return value.get<double>();
}

using Setter = std::function<void(ExperimentConfig&, const Json&, const std::string&)>;

template <typename Field>
Setter real(Field field) {
  return [field](ExperimentConfig& c, const Json& v, const std::string& k) {
    std::invoke(field, c) = as_real(v, k);
  };
}

template <typename Field>
Setter count(Field field) {
  return [field](ExperimentConfig& c, const Json& v, const std::string& k) {
    std::invoke(field, c) = as_count(v, k);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_channels", count([](ExperimentConfig& c) -> auto& { return c.n_channels; })},
      {"initial_frequency_mhz",
       real([](ExperimentConfig& c) -> auto& { return c.initial_frequency_mhz; })},
      {"channel_spacing_mhz",
       real([](ExperimentConfig& c) -> auto& { return c.channel_spacing_mhz; })},
      {"jammer",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         try {
           c.jammer = env::parse_jammer_strategy(as<std::string>(v, k));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k, k + ": " + e.what());
         }
       }},
      {"jamming_power_dbm", real([](ExperimentConfig& c) -> auto& { return c.jamming_power_dbm; })},
      {"jammer_distance_m", real([](ExperimentConfig& c) -> auto& { return c.jammer_distance_m; })},
      {"gamma0_db", real([](ExperimentConfig& c) -> auto& { return c.radio.gamma0_db; })},
      {"path_loss_exponent",
       real([](ExperimentConfig& c) -> auto& { return c.radio.path_loss_exp; })},
      {"noise_floor_dbm", real([](ExperimentConfig& c) -> auto& { return c.radio.noise_floor_dbm; })},
      {"tx_power_dbm", real([](ExperimentConfig& c) -> auto& { return c.radio.p_tx_dbm; })},
      {"tx_rx_distance_m", real([](ExperimentConfig& c) -> auto& { return c.radio.d_tr_m; })},
      {"jammer_rx_distance_m", real([](ExperimentConfig& c) -> auto& { return c.radio.d_jr_m; })},
      {"sinr_threshold_db", real([](ExperimentConfig& c) -> auto& { return c.radio.sinr_th_db; })},
      {"agents",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k, k + ": expected an array of agent names");
         c.agents.clear();
         for (const auto& item : v) {
           try {
             c.agents.push_back(agents::parse_agent_kind(as<std::string>(item, k)));
           } catch (const std::invalid_argument& e) {
             throw ConfigError(k, k + ": " + e.what());
           }
         }
       }},
      {"switching_costs",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k, k + ": expected an array of numbers");
         c.switching_costs.clear();
         for (const auto& item : v) c.switching_costs.push_back(as_real(item, k));
       }},
      {"seeds",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k, k + ": expected an array of integers");
         c.seeds.clear();
         for (const auto& item : v) c.seeds.push_back(as_count(item, k));
       }},
      {"training_episodes", count([](ExperimentConfig& c) -> auto& { return c.training_episodes; })},
      {"testing_episodes", count([](ExperimentConfig& c) -> auto& { return c.testing_episodes; })},
      {"time_steps", count([](ExperimentConfig& c) -> auto& { return c.time_steps; })},
      {"gamma_discount", real([](ExperimentConfig& c) -> auto& { return c.gamma_discount; })},
      {"initial_exploration_rate",
       real([](ExperimentConfig& c) -> auto& { return c.initial_exploration_rate; })},
      {"exploration_decay", real([](ExperimentConfig& c) -> auto& { return c.exploration_decay; })},
      {"min_exploration_rate",
       real([](ExperimentConfig& c) -> auto& { return c.min_exploration_rate; })},
      {"buffer_size", count([](ExperimentConfig& c) -> auto& { return c.buffer_size; })},
      {"batch_size", count([](ExperimentConfig& c) -> auto& { return c.batch_size; })},
      {"averaging_window", count([](ExperimentConfig& c) -> auto& { return c.averaging_window; })},
      {"early_termination_reward",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         if (v.is_null()) {
           c.early_termination_reward.reset();
         } else {
           c.early_termination_reward = as_real(v, k);
         }
       }},
      {"target_sync_period",
       count([](ExperimentConfig& c) -> auto& { return c.target_sync_period; })},
      {"learning_rate", real([](ExperimentConfig& c) -> auto& { return c.learning_rate; })},
      {"hidden_units",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k, k + ": expected an array of integers");
         c.hidden_units.clear();
         for (const auto& item : v) c.hidden_units.push_back(as_count(item, k));
       }},
      {"per_alpha", real([](ExperimentConfig& c) -> auto& { return c.per_alpha; })},
      {"per_beta", real([](ExperimentConfig& c) -> auto& { return c.per_beta; })},
      {"per_beta_final", real([](ExperimentConfig& c) -> auto& { return c.per_beta_final; })},
      {"per_epsilon", real([](ExperimentConfig& c) -> auto& { return c.per_epsilon; })},
      {"inference_states", count([](ExperimentConfig& c) -> auto& { return c.inference_states; })},
      {"timing_folds", count([](ExperimentConfig& c) -> auto& { return c.timing_folds; })},
      {"suite",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         c.suite = parse_suite(as<std::string>(v, k));
       }},
      {"output_dir",
       [](ExperimentConfig& c, const Json& v, const std::string& k) {
         c.output_dir = as<std::string>(v, k);
       }},
      {"jobs", count([](ExperimentConfig& c) -> auto& { return c.jobs; })},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = text.find_first_not_of(" \t\r\n") == std::string::npos ? Json::object()
                                                                  : Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "malformed config: top level must be an object");
  ExperimentConfig config;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, key + ": unknown key");
    it->second(config, value, key);
  }
  config.validate();
  return config;
}

ExperimentSpec parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return expand(parse_config_text(text.str()));
}

std::string serialize_config(const ExperimentConfig& c) {
  Json doc;
  doc["n_channels"] = c.n_channels;
  doc["initial_frequency_mhz"] = c.initial_frequency_mhz;
  doc["channel_spacing_mhz"] = c.channel_spacing_mhz;
  doc["jammer"] = std::string(env::to_string(c.jammer));
  doc["jamming_power_dbm"] = c.jamming_power_dbm;
  doc["jammer_distance_m"] = c.jammer_distance_m;
  doc["gamma0_db"] = c.radio.gamma0_db;
  doc["path_loss_exponent"] = c.radio.path_loss_exp;
  doc["noise_floor_dbm"] = c.radio.noise_floor_dbm;
  doc["tx_power_dbm"] = c.radio.p_tx_dbm;
  doc["tx_rx_distance_m"] = c.radio.d_tr_m;
  doc["jammer_rx_distance_m"] = c.radio.d_jr_m;
  doc["sinr_threshold_db"] = c.radio.sinr_th_db;
  Json agent_names = Json::array();
  for (auto k : c.agents) agent_names.push_back(std::string(agents::to_string(k)));
  doc["agents"] = agent_names;
  doc["switching_costs"] = c.switching_costs;
  doc["seeds"] = c.seeds;
  doc["training_episodes"] = c.training_episodes;
  doc["testing_episodes"] = c.testing_episodes;
  doc["time_steps"] = c.time_steps;
  doc["gamma_discount"] = c.gamma_discount;
  doc["initial_exploration_rate"] = c.initial_exploration_rate;
  doc["exploration_decay"] = c.exploration_decay;
  doc["min_exploration_rate"] = c.min_exploration_rate;
  doc["buffer_size"] = c.buffer_size;
  doc["batch_size"] = c.batch_size;
  doc["averaging_window"] = c.averaging_window;
  doc["early_termination_reward"] =
      c.early_termination_reward ? Json(*c.early_termination_reward) : Json(nullptr);
  doc["target_sync_period"] = c.target_sync_period;
  doc["learning_rate"] = c.learning_rate;
  doc["hidden_units"] = c.hidden_units;
  doc["per_alpha"] = c.per_alpha;
  doc["per_beta"] = c.per_beta;
  doc["per_beta_final"] = c.per_beta_final;
  doc["per_epsilon"] = c.per_epsilon;
  doc["inference_states"] = c.inference_states;
  doc["timing_folds"] = c.timing_folds;
  doc["suite"] = std::string(to_string(c.suite));
  doc["output_dir"] = c.output_dir;
  doc["jobs"] = c.jobs;
  return doc.dump(2) + "\n";
}

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string gamma_label(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", g);
  return buf;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json to_json(const SummaryRecord& r) {
  Json j;
  j["agent"] = std::string(agents::to_string(r.agent));
  j["gamma_switch"] = r.gamma_switch;
  j["seed"] = r.seed;
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) j["error"] = r.error;
  j["episodes_run"] = r.episodes_run;
  j["converged_at"] = r.converged_at ? Json(*r.converged_at) : Json(nullptr);
  j["final_moving_avg"] = r.final_moving_avg;
  j["deploy_throughput"] = optional_json(r.deploy_throughput);
  j["switch_rate"] = optional_json(r.switch_rate);
  j["convergence_s"] = r.convergence_s;
  j["inference_rate_hz"] = optional_json(r.inference_rate_hz);
  j["inference_rate_std_hz"] = optional_json(r.inference_rate_std_hz);
  j["learn_step_s"] = optional_json(r.learn_step_s);
  j["learn_step_std_s"] = optional_json(r.learn_step_std_s);
  return j;
}

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string deploy_csv(const harness::DeployReport& report) {
  std::string body = "episode,throughput,switch_rate,reward\n";
  for (std::size_t i = 0; i < report.episode_throughput.size(); ++i) {
    body += std::to_string(i) + "," + fmt6(report.episode_throughput[i]) + "," +
            fmt6(report.episode_switch_rate[i]) + "," + fmt6(report.episode_rewards[i]) + "\n";
  }
  return body;
}

struct RunOutcome {
  SummaryRecord record;
  std::vector<double> moving_avg;
  bool io_failure = false;
};

RunOutcome execute_run(const ExperimentSpec& spec, const harness::RunConfig& run) {
  const ExperimentConfig& cfg = spec.config;
  RunOutcome outcome;
  SummaryRecord& rec = outcome.record;
  rec.agent = run.agent_kind;
  rec.gamma_switch = run.gamma_switch;
  rec.seed = run.master_seed;

  const fs::path dir = fs::path(cfg.output_dir) / run_directory(run);
  const fs::path marker = dir / ".incomplete";
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    write_file(marker, "run in progress\n");

    auto trained = harness::train(run);
    const auto& m = trained.metrics;
    rec.episodes_run = m.episode_rewards.size();
    rec.converged_at = m.converged_at_episode;
    rec.final_moving_avg = m.moving_avg.empty() ? 0.0 : m.moving_avg.back();
    rec.convergence_s = m.wall_clock_train_s;
    outcome.moving_avg = m.moving_avg;
    write_file(dir / "episodes.csv", episodes_csv(m));
    model_io::save_model(trained.agent, dir / "model.bin");

    if (cfg.suite == Suite::Deploy || cfg.suite == Suite::Full) {
      const auto report = harness::deploy(trained.agent, run, cfg.testing_episodes);
      rec.deploy_throughput = report.normalized_throughput;
      rec.switch_rate = report.switch_rate;
      write_file(dir / "deploy.csv", deploy_csv(report));
    }
    if (cfg.suite == Suite::Timing || cfg.suite == Suite::Full) {
      const auto rate = harness::measure_inference_rate(
          trained.agent, cfg.inference_states, derive_seed(run.master_seed, 7), cfg.timing_folds);
      rec.inference_rate_hz = rate.mean;
      rec.inference_rate_std_hz = rate.stddev;
      const auto step = harness::measure_learn_step_time(run.agent_kind, run, 200, cfg.timing_folds);
      rec.learn_step_s = step.mean;
      rec.learn_step_std_s = step.stddev;
    }
    fs::remove(marker, ec);
  } catch (const IoError& e) {
    rec.ok = false;
    rec.error = e.what();
    outcome.io_failure = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return outcome;
}

}  // namespace

std::string run_directory(const harness::RunConfig& run) {
  return std::string(agents::to_string(run.agent_kind)) + "/gamma_" + gamma_label(run.gamma_switch) +
         "/seed_" + std::to_string(run.master_seed);
}

std::string episodes_csv(const harness::RunMetrics& metrics) {
  std::string body = "episode,reward,moving_avg,switches,jam_hits\n";
  for (std::size_t i = 0; i < metrics.episode_rewards.size(); ++i) {
    body += std::to_string(i) + "," + fmt6(metrics.episode_rewards[i]) + "," +
            fmt6(metrics.moving_avg[i]) + "," + std::to_string(metrics.episode_switches[i]) + "," +
            std::to_string(metrics.episode_jam_hits[i]) + "\n";
  }
  return body;
}

int run_suite(const ExperimentSpec& spec, std::ostream& log) {
  const ExperimentConfig& cfg = spec.config;
  if (spec.runs.empty()) {
    log << "error: experiment has no runs\n";
    return kExitConfig;
  }
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) {
    log << "error: cannot create output directory '" << cfg.output_dir << "'\n";
    return kExitIo;
  }

  const bool timed = cfg.suite == Suite::Timing || cfg.suite == Suite::Full;
  const std::size_t jobs = timed ? 1 : std::min(cfg.jobs, spec.runs.size());
  std::vector<RunOutcome> outcomes(spec.runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < spec.runs.size(); i = next++) {
      outcomes[i] = execute_run(spec, spec.runs[i]);
      const auto& r = outcomes[i].record;
      std::lock_guard lock(log_mutex);
      log << "[" << (i + 1) << "/" << spec.runs.size() << "] " << run_directory(spec.runs[i])
          << (r.ok ? " ok" : " FAILED: " + r.error) << " episodes=" << r.episodes_run
          << " final_ma=" << fmt6(r.final_moving_avg);
      if (r.deploy_throughput) log << " throughput=" << fmt6(*r.deploy_throughput);
      if (r.switch_rate) log << " switch_rate=" << fmt6(*r.switch_rate);
      log << "\n";
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool any_failure = false;
  bool io_failure = false;
  Json summary = Json::array();
  for (const auto& o : outcomes) {
    summary.push_back(to_json(o.record));
    any_failure |= !o.record.ok;
    io_failure |= o.io_failure;
  }

  std::string learning = "series\tx\ty\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& r = outcomes[i].record;
    const std::string series = std::string(agents::to_string(r.agent)) +
                               "|gamma=" + gamma_label(r.gamma_switch) +
                               "|seed=" + std::to_string(r.seed);
    for (std::size_t e = 0; e < outcomes[i].moving_avg.size(); ++e) {
      learning += series + "\t" + std::to_string(e) + "\t" + fmt6(outcomes[i].moving_avg[e]) + "\n";
    }
  }

  // Seed-averaged deploy metrics per (agent, gamma), in grid order.
  std::string throughput = "series\tx\ty\n";
  std::string switching = "series\tx\ty\n";
  for (auto kind : cfg.agents) {
    for (double g : cfg.switching_costs) {
      double thr = 0.0, sw = 0.0;
      std::size_t n = 0;
      for (const auto& o : outcomes) {
        const auto& r = o.record;
        if (r.agent != kind || r.gamma_switch != g || !r.deploy_throughput) continue;
        thr += *r.deploy_throughput;
        sw += *r.switch_rate;
        ++n;
      }
      if (n == 0) continue;
      const std::string series(agents::to_string(kind));
      throughput += series + "\t" + fmt6(g) + "\t" + fmt6(thr / n) + "\n";
      switching += series + "\t" + fmt6(g) + "\t" + fmt6(sw / n) + "\n";
    }
  }

  std::string timing = "agent\tconvergence_time_s\tinference_speed_khz\tlearn_step_ms\n";
  if (timed) {
    for (auto kind : cfg.agents) {
      std::vector<double> conv, khz, step_ms;
      for (const auto& o : outcomes) {
        const auto& r = o.record;
        if (r.agent != kind || !r.ok) continue;
        conv.push_back(r.convergence_s);
        if (r.inference_rate_hz) khz.push_back(*r.inference_rate_hz / 1000.0);
        if (r.learn_step_s) step_ms.push_back(*r.learn_step_s * 1000.0);
      }
      timing += std::string(display_name(kind)) + "\t" + harness::fold_stats(conv).format(2) + "\t" +
                harness::fold_stats(khz).format(2) + "\t" + harness::fold_stats(step_ms).format(4) +
                "\n";
    }
  }

  try {
    const fs::path out(cfg.output_dir);
    write_file(out / "summary.json", summary.dump(2) + "\n");
    write_file(out / "plotdata_learning.tsv", learning);
    if (cfg.suite == Suite::Deploy || cfg.suite == Suite::Full) {
      write_file(out / "plotdata_throughput.tsv", throughput);
      write_file(out / "plotdata_switching.tsv", switching);
    }
    if (timed) write_file(out / "table_timing.tsv", timing);
    write_file(out / "config.json", serialize_config(cfg));
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  if (io_failure) return kExitIo;
  return any_failure ? kExitRunFailure : kExitOk;
}

}  // namespace antijam::experiment
