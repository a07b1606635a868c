#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "antijam/rng.hpp"

namespace antijam::env {

struct ChannelPlan {
  std::size_t n_channels = 8;
  double f0_mhz = 5180.0;
  double spacing_mhz = 20.0;

  double center_mhz(std::size_t channel) const {
    return f0_mhz + static_cast<double>(channel) * spacing_mhz;
  }
  void validate() const;
  bool operator==(const ChannelPlan&) const = default;
};

enum class JammerStrategy { Constant, Sweep, Random, DynamicPattern };

std::string_view to_string(JammerStrategy strategy);
// Accepts "constant", "sweep", "random", "dynamic".
JammerStrategy parse_jammer_strategy(std::string_view name);

struct JammerSpec {
  JammerStrategy strategy = JammerStrategy::DynamicPattern;
  double p_jam_dbm = 10.0;
  double d_jt_m = 0.2;
  std::uint64_t session_seed = 0;

  bool operator==(const JammerSpec&) const = default;
};

struct RadioParams {
  double gamma0_db = -40.0;
  double path_loss_exp = 2.0;
  double noise_floor_dbm = -95.0;
  double p_tx_dbm = 15.0;
  double d_tr_m = 5.0;
  double d_jr_m = 0.2;
  double sinr_th_db = 10.0;

  void validate() const;
  bool operator==(const RadioParams&) const = default;
};

// Received power per channel, in dBm. Entry i belongs to channel i.
struct SpectralState {
  std::vector<double> powers_dbm;
};

struct StepOutcome {
  SpectralState next_state;
  double reward = 0.0;
  bool jammed = false;
  bool switched = false;
  bool done = false;
  std::size_t jam_channel = 0;
  int throughput = 0;
};

// Jitter applied to every synthesized power entry is Uniform(-kJitterDb, +kJitterDb).
inline constexpr double kJitterDb = 2.0;

// DynamicPattern resolves to the base strategy drawn for this session; the
// other strategies resolve to themselves.
JammerStrategy resolve_strategy(const JammerSpec& spec, std::uint64_t session_index);

// Channel jammed in `slot` of session `session_index`. Pure function of its inputs.
std::size_t jammed_channel(const JammerSpec& spec, std::uint64_t session_index,
                           std::uint64_t slot, std::size_t n_channels);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// gamma0 * d^-eps as a linear ratio. Throws std::domain_error for d <= 0.
double channel_gain_linear(double gamma0_db, double d_m, double eps);

// Linear SINR. Pass -infinity for p_rx_jam_dbm on an unjammed channel.
double sinr_linear(double p_rx_sig_dbm, double p_rx_jam_dbm, double noise_floor_dbm);

// 1 when the SINR in dB meets the threshold (inclusive), else 0.
int normalized_throughput(double theta_linear, double theta_th_db);

// Jammer power as seen by the transmitter's spectrum scan, before jitter.
double jammer_scan_power_dbm(const JammerSpec& spec, const RadioParams& radio);

SpectralState synth_state(const ChannelPlan& plan, std::size_t jam_ch, const JammerSpec& spec,
                          const RadioParams& radio, Rng& jitter, double jitter_db = kJitterDb);

double reward(std::size_t user_ch, std::size_t prev_user_ch, std::size_t jam_ch,
              double gamma_switch, int throughput);

struct EnvConfig {
  ChannelPlan plan;
  JammerSpec jammer;
  RadioParams radio;
  double gamma_switch = 0.0;
  std::size_t steps_per_episode = 100;
  std::size_t initial_channel = 0;

  void validate() const;
};

// One transmitter/receiver pair against one proactive jammer, advanced one
// slot per step. The state observed before acting in slot t describes the
// jamming of slot t.
class SpectrumEnv {
 public:
  explicit SpectrumEnv(EnvConfig config);

  // Starts a session and returns the observation for slot 0.
  const SpectralState& reset(std::uint64_t session_index, std::uint64_t noise_seed);

  StepOutcome step(std::size_t action);

  const SpectralState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  std::size_t slot() const { return slot_; }
  bool done() const { return slot_ >= config_.steps_per_episode; }
  std::size_t current_channel() const { return prev_action_; }
  std::size_t current_jam_channel() const;
  std::uint64_t session_index() const { return session_; }

 private:
  EnvConfig config_;
  double sig_rx_dbm_;
  double jam_rx_dbm_;
  std::uint64_t session_ = 0;
  std::size_t slot_ = 0;
  std::size_t prev_action_ = 0;
  bool started_ = false;
  Rng jitter_{0};
  SpectralState state_;
};

}  // namespace antijam::env
