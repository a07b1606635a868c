#include "antijam/spectrum_env.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "antijam/errors.hpp"

namespace antijam::env {

namespace {

constexpr std::uint64_t kTagStrategy = 0x5354524154ULL;
constexpr std::uint64_t kTagConstant = 0x434f4e5354ULL;
constexpr std::uint64_t kTagRandom = 0x52414e444fULL;

std::uint64_t session_key(const JammerSpec& spec, std::uint64_t session_index) {
  return mix64(spec.session_seed ^ session_index);
}

// Maps a 64-bit hash onto [0, n) by multiply-high.
std::size_t bounded(std::uint64_t hash, std::size_t n) {
  const auto wide = static_cast<unsigned __int128>(hash) * static_cast<unsigned __int128>(n);
  return static_cast<std::size_t>(wide >> 64);
}

double gain_db(const RadioParams& radio, double d_m) {
  return 10.0 * std::log10(channel_gain_linear(radio.gamma0_db, d_m, radio.path_loss_exp));
}

}  // namespace

void ChannelPlan::validate() const {
  if (n_channels < 2) throw std::invalid_argument("n_channels must be >= 2");
  if (!std::isfinite(f0_mhz) || !std::isfinite(spacing_mhz) || spacing_mhz <= 0.0) {
    throw std::invalid_argument("channel plan frequencies must be finite with positive spacing");
  }
}

void RadioParams::validate() const {
  if (!(path_loss_exp >= 2.0)) throw std::invalid_argument("path_loss_exp must be >= 2");
  for (double v : {gamma0_db, noise_floor_dbm, p_tx_dbm, sinr_th_db}) {
    if (!std::isfinite(v)) throw std::invalid_argument("radio powers/gains must be finite");
  }
  if (!(d_tr_m > 0.0) || !(d_jr_m > 0.0)) throw std::invalid_argument("link distances must be > 0");
}

void EnvConfig::validate() const {
  plan.validate();
  radio.validate();
  if (!std::isfinite(jammer.p_jam_dbm)) throw std::invalid_argument("p_jam_dbm must be finite");
  if (!(jammer.d_jt_m > 0.0)) throw std::invalid_argument("d_jt_m must be > 0");
  if (!(gamma_switch >= 0.0 && gamma_switch < 1.0)) {
    throw std::invalid_argument("gamma_switch must lie in [0, 1)");
  }
  if (steps_per_episode < 1) throw std::invalid_argument("steps_per_episode must be >= 1");
  if (initial_channel >= plan.n_channels) throw std::invalid_argument("initial_channel out of range");
}

std::string_view to_string(JammerStrategy strategy) {
  switch (strategy) {
    case JammerStrategy::Constant: return "constant";
    case JammerStrategy::Sweep: return "sweep";
    case JammerStrategy::Random: return "random";
    case JammerStrategy::DynamicPattern: return "dynamic";
  }
  return "unknown";
}

JammerStrategy parse_jammer_strategy(std::string_view name) {
  if (name == "constant") return JammerStrategy::Constant;
  if (name == "sweep") return JammerStrategy::Sweep;
  if (name == "random") return JammerStrategy::Random;
  if (name == "dynamic") return JammerStrategy::DynamicPattern;
  throw std::invalid_argument("unknown jammer strategy '" + std::string(name) + "'");
}

JammerStrategy resolve_strategy(const JammerSpec& spec, std::uint64_t session_index) {
  if (spec.strategy != JammerStrategy::DynamicPattern) return spec.strategy;
  static constexpr JammerStrategy kBase[] = {JammerStrategy::Constant, JammerStrategy::Sweep,
                                             JammerStrategy::Random};
  const std::uint64_t key = session_key(spec, session_index);
  return kBase[bounded(derive_seed(key, kTagStrategy), 3)];
}

std::size_t jammed_channel(const JammerSpec& spec, std::uint64_t session_index,
                           std::uint64_t slot, std::size_t n_channels) {
  const std::uint64_t key = session_key(spec, session_index);
  switch (resolve_strategy(spec, session_index)) {
    case JammerStrategy::Constant:
      return bounded(derive_seed(key, kTagConstant), n_channels);
    case JammerStrategy::Sweep:
      // Starts at the lowest channel each session.
      return static_cast<std::size_t>(slot % n_channels);
    case JammerStrategy::Random:
      return bounded(derive_seed(derive_seed(key, kTagRandom), slot), n_channels);
    case JammerStrategy::DynamicPattern:
      break;
  }
  throw std::logic_error("unresolved jammer strategy");
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double channel_gain_linear(double gamma0_db, double d_m, double eps) {
  if (!(d_m > 0.0)) throw std::domain_error("distance must be > 0");
  return std::pow(10.0, gamma0_db / 10.0) * std::pow(d_m, -eps);
}

double sinr_linear(double p_rx_sig_dbm, double p_rx_jam_dbm, double noise_floor_dbm) {
  return dbm_to_mw(p_rx_sig_dbm) / (dbm_to_mw(p_rx_jam_dbm) + dbm_to_mw(noise_floor_dbm));
}

int normalized_throughput(double theta_linear, double theta_th_db) {
  return 10.0 * std::log10(theta_linear) >= theta_th_db ? 1 : 0;
}

double jammer_scan_power_dbm(const JammerSpec& spec, const RadioParams& radio) {
  return spec.p_jam_dbm + gain_db(radio, spec.d_jt_m);
}

SpectralState synth_state(const ChannelPlan& plan, std::size_t jam_ch, const JammerSpec& spec,
                          const RadioParams& radio, Rng& jitter, double jitter_db) {
  if (jam_ch >= plan.n_channels) throw UsageError("jammed channel out of range");
  const double jam_dbm = jammer_scan_power_dbm(spec, radio);
  SpectralState state;
  state.powers_dbm.resize(plan.n_channels);
  for (std::size_t i = 0; i < plan.n_channels; ++i) {
    const double base = (i == jam_ch) ? jam_dbm : radio.noise_floor_dbm;
    state.powers_dbm[i] = base + jitter.uniform(-jitter_db, jitter_db);
  }
  return state;
}

double reward(std::size_t user_ch, std::size_t prev_user_ch, std::size_t jam_ch,
              double gamma_switch, int throughput) {
  if (user_ch == jam_ch) return 0.0;
  return static_cast<double>(throughput) - (user_ch != prev_user_ch ? gamma_switch : 0.0);
}

SpectrumEnv::SpectrumEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  sig_rx_dbm_ = config_.radio.p_tx_dbm + gain_db(config_.radio, config_.radio.d_tr_m);
  jam_rx_dbm_ = config_.jammer.p_jam_dbm + gain_db(config_.radio, config_.radio.d_jr_m);
}

std::size_t SpectrumEnv::current_jam_channel() const {
  return jammed_channel(config_.jammer, session_, slot_, config_.plan.n_channels);
}

const SpectralState& SpectrumEnv::reset(std::uint64_t session_index, std::uint64_t noise_seed) {
  session_ = session_index;
  slot_ = 0;
  prev_action_ = config_.initial_channel;
  jitter_ = Rng(noise_seed);
  started_ = true;
  state_ = synth_state(config_.plan, current_jam_channel(), config_.jammer, config_.radio, jitter_);
  return state_;
}

StepOutcome SpectrumEnv::step(std::size_t action) {
  if (!started_) throw UsageError("step() called before reset()");
  if (done()) throw UsageError("step() called on a finished episode");
  if (action >= config_.plan.n_channels) throw UsageError("action out of range");

  StepOutcome out;
  out.jam_channel = current_jam_channel();
  out.jammed = action == out.jam_channel;
  out.switched = action != prev_action_;
  const double jam_dbm = out.jammed ? jam_rx_dbm_ : -std::numeric_limits<double>::infinity();
  out.throughput = normalized_throughput(
      sinr_linear(sig_rx_dbm_, jam_dbm, config_.radio.noise_floor_dbm), config_.radio.sinr_th_db);
  out.reward = reward(action, prev_action_, out.jam_channel, config_.gamma_switch, out.throughput);

  prev_action_ = action;
  ++slot_;
  out.done = done();
  state_ = synth_state(config_.plan, current_jam_channel(), config_.jammer, config_.radio, jitter_);
  out.next_state = state_;
  return out;
}

}  // namespace antijam::env
