#include "antijam/model_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace antijam::model_io {

namespace {
constexpr unsigned char kTrailerEnd = 0xA5;
}

void save_model(const agents::Agent& agent, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  qnet::write_params(out, agent.online());
  const auto kind = static_cast<std::uint8_t>(agent.kind());
  const double eps = agent.epsilon();
  out.write(reinterpret_cast<const char*>(&kind), 1);
  out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
  out.put(static_cast<char>(kTrailerEnd));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

agents::Agent load_model(const std::filesystem::path& path,
                         std::optional<agents::AgentKind> expected_kind,
                         std::optional<qnet::NetArch> expected_arch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path.string() + "'");
  qnet::QParams params = qnet::read_params(in, expected_arch);

  std::uint8_t kind_byte = 0;
  double eps = 0.0;
  char end = 0;
  if (!in.read(reinterpret_cast<char*>(&kind_byte), 1) ||
      !in.read(reinterpret_cast<char*>(&eps), sizeof eps) || !in.get(end)) {
    throw std::runtime_error("model file truncated");
  }
  if (static_cast<unsigned char>(end) != kTrailerEnd) throw std::runtime_error("bad model trailer");
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("unexpected bytes after model trailer");
  }
  if (kind_byte >= agents::kAllAgentKinds.size()) throw std::runtime_error("unknown agent kind");
  const auto kind = static_cast<agents::AgentKind>(kind_byte);
  if (expected_kind && *expected_kind != kind) {
    throw std::runtime_error("model holds a " + std::string(agents::to_string(kind)) +
                             " agent, expected " + std::string(agents::to_string(*expected_kind)));
  }
  if (agents::head_for(kind) != params.arch.head) {
    throw std::runtime_error("network head does not match agent kind " +
                             std::string(agents::to_string(kind)));
  }
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::runtime_error("stored epsilon out of range");

  agents::AgentConfig config;
  config.n_inputs = params.arch.input_dim;
  config.n_actions = params.arch.output_dim;
  config.hidden_dims = params.arch.hidden_dims;
  config.schedule.eps = eps;
  config.schedule.eps_min = std::min(config.schedule.eps_min, eps);
  agents::Agent agent(kind, config, 0);
  agent.set_online(std::move(params));
  if (agents::has_target_network(kind)) agent.sync_target();
  return agent;
}

}  // namespace antijam::model_io
