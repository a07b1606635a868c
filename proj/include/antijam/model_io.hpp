#pragma once

#include <filesystem>
#include <optional>

#include "antijam/agents.hpp"

namespace antijam::model_io {

// Agent model file: the Q-network container (see qnet::write_params) holding
// the online network, followed by a trailer of u8 agent kind, f64 epsilon and
// the byte 0xA5. Nothing may follow the trailer.
void save_model(const agents::Agent& agent, const std::filesystem::path& path);

// Rebuilds a greedy-ready agent (target network synced to the online one).
// Throws std::runtime_error on I/O failure, truncation, version mismatch, a
// head that disagrees with the stored kind, or a kind/arch that differs from
// the expectation when one is given.
agents::Agent load_model(const std::filesystem::path& path,
                         std::optional<agents::AgentKind> expected_kind = std::nullopt,
                         std::optional<qnet::NetArch> expected_arch = std::nullopt);

}  // namespace antijam::model_io
