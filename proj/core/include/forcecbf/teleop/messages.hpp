#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "forcecbf/simulator.hpp"

namespace forcecbf::teleop {

inline constexpr int kSchemaVersion = 1;

class MessageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StateMessage {
  std::int64_t tick = 0;
  double t = 0.0;
  Pose pose;
  Wrench compensated_wrench;
  Vector6d per_axis_margin = Vector6d::Zero();
  SafetyLimits limits;
  double slack = 0.0;
  std::optional<qp::QpStatus> qp_status;
};

enum class CommandKind { apply_wrench, set_target, set_limits, pause, reset };

struct CommandMessage {
  CommandKind kind = CommandKind::apply_wrench;
  std::string client_id;
  std::int64_t sequence_number = 0;
  Wrench wrench;        // apply_wrench
  Pose target;          // set_target
  SafetyLimits limits;  // set_limits
  bool paused = true;   // pause
};

std::string_view to_string(CommandKind kind);

StateMessage make_state(std::int64_t tick, const TraceRecord& rec, const SafetyLimits& limits);

nlohmann::json to_json(const StateMessage& m);
nlohmann::json to_json(const CommandMessage& m);

/// Throws MessageError describing the first problem found.
CommandMessage command_from_json(const nlohmann::json& j);
CommandMessage parse_command(std::string_view text);

/// Sent once per connection before any state.
nlohmann::json hello_message(const ScenarioConfig& config, const Wrench& envelope);
nlohmann::json error_message(const std::string& reason,
                             std::optional<std::int64_t> sequence_number = std::nullopt);

}  // namespace forcecbf::teleop
