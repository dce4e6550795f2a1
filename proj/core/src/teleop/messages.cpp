#include "forcecbf/teleop/messages.hpp"

#include "forcecbf/scenario.hpp"
#include "forcecbf/trace_io.hpp"

namespace forcecbf::teleop {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw MessageError(std::string("missing field '") + key + "'");
  return *it;
}

Wrench wrench_from_vector6(const json& j) {
  if (!j.is_array() || j.size() != 6) throw MessageError("wrench must be an array of 6 numbers");
  Vector6d v;
  for (int i = 0; i < 6; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw MessageError("wrench must be numeric");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (!v.allFinite()) throw MessageError("wrench must be finite");
  return Wrench::from_vector(v);
}

json vector6(const Vector6d& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::apply_wrench: return "apply_wrench";
    case CommandKind::set_target: return "set_target";
    case CommandKind::set_limits: return "set_limits";
    case CommandKind::pause: return "pause";
    case CommandKind::reset: return "reset";
  }
  return "unknown";
}

StateMessage make_state(std::int64_t tick, const TraceRecord& rec, const SafetyLimits& limits) {
  StateMessage m;
  m.tick = tick;
  m.t = rec.t;
  m.pose = rec.pose;
  m.compensated_wrench = rec.compensated_wrench;
  m.per_axis_margin = rec.per_axis_margin;
  m.limits = limits;
  m.slack = rec.slack;
  m.qp_status = rec.qp_status;
  return m;
}

json to_json(const StateMessage& m) {
  return {{"type", "state"},
          {"v", kSchemaVersion},
          {"tick", m.tick},
          {"t", m.t},
          {"pose", forcecbf::to_json(m.pose)},
          {"compensated_wrench", forcecbf::to_json(m.compensated_wrench)},
          {"per_axis_margin", vector6(m.per_axis_margin)},
          {"limits", forcecbf::to_json(m.limits.w_max)},
          {"slack", m.slack},
          {"qp_status", status_string(m.qp_status)}};
}

json to_json(const CommandMessage& m) {
  json payload = json::object();
  switch (m.kind) {
    case CommandKind::apply_wrench: payload["wrench"] = vector6(m.wrench.vector()); break;
    case CommandKind::set_target: payload["pose"] = forcecbf::to_json(m.target); break;
    case CommandKind::set_limits: payload["limits"] = forcecbf::to_json(m.limits.w_max); break;
    case CommandKind::pause: payload["paused"] = m.paused; break;
    case CommandKind::reset: break;
  }
  return {{"type", "command"},
          {"v", kSchemaVersion},
          {"kind", std::string(to_string(m.kind))},
          {"client_id", m.client_id},
          {"sequence_number", m.sequence_number},
          {"payload", payload}};
}

CommandMessage command_from_json(const json& j) {
  if (!j.is_object()) throw MessageError("message must be a JSON object");
  const json& type = field(j, "type");
  if (type != "command") throw MessageError("unsupported message type");
  const json& v = field(j, "v");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw MessageError("unsupported schema version");
  }
  CommandMessage m;
  const json& client = field(j, "client_id");
  if (!client.is_string() || client.get<std::string>().empty()) {
    throw MessageError("client_id must be a non-empty string");
  }
  m.client_id = client.get<std::string>();
  const json& seq = field(j, "sequence_number");
  if (!seq.is_number_integer()) throw MessageError("sequence_number must be an integer");
  m.sequence_number = seq.get<std::int64_t>();

  const json& kind = field(j, "kind");
  if (!kind.is_string()) throw MessageError("kind must be a string");
  const std::string k = kind.get<std::string>();
  const json payload = j.contains("payload") ? j.at("payload") : json::object();
  if (!payload.is_object()) throw MessageError("payload must be an object");
  try {
    if (k == "apply_wrench") {
      m.kind = CommandKind::apply_wrench;
      m.wrench = wrench_from_vector6(field(payload, "wrench"));
    } else if (k == "set_target") {
      m.kind = CommandKind::set_target;
      m.target = pose_from_json(field(payload, "pose"), "payload.pose");
    } else if (k == "set_limits") {
      m.kind = CommandKind::set_limits;
      m.limits.w_max = wrench_from_json(field(payload, "limits"), "payload.limits");
      if (!m.limits.valid()) throw MessageError("limits must be > 0");
    } else if (k == "pause") {
      m.kind = CommandKind::pause;
      if (payload.contains("paused")) {
        if (!payload.at("paused").is_boolean()) throw MessageError("paused must be a boolean");
        m.paused = payload.at("paused").get<bool>();
      }
    } else if (k == "reset") {
      m.kind = CommandKind::reset;
    } else {
      throw MessageError("unknown command kind '" + k + "'");
    }
  } catch (const ConfigError& e) {
    throw MessageError(e.what());
  }
  return m;
}

CommandMessage parse_command(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error&) {
    throw MessageError("malformed JSON");
  }
  return command_from_json(j);
}

json hello_message(const ScenarioConfig& config, const Wrench& envelope) {
  return {{"type", "hello"},
          {"v", kSchemaVersion},
          {"scenario", config.name},
          {"control_rate_hz", config.control_rate_hz},
          {"limits", forcecbf::to_json(config.limits.w_max)},
          {"envelope", forcecbf::to_json(envelope)},
          {"desired_pose", forcecbf::to_json(config.desired_pose)}};
}

json error_message(const std::string& reason, std::optional<std::int64_t> sequence_number) {
  json j = {{"type", "error"}, {"v", kSchemaVersion}, {"message", reason}};
  if (sequence_number) j["sequence_number"] = *sequence_number;
  return j;
}

}  // namespace forcecbf::teleop
