#include "forcecbf/teleop/session.hpp"

#include <string>

namespace forcecbf::teleop {
namespace {

Wrench envelope_of(const ScenarioConfig& config) {
  for (const ContactModel& c : config.contacts) {
    if (const auto* hand = std::get_if<InteractiveHand>(&c)) return hand->envelope;
  }
  throw ConfigError("contacts", "serving requires an \"interactive\" contact");
}

}  // namespace

TeleopSession::TeleopSession(ScenarioConfig config, bool record)
    : sim_(std::move(config)), envelope_(envelope_of(sim_.config())), record_(record) {}

Wrench TeleopSession::human_wrench() const {
  Wrench sum;
  for (const auto& [client, w] : client_wrench_) sum = sum + clamp_to_envelope(w, envelope_);
  return sum;
}

SubmitResult TeleopSession::submit(const CommandMessage& cmd, std::string* reason) {
  const auto last = last_sequence_.find(cmd.client_id);
  if (last != last_sequence_.end() && cmd.sequence_number <= last->second) {
    if (reason != nullptr) *reason = "stale sequence_number";
    return SubmitResult::duplicate;
  }
  switch (cmd.kind) {
    case CommandKind::apply_wrench:
      client_wrench_[cmd.client_id] = cmd.wrench;
      break;
    case CommandKind::set_target:
      sim_.set_desired(cmd.target);
      break;
    case CommandKind::set_limits:
      if (!cmd.limits.valid()) {
        if (reason != nullptr) *reason = "limits must be > 0";
        return SubmitResult::rejected;
      }
      sim_.set_limits(cmd.limits);
      break;
    case CommandKind::pause:
      paused_ = cmd.paused;
      break;
    case CommandKind::reset:
      sim_.reset();
      client_wrench_.clear();
      trace_.clear();
      paused_ = false;
      break;
  }
  last_sequence_[cmd.client_id] = cmd.sequence_number;
  log_.push_back({steps_, cmd});
  return SubmitResult::applied;
}

std::optional<StateMessage> TeleopSession::step() {
  ++steps_;
  if (paused_) return std::nullopt;
  sim_.set_human_wrench(human_wrench());
  const std::int64_t tick = sim_.tick();
  const TraceRecord& rec = sim_.step();
  if (record_) trace_.push_back(rec);
  return make_state(tick, rec, sim_.config().limits);
}

std::vector<TraceRecord> replay(const ScenarioConfig& config, const std::vector<LoggedCommand>& log,
                                std::int64_t steps) {
  TeleopSession session(config, true);
  std::size_t next = 0;
  for (std::int64_t s = 0; s < steps; ++s) {
    while (next < log.size() && log[next].step == s) session.submit(log[next++].command);
    session.step();
  }
  while (next < log.size() && log[next].step == steps) session.submit(log[next++].command);
  return session.trace();
}

void write_command_log(std::ostream& out, const std::vector<LoggedCommand>& log) {
  for (const LoggedCommand& c : log) {
    out << nlohmann::json{{"step", c.step}, {"command", to_json(c.command)}}.dump() << '\n';
  }
}

std::vector<LoggedCommand> read_command_log(std::istream& in) {
  std::vector<LoggedCommand> log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      LoggedCommand c;
      c.step = j.at("step").get<std::int64_t>();
      c.command = command_from_json(j.at("command"));
      if (!log.empty() && c.step < log.back().step) throw MessageError("steps must be non-decreasing");
      log.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw MessageError("command log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace forcecbf::teleop
