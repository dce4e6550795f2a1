#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "forcecbf/simulator.hpp"
#include "forcecbf/teleop/messages.hpp"

namespace forcecbf::teleop {

/// A command together with the loop step before which it took effect.
struct LoggedCommand {
  std::int64_t step = 0;
  CommandMessage command;
};

enum class SubmitResult { applied, duplicate, rejected };

/// Deterministic core of the teleoperation loop, free of I/O and clocks.
/// The server drives one instance from its loop thread; replay() drives a
/// fresh instance from a command log and must reproduce the same trace.
class TeleopSession {
 public:
  /// Throws ConfigError unless the scenario has an interactive contact.
  explicit TeleopSession(ScenarioConfig config, bool record = true);

  /// Applies a command before the next step. Sequence numbers must increase
  /// per client; anything else is dropped as a duplicate.
  SubmitResult submit(const CommandMessage& cmd, std::string* reason = nullptr);

  /// One loop step: a control tick unless paused.
  std::optional<StateMessage> step();

  std::int64_t steps() const { return steps_; }
  std::int64_t sim_tick() const { return sim_.tick(); }
  bool paused() const { return paused_; }
  const Wrench& envelope() const { return envelope_; }
  const Simulator& simulator() const { return sim_; }
  /// Sum of the per-client wrenches, each clamped to the envelope.
  Wrench human_wrench() const;

  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::vector<LoggedCommand>& command_log() const { return log_; }

 private:
  Simulator sim_;
  Wrench envelope_;
  bool record_;
  bool paused_ = false;
  std::int64_t steps_ = 0;
  std::map<std::string, std::int64_t> last_sequence_;
  std::map<std::string, Wrench> client_wrench_;
  std::vector<TraceRecord> trace_;
  std::vector<LoggedCommand> log_;
};

/// Runs `steps` loop steps of a fresh session, applying each logged command
/// before its step. Returns the recorded trace.
std::vector<TraceRecord> replay(const ScenarioConfig& config, const std::vector<LoggedCommand>& log,
                                std::int64_t steps);

/// One JSON document per line: {"step": n, "command": {...}}.
void write_command_log(std::ostream& out, const std::vector<LoggedCommand>& log);
std::vector<LoggedCommand> read_command_log(std::istream& in);

}  // namespace forcecbf::teleop
