#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "forcecbf/scenario.hpp"
#include "forcecbf/teleop/session.hpp"

namespace forcecbf::teleop {

struct ServeOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double speed = 1.0;          // simulated seconds per wall-clock second
  bool turbo = false;          // no pacing at all
  std::optional<std::filesystem::path> record_dir;
  std::int64_t max_steps = -1;  // stop after this many loop steps; -1 runs until stop()
  std::size_t client_buffer = 64;  // outgoing messages kept per client
};

/// WebSocket front end for a TeleopSession. GET /health answers with the
/// loop status; any other path upgrades to the message stream.
///
/// Threads: run() is the control loop and sole owner of the session. One
/// I/O thread serves sockets; it hands commands to the loop through a
/// mutex-guarded queue and never touches the session.
class TeleopServer {
 public:
  TeleopServer(ScenarioConfig config, ServeOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Binds and starts accepting. Returns the bound port. Throws
  /// std::system_error when the address is unavailable.
  unsigned short listen();

  /// Runs the loop on the calling thread until stop() or max_steps, then
  /// writes the recording (if any) and shuts the I/O side down.
  void run();

  /// Safe from any thread, including signal handlers' io callbacks.
  void stop();

  std::int64_t steps() const;
  std::size_t client_count() const;

  /// Valid once run() has returned.
  const TeleopSession& session() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes <dir>/<name>.trace.csv, <name>.summary.json and
/// <name>.commands.jsonl. Throws std::runtime_error on I/O failure.
void write_recording(const std::filesystem::path& dir, const ScenarioConfig& config,
                     const TeleopSession& session);

}  // namespace forcecbf::teleop
