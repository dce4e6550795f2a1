#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "forcecbf/scenario.hpp"

namespace forcecbf {

/// One control tick.
struct TraceRecord {
  double t = 0.0;
  Pose pose;
  Twist commanded_twist;
  Wrench raw_wrench;
  Wrench compensated_wrench;
  Vector6d per_axis_margin = Vector6d::Zero();
  double slack = 0.0;
  std::vector<ConstraintLabel> active_labels;
  std::optional<qp::QpStatus> qp_status;  // empty for the admittance baseline
};

/// Plant-resolution pose sample, only collected on request.
struct PlantSample {
  double t = 0.0;
  Pose pose;
};

struct RunSummary {
  Vector6d max_abs_wrench_per_axis = Vector6d::Zero();
  double max_limit_violation = 0.0;
  double final_pose_error_norm = 0.0;
  std::optional<double> settling_time;
  double droop_max = 0.0;
  std::int64_t ticks = 0;
  std::int64_t qp_failures = 0;
};

inline constexpr double kSettlingThreshold = 1e-3;

Wrench compensate_gravity(const Wrench& raw, const Wrench& bias);

/// Throws std::invalid_argument on an empty trace.
RunSummary summarize(const std::vector<TraceRecord>& trace, const SafetyLimits& limits,
                     const Pose& desired);

/// max_i (|w_i| - w_max_i) / w_max_i, clipped below at 0.
double limit_violation(const Wrench& w, const SafetyLimits& limits);

/// Number of control ticks of a run, the first at t = 0.
std::int64_t tick_count(double duration, double control_rate_hz);

/// Closed-loop simulation of one scenario. The plant is a kinematic
/// integrator; the commanded twist is held between control ticks.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);

  /// Senses, runs the controller, advances the plant by one control period
  /// and returns the record of the tick just taken.
  const TraceRecord& step();

  /// External wrench added to the sensor reading from the next tick on.
  void set_human_wrench(const Wrench& w) { human_wrench_ = w; }
  const Wrench& human_wrench() const { return human_wrench_; }
  void set_desired(const Pose& desired) { config_.desired_pose = desired; }
  void set_limits(const SafetyLimits& limits);
  /// Back to the configured pose, target, limits, contacts and noise stream;
  /// the bias is re-captured on the next tick.
  void reset();

  /// Collects one sample per plant step into `sink` while set.
  void set_plant_sink(std::vector<PlantSample>* sink) { plant_sink_ = sink; }

  std::int64_t tick() const { return tick_; }
  double time() const;
  double period() const { return 1.0 / config_.control_rate_hz; }
  const Pose& pose() const { return pose_; }
  const ScenarioConfig& config() const { return config_; }
  const std::vector<ContactModel>& contacts() const { return contacts_; }
  const TraceRecord& last() const { return last_; }
  const Wrench& bias() const { return bias_; }

 private:
  struct EventState {
    bool started = false;
    bool done = false;
    double start_value = 0.0;
    double target = 0.0;
  };

  void apply_events(double t);
  // Tool weight plus contacts, without the human wrench or noise.
  Wrench noiseless_wrench(double t) const;
  Wrench draw_noise();

  ScenarioConfig original_;
  ScenarioConfig config_;
  std::vector<ContactModel> contacts_;
  std::vector<EventState> events_;
  CbfClfController controller_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Pose pose_;
  Wrench bias_;
  Wrench filtered_;
  Wrench human_wrench_;
  TraceRecord last_;
  std::int64_t tick_ = 0;
  std::vector<PlantSample>* plant_sink_ = nullptr;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  RunSummary summary;
  std::vector<PlantSample> plant;  // filled only when requested
};

/// Runs the whole scenario. Throws ConfigError for invalid configs and
/// std::runtime_error when the state becomes non-finite.
RunResult run_scenario(const ScenarioConfig& config, bool record_plant = false);

}  // namespace forcecbf
