#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forcecbf/simulator.hpp"

namespace forcecbf::validation {

/// One measured quantity compared against a pinned bound.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool upper = true;  // value <= bound when true, value >= bound otherwise
  bool passed = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<Check> checks;
  std::string note;
  double wall_seconds = 0.0;

  bool passed() const;
};

// Pinned tolerances.
inline constexpr double kBagHoldDisplacement = 5e-3;     // m over the 20 N phase
inline constexpr double kBagRuntimeSeconds = 5.0;         // wall clock for 30 s simulated
inline constexpr double kMonotoneSlack = 1e-12;           // m per tick
inline constexpr double kBaselineMinDroop = 0.4;          // m
inline constexpr double kViolation30Hz = 0.05;
inline constexpr double kViolation300Hz = 0.005;
inline constexpr double kCertificateTol = 1e-8;
inline constexpr double kStiffnessInvarianceTol = 1e-9;
inline constexpr double kLyapunovTickTol = 1e-9;
inline constexpr double kClosedFormTol = 1e-7;
inline constexpr double kKktResidualTol = 1e-8;
inline constexpr double kOracleObjectiveTol = 1e-6;
inline constexpr double kGuideViolation = 0.05;
inline constexpr double kGuideTracking = 0.02;            // m

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  int safety_scenarios = 200;
  double safety_alpha = 1.0;  // barrier gain of the randomized spring runs
  int invariance_states = 1000;
  int stability_offsets = 50;
  int qp_instances = 10000;
};

CriterionResult bag_test_reproduction(const SuiteOptions& opt = {});
CriterionResult baseline_comparison(const SuiteOptions& opt = {});
CriterionResult safety_invariance(const SuiteOptions& opt = {});
CriterionResult stiffness_independence(const SuiteOptions& opt = {});
CriterionResult clf_stability(const SuiteOptions& opt = {});
CriterionResult qp_certification(const SuiteOptions& opt = {});
CriterionResult guided_limits(const SuiteOptions& opt = {});

/// Criteria 1 to 7 in order.
std::vector<CriterionResult> run_acceptance(const SuiteOptions& opt = {});

/// Safety checks for an arbitrary scenario: limit violation at the 30 Hz
/// tolerance, the per-tick barrier certificate, and QP health.
CriterionResult scenario_safety(const ScenarioConfig& config);

/// Worst per-tick residual of -w_i v_i <= -alpha_i h_i over a trace.
/// Ticks without an optimal QP are skipped.
double certificate_residual(const std::vector<TraceRecord>& trace, const ControllerParams& params,
                            const SafetyLimits& limits);

/// Random spring-contact scenario used by the safety property.
ScenarioConfig random_spring_scenario(std::uint64_t seed, double control_rate_hz, double alpha);

/// "PASS  1  name  (check=value <= bound, ...)".
std::string format_line(const CriterionResult& r);
nlohmann::json to_json(const CriterionResult& r);

}  // namespace forcecbf::validation
