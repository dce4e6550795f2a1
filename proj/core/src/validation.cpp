#include "forcecbf/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>

#include "forcecbf/presets.hpp"
#include "forcecbf/qp_oracle.hpp"

namespace forcecbf::validation {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Check at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, true, value <= bound};
}

Check at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, false, value >= bound};
}

Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3d v;
  do {
    v = Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Quaterniond random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

const HangingLoad* hanging_contact(const ScenarioConfig& c) {
  for (const ContactModel& m : c.contacts) {
    if (const auto* h = std::get_if<HangingLoad>(&m)) return h;
  }
  return nullptr;
}

double load_height(const HangingLoad& h, const Pose& pose) {
  return pose.position.z() + (pose.orientation * h.rope_attach_offset).z() - h.rope_length;
}

// Largest displacement from the pose held when the 20 N load goes on.
double hold_displacement(const std::vector<TraceRecord>& trace, double from, double to) {
  const TraceRecord* anchor = nullptr;
  double worst = 0.0;
  for (const TraceRecord& r : trace) {
    if (r.t + 1e-9 < from || r.t >= to - 1e-9) continue;
    if (anchor == nullptr) anchor = &r;
    worst = std::max(worst, (r.pose.position - anchor->pose.position).norm());
  }
  return worst;
}

struct QpInstance {
  qp::QProblem problem;
  bool infeasible_by_construction = false;
};

QpInstance random_qp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = dim(rng);
  std::uniform_int_distribution<int> rows(1, 2 * n + 2);
  const int m = rows(rng);

  QpInstance inst;
  qp::QProblem& p = inst.problem;
  p = qp::QProblem(n);
  for (int j = 0; j < n; ++j) {
    p.cost_diagonal[j] = 0.1 + 9.9 * u01(rng);
    p.cost_linear[j] = -5.0 + 10.0 * u01(rng);
  }
  qp::VecN x0(n);
  for (int j = 0; j < n; ++j) x0[j] = -2.0 + 4.0 * u01(rng);
  for (int i = 0; i < m; ++i) {
    qp::VecN a(n);
    for (int j = 0; j < n; ++j) a[j] = normal(rng);
    p.add_constraint(a, a.dot(x0) + u01(rng));
  }
  if (u01(rng) < 0.2) {
    // Zero-curvature coordinate with a linear cost, bounded below.
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int j = pick(rng);
    p.cost_diagonal[j] = 0.0;
    p.cost_linear[j] = 0.1 + 1.9 * u01(rng);
    qp::VecN a = qp::VecN::Zero(n);
    a[j] = -1.0;
    p.add_constraint(a, -x0[j] + u01(rng));
  }
  if (u01(rng) < 0.05) {
    qp::VecN a(n);
    for (int j = 0; j < n; ++j) a[j] = normal(rng);
    p.add_constraint(a, -1.0);
    p.add_constraint(-a, -1.0);
    inst.infeasible_by_construction = true;
  }
  return inst;
}

}  // namespace

bool CriterionResult::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double certificate_residual(const std::vector<TraceRecord>& trace, const ControllerParams& params,
                            const SafetyLimits& limits) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : trace) {
    if (!r.qp_status || *r.qp_status != qp::QpStatus::optimal) continue;
    const Vector6d v = r.commanded_twist.vector();
    for (int i = 0; i < kNumAxes; ++i) {
      const double w = r.compensated_wrench[i];
      const double residual = -w * v[i] + params.alpha(i) * cbf_margin(w, limits[i]);
      worst = std::max(worst, residual);
    }
  }
  return worst;
}

ScenarioConfig random_spring_scenario(std::uint64_t seed, double control_rate_hz, double alpha) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  ScenarioConfig c;
  c.name = "safety_" + std::to_string(seed);
  const Pose home = make_pose(Vector3d(0.5, 0.0, 0.8), Quaterniond::Identity());
  c.initial_pose = home;
  c.controller.kind = ControllerKind::cbf;
  c.controller.cbf.alpha_force = alpha;
  c.controller.cbf.alpha_torque = alpha;
  c.controller.cbf.lambda = 10.0;
  c.controller.cbf.slack_weight_k = 1.0;

  Vector6d limits;
  Vector6d stiffness;
  Vector6d offset;
  for (int i = 0; i < kNumAxes; ++i) {
    limits[i] = is_torque_axis(i) ? uniform(1.0, 10.0) : uniform(5.0, 30.0);
    stiffness[i] = std::pow(10.0, uniform(1.0, 3.0));
    const double sign = u01(rng) < 0.5 ? -1.0 : 1.0;
    offset[i] = sign * uniform(0.2, 3.0) * limits[i] / stiffness[i];
  }
  // One rotation axis per scenario keeps the rotational spring linear in
  // the rotation vector, like the translational one.
  std::uniform_int_distribution<int> pick(0, 2);
  const int rot_axis = pick(rng);
  Vector3d rv = Vector3d::Zero();
  rv[rot_axis] = std::clamp(offset[3 + rot_axis], -1.0, 1.0);
  c.limits.w_max = Wrench::from_vector(limits);
  c.desired_pose = make_pose(home.position + offset.head<3>(), quaternion_exp(rv));

  SpringContact spring;
  spring.anchor = home;
  spring.stiffness = stiffness;
  c.contacts.push_back(spring);
  c.control_rate_hz = control_rate_hz;
  c.plant_dt = 1.0 / std::max(1000.0, control_rate_hz);
  c.duration = 10.0;
  return c;
}

CriterionResult bag_test_reproduction(const SuiteOptions&) {
  CriterionResult r{1, "bag_test_reproduction", {}, {}, 0.0};
  const ScenarioConfig config = presets::bag_test();
  const auto start = Clock::now();
  const RunResult run = run_scenario(config);
  const double runtime = seconds_since(start);

  const HangingLoad* bag = hanging_contact(config);
  const double add_time = config.events.at(1).t;
  const double z0 = [&] {
    for (const TraceRecord& rec : run.trace) {
      if (rec.t + 1e-9 >= add_time) return rec.pose.position.z();
    }
    return run.trace.back().pose.position.z();
  }();

  double worst_rise = 0.0;
  double touch_time = -1.0;
  double descent = 0.0;
  const TraceRecord* prev = nullptr;
  for (const TraceRecord& rec : run.trace) {
    if (rec.t + 1e-9 < add_time) continue;
    if (prev != nullptr) worst_rise = std::max(worst_rise, rec.pose.position.z() - prev->pose.position.z());
    descent = z0 - rec.pose.position.z();
    prev = &rec;
    if (load_height(*bag, rec.pose) <= bag->ground_height) {
      touch_time = rec.t;
      break;
    }
  }

  r.checks.push_back(at_most("hold_displacement_m", hold_displacement(run.trace, config.events.at(0).t, add_time),
                             kBagHoldDisplacement));
  r.checks.push_back(at_most("max_rise_per_tick_m", worst_rise, kMonotoneSlack));
  r.checks.push_back(at_least("descent_to_ground_m", descent, z0 - bag->ground_height - bag->rope_length));
  r.checks.push_back(at_most("runtime_s", runtime, kBagRuntimeSeconds));
  char buf[96];
  std::snprintf(buf, sizeof buf, "ground touch at t=%.3f s", touch_time);
  r.note = buf;
  r.wall_seconds = runtime;
  return r;
}

CriterionResult baseline_comparison(const SuiteOptions&) {
  CriterionResult r{2, "baseline_comparison", {}, {}, 0.0};
  const auto start = Clock::now();
  const ScenarioConfig cbf = presets::bag_test();
  const ScenarioConfig adm = presets::stiffness_comparison();
  const double on = cbf.events.at(0).t;
  const double off = cbf.events.at(1).t;
  const RunResult cbf_run = run_scenario(cbf);
  const RunResult adm_run = run_scenario(adm);

  double droop = 0.0;
  for (const TraceRecord& rec : adm_run.trace) {
    if (rec.t + 1e-9 >= on && rec.t < off - 1e-9) {
      droop = std::max(droop, (rec.pose.position - adm.desired_pose.position).norm());
    }
  }
  r.checks.push_back(at_least("admittance_droop_m", droop, kBaselineMinDroop));
  r.checks.push_back(at_most("cbf_displacement_m", hold_displacement(cbf_run.trace, on, off), kBagHoldDisplacement));
  const double static_droop = 20.0 / adm.controller.admittance.stiffness[2];
  char buf[96];
  std::snprintf(buf, sizeof buf, "static admittance droop %.3f m", static_droop);
  r.note = buf;
  r.wall_seconds = seconds_since(start);
  return r;
}

CriterionResult safety_invariance(const SuiteOptions& opt) {
  CriterionResult r{3, "safety_invariance", {}, {}, 0.0};
  const auto start = Clock::now();
  double worst30 = 0.0;
  double worst300 = 0.0;
  double worst_cert = -std::numeric_limits<double>::infinity();
  std::int64_t failures = 0;
  for (int i = 0; i < opt.safety_scenarios; ++i) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(i);
    for (double rate : {30.0, 300.0}) {
      const ScenarioConfig c = random_spring_scenario(seed, rate, opt.safety_alpha);
      const RunResult run = run_scenario(c);
      (rate < 100.0 ? worst30 : worst300) =
          std::max(rate < 100.0 ? worst30 : worst300, run.summary.max_limit_violation);
      worst_cert = std::max(worst_cert, certificate_residual(run.trace, c.controller.cbf, c.limits));
      failures += run.summary.qp_failures;
    }
  }
  r.checks.push_back(at_most("max_violation_30hz", worst30, kViolation30Hz));
  r.checks.push_back(at_most("max_violation_300hz", worst300, kViolation300Hz));
  r.checks.push_back(at_most("certificate_residual", worst_cert, kCertificateTol));
  r.checks.push_back(at_most("qp_failures", static_cast<double>(failures), 0.0));
  r.note = std::to_string(opt.safety_scenarios) + " scenarios";
  r.wall_seconds = seconds_since(start);
  return r;
}

CriterionResult stiffness_independence(const SuiteOptions& opt) {
  CriterionResult r{4, "stiffness_independence", {}, {}, 0.0};
  const auto start = Clock::now();
  std::mt19937_64 rng(opt.seed ^ 0x4u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  double worst = 0.0;
  std::int64_t status_mismatch = 0;
  for (int s = 0; s < opt.invariance_states; ++s) {
    SafetyLimits limits;
    Vector6d wmax;
    Vector6d w;
    for (int i = 0; i < kNumAxes; ++i) {
      wmax[i] = uniform(0.5, 30.0);
      w[i] = uniform(-1.5, 1.5) * wmax[i];
    }
    limits.w_max = Wrench::from_vector(wmax);
    ControllerParams params;
    params.alpha_force = uniform(0.1, 10.0);
    params.alpha_torque = uniform(0.1, 10.0);
    params.lambda = uniform(0.1, 20.0);
    params.slack_weight_k = uniform(0.1, 20.0);
    const Pose pose = make_pose(Vector3d(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)), random_rotation(rng));
    const Pose desired = make_pose(pose.position + 0.3 * random_unit(rng) * u01(rng),
                                   quaternion_exp(random_unit(rng) * uniform(0.0, 1.0)) * pose.orientation);
    const Wrench wrench = Wrench::from_vector(w);

    const ControlOutput base = control_step(pose, desired, wrench, limits, params);
    ControllerQp scaled = assemble_controller_qp(pose_error(pose, desired), wrench, limits, params);
    for (std::size_t i = 0; i < scaled.labels.size(); ++i) {
      const int label = static_cast<int>(scaled.labels[i]);
      if (label >= kNumAxes) continue;
      const double k = 100.0 * (1.0 - u01(rng));  // (0, 100]
      scaled.problem.constraints[i].row *= k;
      scaled.problem.constraints[i].bound *= k;
    }
    const qp::QSolution sol = qp::solve(scaled.problem);
    if (sol.status != base.qp_status) {
      ++status_mismatch;
      continue;
    }
    if (sol.status != qp::QpStatus::optimal) continue;
    const Vector6d v = sol.x_star.head<6>();
    worst = std::max(worst, (v - base.twist.vector()).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(sol.x_star[kSlackIndex] - base.slack));
  }
  r.checks.push_back(at_most("max_output_change", worst, kStiffnessInvarianceTol));
  r.checks.push_back(at_most("status_mismatches", static_cast<double>(status_mismatch), 0.0));
  r.note = std::to_string(opt.invariance_states) + " states";
  r.wall_seconds = seconds_since(start);
  return r;
}

CriterionResult clf_stability(const SuiteOptions& opt) {
  CriterionResult r{5, "clf_stability", {}, {}, 0.0};
  const auto start = Clock::now();
  std::mt19937_64 rng(opt.seed ^ 0x5u);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  double worst_rise = 0.0;
  double worst_final = 0.0;
  double worst_closed_form = 0.0;
  int reached = 0;
  double min_rate = 0.0;
  for (int s = 0; s < opt.stability_offsets; ++s) {
    ScenarioConfig c = presets::no_contact();
    c.name = "stability_" + std::to_string(s);
    const ControllerParams& p = c.controller.cbf;
    min_rate = std::min(p.lambda, p.slack_weight_k);
    const Vector3d dp = random_unit(rng) * 0.3 * u01(rng);
    const Vector3d rv = random_unit(rng) * 0.5 * u01(rng);
    c.initial_pose = make_pose(c.desired_pose.position + dp, quaternion_exp(rv) * c.desired_pose.orientation);
    const double horizon = 10.0 / min_rate;
    c.duration = horizon;
    const RunResult run = run_scenario(c);

    double prev = std::numeric_limits<double>::infinity();
    for (const TraceRecord& rec : run.trace) {
      const PoseError e = pose_error(rec.pose, c.desired_pose);
      const double norm = e.norm();
      if (std::isfinite(prev)) worst_rise = std::max(worst_rise, norm - prev);
      prev = norm;
      const bool cbf_active = std::any_of(rec.active_labels.begin(), rec.active_labels.end(),
                                          [](ConstraintLabel l) { return static_cast<int>(l) < kNumAxes; });
      if (cbf_active) continue;
      const Vector6d expect_v = -(min_rate / 2.0) * e.vector();
      const double expect_gamma = std::max(0.0, (p.lambda - p.slack_weight_k) * norm * norm / 2.0);
      worst_closed_form = std::max(worst_closed_form, (rec.commanded_twist.vector() - expect_v).cwiseAbs().maxCoeff());
      worst_closed_form = std::max(worst_closed_form, std::abs(rec.slack - expect_gamma));
    }
    worst_final = std::max(worst_final, run.summary.final_pose_error_norm);
    if (run.summary.final_pose_error_norm < kSettlingThreshold) ++reached;
  }
  r.checks.push_back(at_most("max_error_rise_per_tick", worst_rise, kLyapunovTickTol));
  r.checks.push_back(at_most("worst_error_at_horizon", worst_final, kSettlingThreshold));
  r.checks.push_back(at_most("closed_form_deviation", worst_closed_form, kClosedFormTol));
  r.note = std::to_string(reached) + "/" + std::to_string(opt.stability_offsets) +
           " offsets below 1e-3 by t=10/min(lambda,k)";
  r.wall_seconds = seconds_since(start);
  return r;
}

CriterionResult qp_certification(const SuiteOptions& opt) {
  CriterionResult r{6, "qp_certification", {}, {}, 0.0};
  const auto start = Clock::now();
  std::mt19937_64 rng(opt.seed ^ 0x6u);
  double worst_kkt = 0.0;
  double worst_gap = 0.0;
  std::int64_t status_mismatch = 0;
  std::int64_t nondeterministic = 0;
  std::int64_t infeasible = 0;
  for (int s = 0; s < opt.qp_instances; ++s) {
    const QpInstance inst = random_qp(rng);
    const qp::QSolution a = qp::solve(inst.problem);
    const qp::QSolution b = qp::solve(inst.problem);
    const std::optional<qp::VecN> oracle = qp::enumeration_oracle(inst.problem);
    if (a.status != b.status || a.x_star.size() != b.x_star.size() ||
        std::memcmp(a.x_star.data(), b.x_star.data(), sizeof(double) * a.x_star.size()) != 0 ||
        a.iterations != b.iterations) {
      ++nondeterministic;
    }
    const bool solver_optimal = a.status == qp::QpStatus::optimal;
    if (solver_optimal != oracle.has_value() || (inst.infeasible_by_construction && solver_optimal)) {
      ++status_mismatch;
      continue;
    }
    if (!solver_optimal) {
      ++infeasible;
      continue;
    }
    worst_kkt = std::max(worst_kkt, a.kkt_residual);
    worst_gap = std::max(worst_gap, std::abs(a.objective - inst.problem.objective(*oracle)));
  }
  r.checks.push_back(at_most("max_kkt_residual", worst_kkt, kKktResidualTol));
  r.checks.push_back(at_most("max_objective_gap", worst_gap, kOracleObjectiveTol));
  r.checks.push_back(at_most("status_mismatches", static_cast<double>(status_mismatch), 0.0));
  r.checks.push_back(at_most("nondeterministic_repeats", static_cast<double>(nondeterministic), 0.0));
  r.note = std::to_string(opt.qp_instances) + " instances, " + std::to_string(infeasible) + " infeasible";
  r.wall_seconds = seconds_since(start);
  return r;
}

CriterionResult guided_limits(const SuiteOptions&) {
  CriterionResult r{7, "guided_limits", {}, {}, 0.0};
  const auto start = Clock::now();
  const ScenarioConfig c = presets::human_guide();
  const RunResult run = run_scenario(c);
  const auto& guide = std::get<HumanGuide>(c.contacts.at(0));
  const Pose terminal = guide.intent_trajectory.back().pose;
  const double tracking = (run.trace.back().pose.position - terminal.position).norm();
  r.checks.push_back(at_most("max_limit_violation", run.summary.max_limit_violation, kGuideViolation));
  r.checks.push_back(at_most("final_tracking_m", tracking, kGuideTracking));
  r.checks.push_back(at_most("qp_failures", static_cast<double>(run.summary.qp_failures), 0.0));
  r.wall_seconds = seconds_since(start);
  return r;
}

std::vector<CriterionResult> run_acceptance(const SuiteOptions& opt) {
  return {bag_test_reproduction(opt), baseline_comparison(opt), safety_invariance(opt),
          stiffness_independence(opt), clf_stability(opt), qp_certification(opt),
          guided_limits(opt)};
}

CriterionResult scenario_safety(const ScenarioConfig& config) {
  CriterionResult r{0, "scenario:" + config.name, {}, {}, 0.0};
  const auto start = Clock::now();
  try {
    const RunResult run = run_scenario(config);
    r.checks.push_back(at_most("max_limit_violation", run.summary.max_limit_violation, kViolation30Hz));
    if (config.controller.kind == ControllerKind::cbf) {
      r.checks.push_back(at_most("certificate_residual",
                                 certificate_residual(run.trace, config.controller.cbf, config.limits),
                                 kCertificateTol));
      r.checks.push_back(at_most("qp_failures", static_cast<double>(run.summary.qp_failures), 0.0));
    }
  } catch (const std::runtime_error& e) {
    r.checks.push_back(at_most("runtime_fault", 1.0, 0.0));
    r.note = e.what();
  }
  r.wall_seconds = seconds_since(start);
  return r;
}

std::string format_line(const CriterionResult& r) {
  std::string line = r.passed() ? "PASS" : "FAIL";
  line += r.id > 0 ? "  [" + std::to_string(r.id) + "] " : "  ";
  line += r.name + ":";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const Check& c = r.checks[i];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %s=%.4g %s %.4g%s", i == 0 ? "" : ";", c.name.c_str(), c.value,
                  c.upper ? "<=" : ">=", c.bound, c.passed ? "" : " (x)");
    line += buf;
  }
  if (!r.note.empty()) line += "  [" + r.note + "]";
  return line;
}

nlohmann::json to_json(const CriterionResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"bound", c.bound},
                      {"comparison", c.upper ? "<=" : ">="},
                      {"passed", c.passed}});
  }
  nlohmann::json j = {{"name", r.name}, {"passed", r.passed()}, {"checks", checks}, {"note", r.note}};
  if (r.id > 0) j["id"] = r.id;
  return j;
}

}  // namespace forcecbf::validation
