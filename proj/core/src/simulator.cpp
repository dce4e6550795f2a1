#include "forcecbf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace forcecbf {
namespace {

bool finite(const Pose& p) {
  return p.position.allFinite() && p.orientation.coeffs().allFinite();
}

double read_field(const ContactModel& contact, const std::string& field) {
  const nlohmann::json doc = to_json(contact);
  const nlohmann::json* v = find_path(doc, field);
  if (v == nullptr || !v->is_number()) throw ConfigError(field, "not a numeric contact field");
  return v->get<double>();
}

ContactModel write_field(const ContactModel& contact, const std::string& field, double value) {
  nlohmann::json doc = to_json(contact);
  *find_path(doc, field) = value;
  return contact_from_json(doc, "", Pose{});
}

ScenarioConfig validated(ScenarioConfig config) {
  validate(config);
  return config;
}

}  // namespace

Wrench compensate_gravity(const Wrench& raw, const Wrench& bias) { return raw - bias; }

double limit_violation(const Wrench& w, const SafetyLimits& limits) {
  double worst = 0.0;
  for (int i = 0; i < kNumAxes; ++i) {
    worst = std::max(worst, (std::abs(w[i]) - limits[i]) / limits[i]);
  }
  return worst;
}

std::int64_t tick_count(double duration, double control_rate_hz) {
  return static_cast<std::int64_t>(std::floor(duration * control_rate_hz + 1e-9)) + 1;
}

RunSummary summarize(const std::vector<TraceRecord>& trace, const SafetyLimits& limits,
                     const Pose& desired) {
  if (trace.empty()) throw std::invalid_argument("summarize: empty trace");
  RunSummary s;
  s.ticks = static_cast<std::int64_t>(trace.size());
  std::optional<double> settled_since;
  for (const TraceRecord& r : trace) {
    s.max_abs_wrench_per_axis =
        s.max_abs_wrench_per_axis.cwiseMax(r.compensated_wrench.vector().cwiseAbs());
    s.max_limit_violation = std::max(s.max_limit_violation, limit_violation(r.compensated_wrench, limits));
    s.droop_max = std::max(s.droop_max, (r.pose.position - desired.position).norm());
    const double err = pose_error(r.pose, desired).norm();
    if (err < kSettlingThreshold) {
      if (!settled_since) settled_since = r.t;
    } else {
      settled_since.reset();
    }
    if (r.qp_status && *r.qp_status != qp::QpStatus::optimal) ++s.qp_failures;
  }
  s.final_pose_error_norm = pose_error(trace.back().pose, desired).norm();
  s.settling_time = settled_since;
  return s;
}

Simulator::Simulator(ScenarioConfig config)
    : original_(validated(std::move(config))),
      config_(original_),
      controller_(config_.limits, config_.controller.cbf) {
  reset();
}

double Simulator::time() const { return static_cast<double>(tick_) / config_.control_rate_hz; }

void Simulator::set_limits(const SafetyLimits& limits) {
  controller_.set_limits(limits);
  config_.limits = limits;
}

void Simulator::reset() {
  config_ = original_;
  controller_.set_limits(config_.limits);
  contacts_ = config_.contacts;
  events_.assign(config_.events.size(), EventState{});
  controller_.reset();
  rng_.seed(config_.rng_seed);
  normal_.reset();
  pose_ = config_.initial_pose;
  bias_ = Wrench{};
  filtered_ = Wrench{};
  human_wrench_ = Wrench{};
  last_ = TraceRecord{};
  tick_ = 0;
}

void Simulator::apply_events(double t) {
  for (std::size_t i = 0; i < config_.events.size(); ++i) {
    const ScenarioEvent& e = config_.events[i];
    EventState& st = events_[i];
    if (st.done || t + 1e-9 < e.t) continue;
    ContactModel& contact = contacts_[static_cast<std::size_t>(e.contact)];
    if (!st.started) {
      st.started = true;
      st.start_value = read_field(contact, e.field);
      st.target = e.op == ScenarioEvent::Op::set ? e.value : st.start_value + e.value;
    }
    double s = 1.0;
    if (e.ramp > 0.0) s = std::clamp((t - e.t) / e.ramp, 0.0, 1.0);
    const double value = s >= 1.0 ? st.target : st.start_value + s * (st.target - st.start_value);
    contact = write_field(contact, e.field, value);
    if (s >= 1.0) st.done = true;
  }
}

Wrench Simulator::noiseless_wrench(double t) const {
  Wrench raw = config_.tool_wrench;
  for (const ContactModel& c : contacts_) raw = raw + contact_wrench(c, pose_, t);
  return raw;
}

Wrench Simulator::draw_noise() {
  Vector6d noise;
  for (int i = 0; i < kNumAxes; ++i) noise[i] = normal_(rng_);
  return Wrench::from_vector(noise.cwiseProduct(config_.noise_std.vector()));
}

const TraceRecord& Simulator::step() {
  const double t = time();
  TraceRecord rec;
  rec.t = t;
  const Wrench noise = draw_noise();
  if (tick_ == 0) {
    // The bias is taken before any scheduled contact change.
    bias_ = noiseless_wrench(t) + noise;
  }
  apply_events(t);
  rec.raw_wrench = noiseless_wrench(t) + human_wrench_ + noise;

  const Wrench compensated = compensate_gravity(rec.raw_wrench, bias_);
  const double a = config_.lowpass_alpha;
  filtered_ = tick_ == 0 ? compensated
                         : Wrench::from_vector(a * compensated.vector() + (1.0 - a) * filtered_.vector());
  rec.pose = pose_;
  rec.compensated_wrench = filtered_;
  rec.per_axis_margin = cbf_margins(filtered_, config_.limits);

  if (config_.controller.kind == ControllerKind::cbf) {
    const ControlOutput out = controller_.step(pose_, config_.desired_pose, filtered_);
    rec.commanded_twist = out.twist;
    rec.slack = out.slack;
    rec.active_labels = out.active_labels;
    rec.qp_status = out.qp_status;
  } else {
    rec.commanded_twist =
        admittance_step(pose_, config_.desired_pose, filtered_, config_.controller.admittance);
  }

  const double dt = period();
  const auto substeps =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(dt / config_.plant_dt - 1e-9)));
  const double h = dt / static_cast<double>(substeps);
  for (std::int64_t k = 0; k < substeps; ++k) {
    pose_ = integrate_pose(pose_, rec.commanded_twist, h);
    if (plant_sink_ != nullptr) {
      plant_sink_->push_back({t + static_cast<double>(k + 1) * h, pose_});
    }
  }
  if (!finite(pose_) || !rec.commanded_twist.vector().allFinite()) {
    throw std::runtime_error("simulation diverged at t = " + std::to_string(t));
  }
  ++tick_;
  last_ = std::move(rec);
  return last_;
}

RunResult run_scenario(const ScenarioConfig& config, bool record_plant) {
  Simulator sim(config);
  RunResult result;
  if (record_plant) sim.set_plant_sink(&result.plant);
  const std::int64_t n = tick_count(config.duration, config.control_rate_hz);
  result.trace.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) result.trace.push_back(sim.step());
  result.summary = summarize(result.trace, config.limits, config.desired_pose);
  return result;
}

}  // namespace forcecbf
