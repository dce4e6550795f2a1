#include "forcecbf/trace_io.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace forcecbf {
namespace {

void put(std::ostream& out, double v) { out << format_number(v); }

void put_pose(std::ostream& out, const Pose& p) {
  const Quaterniond& q = p.orientation;
  for (double v : {p.position.x(), p.position.y(), p.position.z(), q.w(), q.x(), q.y(), q.z()}) {
    out << ',';
    put(out, v);
  }
}

void put_vector(std::ostream& out, const Vector6d& v) {
  for (int i = 0; i < 6; ++i) {
    out << ',';
    put(out, v[i]);
  }
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad number '" +
                             std::string(s) + "'");
  }
  return v;
}

std::optional<qp::QpStatus> parse_status(std::string_view s, std::size_t line) {
  if (s == "n/a") return std::nullopt;
  for (auto st : {qp::QpStatus::optimal, qp::QpStatus::infeasible, qp::QpStatus::iteration_limit}) {
    if (qp::to_string(st) == s) return st;
  }
  throw std::runtime_error("trace line " + std::to_string(line) + ": bad status '" +
                           std::string(s) + "'");
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return std::string(buf.data(), ptr);
}

std::string status_string(const std::optional<qp::QpStatus>& s) {
  return s ? std::string(qp::to_string(*s)) : std::string("n/a");
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    put(out, r.t);
    put_pose(out, r.pose);
    put_vector(out, r.commanded_twist.vector());
    put_vector(out, r.compensated_wrench.vector());
    put_vector(out, r.per_axis_margin);
    out << ',';
    put(out, r.slack);
    out << ',' << status_string(r.qp_status) << '\n';
  }
}

void write_raw_wrench_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "t,fx,fy,fz,tx,ty,tz\n";
  for (const TraceRecord& r : trace) {
    put(out, r.t);
    put_vector(out, r.raw_wrench.vector());
    out << '\n';
  }
}

void write_plant_csv(std::ostream& out, const std::vector<PlantSample>& samples) {
  out << "t,px,py,pz,qw,qx,qy,qz\n";
  for (const PlantSample& s : samples) {
    put(out, s.t);
    put_pose(out, s.pose);
    out << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error("trace: missing or unexpected header");
  }
  std::vector<TraceRecord> trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 28) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 28 columns");
    }
    std::array<double, 27> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_number(cells[i], lineno);
    TraceRecord r;
    r.t = v[0];
    r.pose.position = Vector3d(v[1], v[2], v[3]);
    r.pose.orientation = Quaterniond(v[4], v[5], v[6], v[7]);
    r.commanded_twist = Twist::from_vector(Eigen::Map<const Vector6d>(&v[8]));
    r.compensated_wrench = Wrench::from_vector(Eigen::Map<const Vector6d>(&v[14]));
    r.per_axis_margin = Eigen::Map<const Vector6d>(&v[20]);
    r.slack = v[26];
    r.qp_status = parse_status(cells[27], lineno);
    trace.push_back(std::move(r));
  }
  return trace;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json wrench = nlohmann::json::array();
  for (int i = 0; i < 6; ++i) wrench.push_back(s.max_abs_wrench_per_axis[i]);
  return {{"max_abs_wrench_per_axis", wrench},
          {"max_limit_violation", s.max_limit_violation},
          {"final_pose_error_norm", s.final_pose_error_norm},
          {"settling_time", s.settling_time ? nlohmann::json(*s.settling_time) : nlohmann::json()},
          {"droop_max", s.droop_max},
          {"ticks", s.ticks},
          {"qp_failures", s.qp_failures}};
}

nlohmann::json summary_document(const RunSummary& summary, const ScenarioConfig& config) {
  nlohmann::json doc = summary_to_json(summary);
  doc["scenario"] = config.name;
  doc["config"] = to_json(config);
  return doc;
}

}  // namespace forcecbf
