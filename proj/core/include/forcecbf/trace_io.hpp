#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forcecbf/simulator.hpp"

namespace forcecbf {

inline constexpr std::string_view kTraceHeader =
    "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,fx,fy,fz,tx,ty,tz,"
    "h_fx,h_fy,h_fz,h_tx,h_ty,h_tz,gamma,status";

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// "optimal", "infeasible", "iteration_limit", or "n/a" without a QP.
std::string status_string(const std::optional<qp::QpStatus>& s);

/// Control-tick trace, compensated wrench.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

/// Companion file with the uncompensated sensor reading.
void write_raw_wrench_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

void write_plant_csv(std::ostream& out, const std::vector<PlantSample>& samples);

/// Inverse of write_trace_csv. Raw wrench and active labels are not stored
/// in the file and come back empty. Throws std::runtime_error on bad input.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

nlohmann::json summary_to_json(const RunSummary& summary);

/// Summary document written next to a trace: metrics plus the effective config.
nlohmann::json summary_document(const RunSummary& summary, const ScenarioConfig& config);

}  // namespace forcecbf
