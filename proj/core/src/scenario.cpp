#include "forcecbf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace forcecbf {
namespace {

using nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string join(const std::string& path, std::size_t index) {
  return join(path, std::to_string(index));
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& path) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(join(path, key), "unknown key");
    }
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double number_or(const json& obj, std::string_view key, double fallback, const std::string& path) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  return as_number(*it, join(path, key));
}

const json& required(const json& obj, std::string_view key, const std::string& path) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

template <int N>
Eigen::Matrix<double, N, 1> as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw ConfigError(path, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = as_number(j[static_cast<std::size_t>(i)], join(path, i));
  return v;
}

template <int N>
Eigen::Matrix<double, N, 1> vector_or(const json& obj, std::string_view key,
                                      const Eigen::Matrix<double, N, 1>& fallback,
                                      const std::string& path) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  return as_vector<N>(*it, join(path, key));
}

template <typename Derived>
json array_of(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ControllerConfig controller_from_json(const json& j, const std::string& path) {
  check_keys(j, {"type", "params"}, path);
  const json& type = required(j, "type", path);
  if (!type.is_string()) throw ConfigError(join(path, "type"), "expected a string");
  const std::string kind = type.get<std::string>();
  const std::string ppath = join(path, "params");
  const json params = j.contains("params") ? j.at("params") : json::object();

  ControllerConfig c;
  if (kind == "cbf") {
    c.kind = ControllerKind::cbf;
    check_keys(params, {"alpha_force", "alpha_torque", "lambda", "slack_weight_k", "error_weight"},
               ppath);
    c.cbf.alpha_force = number_or(params, "alpha_force", c.cbf.alpha_force, ppath);
    c.cbf.alpha_torque = number_or(params, "alpha_torque", c.cbf.alpha_torque, ppath);
    c.cbf.lambda = number_or(params, "lambda", c.cbf.lambda, ppath);
    c.cbf.slack_weight_k = number_or(params, "slack_weight_k", c.cbf.slack_weight_k, ppath);
    c.cbf.error_weight = vector_or<6>(params, "error_weight", c.cbf.error_weight, ppath);
  } else if (kind == "admittance") {
    c.kind = ControllerKind::admittance;
    check_keys(params, {"stiffness", "damping"}, ppath);
    c.admittance.stiffness = vector_or<6>(params, "stiffness", c.admittance.stiffness, ppath);
    c.admittance.damping = vector_or<6>(params, "damping", c.admittance.damping, ppath);
  } else {
    throw ConfigError(join(path, "type"), "must be \"cbf\" or \"admittance\"");
  }
  return c;
}

json controller_to_json(const ControllerConfig& c) {
  if (c.kind == ControllerKind::cbf) {
    return {{"type", "cbf"},
            {"params",
             {{"alpha_force", c.cbf.alpha_force},
              {"alpha_torque", c.cbf.alpha_torque},
              {"lambda", c.cbf.lambda},
              {"slack_weight_k", c.cbf.slack_weight_k},
              {"error_weight", array_of(c.cbf.error_weight)}}}};
  }
  return {{"type", "admittance"},
          {"params",
           {{"stiffness", array_of(c.admittance.stiffness)},
            {"damping", array_of(c.admittance.damping)}}}};
}

ScenarioEvent event_from_json(const json& j, const std::string& path) {
  check_keys(j, {"t", "contact", "field", "op", "value", "ramp"}, path);
  ScenarioEvent e;
  e.t = as_number(required(j, "t", path), join(path, "t"));
  const json& contact = required(j, "contact", path);
  if (!contact.is_number_integer()) throw ConfigError(join(path, "contact"), "expected an integer");
  e.contact = contact.get<int>();
  const json& field = required(j, "field", path);
  if (!field.is_string()) throw ConfigError(join(path, "field"), "expected a string");
  e.field = field.get<std::string>();
  if (j.contains("op")) {
    const json& op = j.at("op");
    if (op == "set") {
      e.op = ScenarioEvent::Op::set;
    } else if (op == "add") {
      e.op = ScenarioEvent::Op::add;
    } else {
      throw ConfigError(join(path, "op"), "must be \"set\" or \"add\"");
    }
  }
  e.value = as_number(required(j, "value", path), join(path, "value"));
  e.ramp = number_or(j, "ramp", 0.0, path);
  return e;
}

json event_to_json(const ScenarioEvent& e) {
  return {{"t", e.t},
          {"contact", e.contact},
          {"field", e.field},
          {"op", e.op == ScenarioEvent::Op::set ? "set" : "add"},
          {"value", e.value},
          {"ramp", e.ramp}};
}

void check_vector(const Vector6d& v, bool strictly_positive, const std::string& path) {
  for (int i = 0; i < 6; ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0 || (strictly_positive && v[i] == 0.0)) {
      throw ConfigError(join(path, i), strictly_positive ? "must be > 0" : "must be >= 0");
    }
  }
}

void validate_contact(const ContactModel& contact, const std::string& path) {
  if (const auto* s = std::get_if<SpringContact>(&contact)) {
    check_vector(s->stiffness, false, join(path, "stiffness"));
  } else if (const auto* h = std::get_if<HangingLoad>(&contact)) {
    if (!(h->mass >= 0.0)) throw ConfigError(join(path, "mass"), "must be >= 0");
    if (!(h->ground_stiffness > 0.0)) throw ConfigError(join(path, "ground_stiffness"), "must be > 0");
    if (!(h->rope_length >= 0.0)) throw ConfigError(join(path, "rope_length"), "must be >= 0");
  } else if (const auto* g = std::get_if<HumanGuide>(&contact)) {
    check_vector(g->grip_stiffness, false, join(path, "grip_stiffness"));
    if (g->intent_trajectory.empty()) {
      throw ConfigError(join(path, "intent_trajectory"), "must contain at least one waypoint");
    }
    for (std::size_t i = 1; i < g->intent_trajectory.size(); ++i) {
      if (!(g->intent_trajectory[i].t >= g->intent_trajectory[i - 1].t)) {
        throw ConfigError(join(join(join(path, "intent_trajectory"), i), "t"), "waypoints must be sorted");
      }
    }
  } else if (const auto* ih = std::get_if<InteractiveHand>(&contact)) {
    check_vector(ih->hand_stiffness, false, join(path, "hand_stiffness"));
    check_vector(ih->envelope.vector(), false, join(path, "envelope"));
  }
}

std::vector<std::string> split_path(const std::string& dotted) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

template <typename JsonT>
JsonT* walk(JsonT& doc, const std::string& dotted) {
  JsonT* cur = &doc;
  for (const std::string& part : split_path(dotted)) {
    if (part.empty()) return nullptr;
    if (cur->is_object()) {
      const auto it = cur->find(part);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array()) {
      if (!std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return nullptr;
      }
      const std::size_t idx = std::stoul(part);
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else {
      return nullptr;
    }
  }
  return cur;
}

}  // namespace

json to_json(const Pose& pose) {
  const Quaterniond& q = pose.orientation;
  return {{"position", array_of(pose.position)}, {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

json to_json(const Wrench& wrench) {
  return {{"force", array_of(wrench.force)}, {"torque", array_of(wrench.torque)}};
}

Pose pose_from_json(const json& j, const std::string& path) {
  check_keys(j, {"position", "orientation", "rpy"}, path);
  const Vector3d position = as_vector<3>(required(j, "position", path), join(path, "position"));
  if (j.contains("orientation") && j.contains("rpy")) {
    throw ConfigError(path, "give either orientation or rpy, not both");
  }
  if (j.contains("rpy")) {
    const Vector3d rpy = as_vector<3>(j.at("rpy"), join(path, "rpy"));
    return pose_from_rpy(position, rpy[0], rpy[1], rpy[2]);
  }
  if (!j.contains("orientation")) return make_pose(position, Quaterniond::Identity());
  const Eigen::Vector4d q = as_vector<4>(j.at("orientation"), join(path, "orientation"));
  const double norm = q.norm();
  if (norm < 1e-6) throw ConfigError(join(path, "orientation"), "quaternion must be non-zero");
  if (std::abs(norm - 1.0) > 1e-6) {
    throw ConfigError(join(path, "orientation"), "quaternion [w,x,y,z] must have unit norm");
  }
  const Quaterniond quat(q[0], q[1], q[2], q[3]);
  // Keep already-normalized input bit-exact so documents round-trip.
  if (std::abs(norm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return Pose{position, quat};
  return make_pose(position, quat);
}

Wrench wrench_from_json(const json& j, const std::string& path) {
  check_keys(j, {"force", "torque"}, path);
  Wrench w;
  w.force = vector_or<3>(j, "force", Vector3d::Zero(), path);
  w.torque = vector_or<3>(j, "torque", Vector3d::Zero(), path);
  return w;
}

json to_json(const ContactModel& contact) {
  if (const auto* s = std::get_if<SpringContact>(&contact)) {
    return {{"kind", "spring"}, {"anchor", to_json(s->anchor)}, {"stiffness", array_of(s->stiffness)}};
  }
  if (const auto* h = std::get_if<HangingLoad>(&contact)) {
    return {{"kind", "hanging"},
            {"mass", h->mass},
            {"rope_attach_offset", array_of(h->rope_attach_offset)},
            {"rope_length", h->rope_length},
            {"ground_height", h->ground_height},
            {"ground_stiffness", h->ground_stiffness}};
  }
  if (const auto* g = std::get_if<HumanGuide>(&contact)) {
    json traj = json::array();
    for (const auto& w : g->intent_trajectory) traj.push_back({{"t", w.t}, {"pose", to_json(w.pose)}});
    return {{"kind", "human_guide"},
            {"grip_stiffness", array_of(g->grip_stiffness)},
            {"intent_trajectory", traj}};
  }
  const auto& ih = std::get<InteractiveHand>(contact);
  return {{"kind", "interactive"},
          {"rest", to_json(ih.rest)},
          {"hand_stiffness", array_of(ih.hand_stiffness)},
          {"envelope", to_json(ih.envelope)}};
}

ContactModel contact_from_json(const json& j, const std::string& path, const Pose& default_rest) {
  require_object(j, path);
  const json& kind_j = required(j, "kind", path);
  if (!kind_j.is_string()) throw ConfigError(join(path, "kind"), "expected a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "spring") {
    check_keys(j, {"kind", "anchor", "stiffness"}, path);
    SpringContact s;
    s.anchor = pose_from_json(required(j, "anchor", path), join(path, "anchor"));
    s.stiffness = as_vector<6>(required(j, "stiffness", path), join(path, "stiffness"));
    return s;
  }
  if (kind == "hanging") {
    check_keys(j, {"kind", "mass", "rope_attach_offset", "rope_length", "ground_height",
                   "ground_stiffness"},
               path);
    HangingLoad h;
    h.mass = number_or(j, "mass", h.mass, path);
    h.rope_attach_offset = vector_or<3>(j, "rope_attach_offset", h.rope_attach_offset, path);
    h.rope_length = number_or(j, "rope_length", h.rope_length, path);
    h.ground_height = number_or(j, "ground_height", h.ground_height, path);
    h.ground_stiffness = number_or(j, "ground_stiffness", h.ground_stiffness, path);
    return h;
  }
  if (kind == "human_guide") {
    check_keys(j, {"kind", "grip_stiffness", "intent_trajectory"}, path);
    HumanGuide g;
    g.grip_stiffness = as_vector<6>(required(j, "grip_stiffness", path), join(path, "grip_stiffness"));
    const std::string tpath = join(path, "intent_trajectory");
    const json& traj = required(j, "intent_trajectory", path);
    if (!traj.is_array()) throw ConfigError(tpath, "expected an array");
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const std::string wpath = join(tpath, i);
      check_keys(traj[i], {"t", "pose"}, wpath);
      GuideWaypoint w;
      w.t = as_number(required(traj[i], "t", wpath), join(wpath, "t"));
      w.pose = pose_from_json(required(traj[i], "pose", wpath), join(wpath, "pose"));
      g.intent_trajectory.push_back(w);
    }
    return g;
  }
  if (kind == "interactive") {
    check_keys(j, {"kind", "rest", "hand_stiffness", "envelope"}, path);
    InteractiveHand ih;
    ih.rest = j.contains("rest") ? pose_from_json(j.at("rest"), join(path, "rest")) : default_rest;
    ih.hand_stiffness = vector_or<6>(j, "hand_stiffness",
                                     (Vector6d() << 50, 50, 50, 5, 5, 5).finished(), path);
    ih.envelope = j.contains("envelope")
                      ? wrench_from_json(j.at("envelope"), join(path, "envelope"))
                      : Wrench{Vector3d::Constant(30.0), Vector3d::Constant(3.0)};
    return ih;
  }
  throw ConfigError(join(path, "kind"),
                    "must be one of \"spring\", \"hanging\", \"human_guide\", \"interactive\"");
}

json to_json(const ScenarioConfig& c) {
  json contacts = json::array();
  for (const auto& m : c.contacts) contacts.push_back(to_json(m));
  json events = json::array();
  for (const auto& e : c.events) events.push_back(event_to_json(e));
  return {{"name", c.name},
          {"initial_pose", to_json(c.initial_pose)},
          {"desired_pose", to_json(c.desired_pose)},
          {"controller", controller_to_json(c.controller)},
          {"limits", to_json(c.limits.w_max)},
          {"contacts", contacts},
          {"events", events},
          {"tool_wrench", to_json(c.tool_wrench)},
          {"control_rate_hz", c.control_rate_hz},
          {"plant_dt", c.plant_dt},
          {"duration", c.duration},
          {"noise_std", to_json(c.noise_std)},
          {"lowpass_alpha", c.lowpass_alpha},
          {"rng_seed", c.rng_seed}};
}

ScenarioConfig scenario_from_json(const json& j) {
  check_keys(j, {"name", "initial_pose", "desired_pose", "controller", "limits", "contacts",
                 "events", "tool_wrench", "control_rate_hz", "plant_dt", "duration", "noise_std",
                 "lowpass_alpha", "rng_seed"},
             "");
  ScenarioConfig c;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("name", "expected a string");
    c.name = j.at("name").get<std::string>();
  }
  c.initial_pose = pose_from_json(required(j, "initial_pose", ""), "initial_pose");
  c.desired_pose = j.contains("desired_pose") ? pose_from_json(j.at("desired_pose"), "desired_pose")
                                              : c.initial_pose;
  c.controller = controller_from_json(required(j, "controller", ""), "controller");
  c.limits.w_max = wrench_from_json(required(j, "limits", ""), "limits");
  if (j.contains("contacts")) {
    const json& contacts = j.at("contacts");
    if (!contacts.is_array()) throw ConfigError("contacts", "expected an array");
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      c.contacts.push_back(contact_from_json(contacts[i], join("contacts", i), c.desired_pose));
    }
  }
  if (j.contains("events")) {
    const json& events = j.at("events");
    if (!events.is_array()) throw ConfigError("events", "expected an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
      c.events.push_back(event_from_json(events[i], join("events", i)));
    }
  }
  if (j.contains("tool_wrench")) c.tool_wrench = wrench_from_json(j.at("tool_wrench"), "tool_wrench");
  c.control_rate_hz = number_or(j, "control_rate_hz", c.control_rate_hz, "");
  c.plant_dt = number_or(j, "plant_dt", c.plant_dt, "");
  c.duration = as_number(required(j, "duration", ""), "duration");
  if (j.contains("noise_std")) c.noise_std = wrench_from_json(j.at("noise_std"), "noise_std");
  c.lowpass_alpha = number_or(j, "lowpass_alpha", c.lowpass_alpha, "");
  if (j.contains("rng_seed")) {
    const json& seed = j.at("rng_seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                      seed.get<std::int64_t>() < 0)) {
      throw ConfigError("rng_seed", "expected a non-negative integer");
    }
    c.rng_seed = seed.get<std::uint64_t>();
  }
  validate(c);
  return c;
}

void validate(const ScenarioConfig& c) {
  if (!c.limits.valid()) {
    const Vector6d w = c.limits.w_max.vector();
    for (int i = 0; i < 6; ++i) {
      if (!(w[i] > 0.0)) {
        throw ConfigError(i < 3 ? "limits.force." + std::to_string(i)
                                : "limits.torque." + std::to_string(i - 3),
                          "must be > 0");
      }
    }
  }
  if (c.controller.kind == ControllerKind::cbf) {
    const ControllerParams& p = c.controller.cbf;
    const std::string pp = "controller.params";
    if (!(p.alpha_force > 0.0)) throw ConfigError(pp + ".alpha_force", "must be > 0");
    if (!(p.alpha_torque > 0.0)) throw ConfigError(pp + ".alpha_torque", "must be > 0");
    if (!(p.lambda > 0.0)) throw ConfigError(pp + ".lambda", "must be > 0");
    if (!(p.slack_weight_k > 0.0)) throw ConfigError(pp + ".slack_weight_k", "must be > 0");
    check_vector(p.error_weight, true, pp + ".error_weight");
  } else {
    check_vector(c.controller.admittance.stiffness, false, "controller.params.stiffness");
    check_vector(c.controller.admittance.damping, true, "controller.params.damping");
  }
  if (!(c.duration > 0.0)) throw ConfigError("duration", "must be > 0");
  if (!(c.plant_dt > 0.0)) throw ConfigError("plant_dt", "must be > 0");
  if (!(c.control_rate_hz > 0.0)) throw ConfigError("control_rate_hz", "must be > 0");
  if (c.control_rate_hz > 1.0 / c.plant_dt * (1.0 + 1e-12)) {
    throw ConfigError("control_rate_hz", "must be <= 1/plant_dt");
  }
  if (!(c.lowpass_alpha > 0.0 && c.lowpass_alpha <= 1.0)) {
    throw ConfigError("lowpass_alpha", "must be in (0, 1]");
  }
  check_vector(c.noise_std.vector(), false, "noise_std");
  for (std::size_t i = 0; i < c.contacts.size(); ++i) {
    validate_contact(c.contacts[i], join("contacts", i));
  }
  for (std::size_t i = 0; i < c.events.size(); ++i) {
    const ScenarioEvent& e = c.events[i];
    const std::string path = join("events", i);
    if (!(e.t >= 0.0)) throw ConfigError(join(path, "t"), "must be >= 0");
    if (i > 0 && e.t < c.events[i - 1].t) throw ConfigError(join(path, "t"), "events must be sorted by t");
    if (!(e.ramp >= 0.0)) throw ConfigError(join(path, "ramp"), "must be >= 0");
    if (e.contact < 0 || e.contact >= static_cast<int>(c.contacts.size())) {
      throw ConfigError(join(path, "contact"), "no such contact");
    }
    const json doc = to_json(c.contacts[static_cast<std::size_t>(e.contact)]);
    const json* target = find_path(doc, e.field);
    if (target == nullptr || !target->is_number()) {
      throw ConfigError(join(path, "field"), "\"" + e.field + "\" is not a numeric field of the contact");
    }
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
  }
  if (doc.is_object() && !doc.contains("name")) doc["name"] = path.stem().string();
  return scenario_from_json(doc);
}

const json* find_path(const json& doc, const std::string& dotted_key) {
  return walk(doc, dotted_key);
}

json* find_path(json& doc, const std::string& dotted_key) { return walk(doc, dotted_key); }

void apply_override(json& doc, const std::string& dotted_key, const std::string& value) {
  json* target = find_path(doc, dotted_key);
  if (target == nullptr) throw ConfigError(dotted_key, "override key does not exist in the schema");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  *target = parsed;
}

ScenarioConfig with_overrides(const ScenarioConfig& config,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  json doc = to_json(config);
  for (const auto& [key, value] : overrides) apply_override(doc, key, value);
  return scenario_from_json(doc);
}

}  // namespace forcecbf
