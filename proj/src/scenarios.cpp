#include "contact_hybrid/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/models.hpp"

namespace contact_hybrid {

namespace {

using Range = ParamSpec::Range;

std::vector<ScenarioSpec> make_catalog() {
  std::vector<ScenarioSpec> c;
  const std::vector<std::pair<std::string, std::string>> curves = {
      {"ptex_a", "a = x^2 + 4y"}, {"ptex_b", "a = -x^2 + 4y"},
      {"ptex_c", "a = x^3 + 8y"}, {"ptex_d", "a = -x^3 + 8y"}};
  for (const auto& [name, formula] : curves)
    c.push_back({name,
                 "unit point mass touching the curve " + formula + " at the origin, no forces",
                 {},
                 {{"speed", 1.0, "m/s", "initial velocity along +x", Range::Any}},
                 1.0,
                 0.0,
                 std::nullopt});
  c.push_back({"ball_floor",
               "point mass dropped onto a floor",
               {{"mass", 1.0, "kg", "", Range::Positive},
                {"gravity", 9.81, "m/s^2", "", Range::Positive},
                {"friction", 0.5, "", "floor friction coefficient (0 removes the tangential)",
                 Range::NonNegative}},
               {{"height", 1.0, "m", "release height", Range::NonNegative},
                {"vx", 0.0, "m/s", "horizontal velocity", Range::Any}},
               1.0,
               0.03,
               std::nullopt});
  c.push_back({"ball_ceiling",
               "point mass striking a ceiling while gravity points away from it",
               {{"mass", 1.0, "kg", "", Range::Positive},
                {"gravity", 9.81, "m/s^2", "", Range::Positive},
                {"ceiling_height", 1.0, "m", "", Range::Positive}},
               {{"speed", 1.0, "m/s", "upward speed at the ceiling", Range::NonNegative}},
               0.5,
               0.03,
               std::nullopt});
  c.push_back({"sliding_point",
               "point sliding along the ground into a hill",
               {{"mass", 1.0, "kg", "", Range::Positive},
                {"gravity", 9.81, "m/s^2", "", Range::Positive},
                {"slope", 0.5235987755982988, "rad", "hill angle", Range::Positive},
                {"hill_x", 0.0, "m", "foot of the hill", Range::Any},
                {"mu_ground", 0.3, "", "", Range::NonNegative},
                {"mu_hill", 0.3, "", "", Range::NonNegative}},
               {{"speed", 1.0, "m/s", "speed toward the hill", Range::Positive},
                {"distance", 0.1, "m", "initial distance to the hill foot", Range::NonNegative}},
               1.0,
               0.03,
               std::nullopt});
  c.push_back({"rocking_block",
               "rectangular block rocking on flat ground",
               {{"height", 0.10, "m", "", Range::Positive},
                {"width", 0.05, "m", "", Range::Positive},
                {"mass", 5.0, "kg", "", Range::Positive},
                {"inertia", 0.0, "kg m^2", "0 selects the uniform block m (w^2 + h^2) / 12",
                 Range::NonNegative},
                {"gravity", 9.81, "m/s^2", "", Range::Positive},
                {"friction", 1.0, "", "corner friction coefficient", Range::Positive}},
               {{"angle", 0.05, "rad", "release angle pivoting on the left corner",
                 Range::NonNegative},
                {"angular_velocity", 0.0, "rad/s", "initial angular velocity", Range::Any},
                {"impact_speed", 0.0, "m/s",
                 "when positive, start flat with the center of mass descending at this speed "
                 "while pivoting on the left corner",
                 Range::NonNegative}},
               2.0,
               0.03,
               20});
  c.push_back({"planar_hexapod",
               "sagittal body with two massless motor-driven legs",
               {{"body_mass", 7.5, "kg", "", Range::Positive},
                {"body_inertia", 0.08, "kg m^2", "", Range::Positive},
                {"hip_offset", 0.2, "m", "", Range::Positive},
                {"leg_length", 0.17, "m", "", Range::Positive},
                {"gravity", 9.81, "m/s^2", "", Range::Positive},
                {"friction", 3.0, "", "", Range::Positive},
                {"kappa_p", 40.0, "N m", "motor stall torque over kappa_g", Range::Positive},
                {"kappa_g", 0.1, "s/rad", "inverse free speed of the motor", Range::Positive},
                {"swing_gain", 20.0, "1/s", "relaxation rate of airborne legs", Range::Positive},
                {"retract_gain", 400.0, "rad/s^2", "airborne foot lift gain", Range::NonNegative}},
               {{"height", 0.2, "m", "initial hip height", Range::Positive},
                {"theta_f", -0.5, "rad", "front leg angle", Range::Any},
                {"theta_r", -0.5, "rad", "rear leg angle", Range::Any}},
               2.0,
               0.03,
               std::nullopt});
  return c;
}

const std::set<std::string> kRunKeys = {
    "delta_t", "t_end", "sample_dt", "zeno_policy", "zeno_min_events", "zeno_window",
    "zeno_ratio", "zeno_floor", "strict_fa_scope", "stop_on_multiple_solutions", "rtol", "max_step"};
const std::set<std::string> kTolKeys = {"domain", "vel", "lin", "trend", "trend_order",
                                        "event_time"};

std::string where(const std::string& source, const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.line < 0) return source + ": ";
  return source + ":" + std::to_string(m.line + 1) + ": ";
}

double as_double(const std::string& source, const YAML::Node& n, const std::string& key) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ValidationError(where(source, n) + "'" + key + "' must be a number");
  }
}

double param(const ScenarioConfig& c, const std::string& key) {
  auto it = c.parameters.find(key);
  if (it == c.parameters.end()) throw ValidationError("missing parameter '" + key + "'");
  return it->second;
}

double init(const ScenarioConfig& c, const std::string& key) {
  auto it = c.initial.find(key);
  if (it == c.initial.end()) throw ValidationError("missing initial value '" + key + "'");
  return it->second;
}

void check_ranges(const ScenarioConfig& c, const ScenarioSpec& spec) {
  auto check = [&](const std::map<std::string, double>& values, const std::vector<ParamSpec>& specs,
                   const std::string& section) {
    for (const auto& [k, v] : values) {
      auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.key == k; });
      if (it == specs.end())
        throw ValidationError(c.source + ": unknown key '" + k + "' in section '" + section + "'");
      if (!std::isfinite(v))
        throw ValidationError(c.source + ": " + section + "." + k + " must be finite");
      if (it->range == Range::Positive && !(v > 0.0))
        throw ValidationError(c.source + ": " + section + "." + k + " must be positive");
      if (it->range == Range::NonNegative && !(v >= 0.0))
        throw ValidationError(c.source + ": " + section + "." + k + " must be non-negative");
    }
  };
  check(c.parameters, spec.parameters, "parameters");
  check(c.initial, spec.initial, "initial");
  if (!(c.run.delta_t >= 0.0)) throw ValidationError(c.source + ": run.delta_t must be non-negative");
  if (!(c.t_end > 0.0)) throw ValidationError(c.source + ": run.t_end must be positive");
  if (!(c.run.sample_dt > 0.0)) throw ValidationError(c.source + ": run.sample_dt must be positive");
  if (c.run.zeno.min_events < 3) throw ValidationError(c.source + ": run.zeno_min_events must be at least 3");
  if (!(c.run.zeno.ratio > 0.0 && c.run.zeno.ratio < 1.0))
    throw ValidationError(c.source + ": run.zeno_ratio must lie in (0, 1)");
  if (!(c.run.zeno.floor >= 0.0 && c.run.zeno.floor < 1.0))
    throw ValidationError(c.source + ": run.zeno_floor must lie in [0, 1)");
  const Tolerances& t = c.run.tol;
  if (!(t.domain > 0 && t.vel > 0 && t.lin > 0 && t.trend > 0 && t.event_time > 0))
    throw ValidationError(c.source + ": tolerances must be positive");
  if (t.trend_order < 0 || t.trend_order > kTaylorOrder)
    throw ValidationError(c.source + ": tolerances.trend_order must lie in [0, " +
                          std::to_string(kTaylorOrder) + "]");
}

BuiltScenario build_system(const ScenarioConfig& c) {
  BuiltScenario b;
  const std::string& name = c.scenario;
  if (name.rfind("ptex_", 0) == 0) {
    CurveParams p;
    const char v = name.back();
    p.sign = (v == 'a' || v == 'c') ? 1.0 : -1.0;
    p.power = (v == 'a' || v == 'b') ? 2 : 3;
    p.coeff = p.power == 2 ? 4.0 : 8.0;
    b.system = make_curve_point(name, p);
    b.mode = ContactMode{0};
    b.state = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(init(c, "speed"), 0.0)};
  } else if (name == "ball_floor") {
    BallParams p;
    p.mass = param(c, "mass");
    p.gravity = param(c, "gravity");
    p.friction = param(c, "friction");
    b.system = make_ball(name, p);
    b.state = {Eigen::Vector2d(0.0, init(c, "height")), Eigen::Vector2d(init(c, "vx"), 0.0)};
  } else if (name == "ball_ceiling") {
    BallParams p;
    p.mass = param(c, "mass");
    p.gravity = param(c, "gravity");
    p.ceiling = true;
    p.ceiling_height = param(c, "ceiling_height");
    b.system = make_ball(name, p);
    b.state = {Eigen::Vector2d(0.0, p.ceiling_height), Eigen::Vector2d(0.0, init(c, "speed"))};
  } else if (name == "sliding_point") {
    SlidingPointParams p;
    p.mass = param(c, "mass");
    p.gravity = param(c, "gravity");
    p.slope = param(c, "slope");
    p.hill_x = param(c, "hill_x");
    p.mu_ground = param(c, "mu_ground");
    p.mu_hill = param(c, "mu_hill");
    b.system = make_sliding_point(p);
    b.mode = ContactMode{0};
    b.state = {Eigen::Vector2d(p.hill_x - init(c, "distance"), 0.0),
               Eigen::Vector2d(init(c, "speed"), 0.0)};
  } else if (name == "rocking_block") {
    RockingBlockParams p;
    p.height = param(c, "height");
    p.width = param(c, "width");
    p.mass = param(c, "mass");
    p.inertia = param(c, "inertia");
    p.gravity = param(c, "gravity");
    p.friction = param(c, "friction");
    b.system = make_rocking_block(p);
    b.mode = ContactMode{0, 1};
    const double v = init(c, "impact_speed");
    const double th = v > 0.0 ? 0.0 : init(c, "angle");
    const double om = v > 0.0 ? -2.0 * v / p.width : init(c, "angular_velocity");
    // Pivot on the left corner, fixed at x = -w/2 on the ground.
    const double ox = -0.5 * p.width, oy = -0.5 * p.height;
    const double s = std::sin(th), co = std::cos(th);
    const Eigen::Vector3d q(-0.5 * p.width - (co * ox - s * oy), -(s * ox + co * oy), th);
    // Velocity of the center of mass for rotation about the pivot.
    const Eigen::Vector3d qd(om * (s * ox + co * oy), -om * (co * ox - s * oy), om);
    b.state = {q, qd};
  } else if (name == "planar_hexapod") {
    HexapodParams p;
    p.body_mass = param(c, "body_mass");
    p.body_inertia = param(c, "body_inertia");
    p.hip_offset = param(c, "hip_offset");
    p.leg_length = param(c, "leg_length");
    p.gravity = param(c, "gravity");
    p.friction = param(c, "friction");
    p.kappa_p = param(c, "kappa_p");
    p.kappa_g = param(c, "kappa_g");
    p.swing_gain = param(c, "swing_gain");
    p.retract_gain = param(c, "retract_gain");
    b.system = make_planar_hexapod(p);
    Eigen::VectorXd q(5), qd = Eigen::VectorXd::Zero(5);
    q << 0.0, init(c, "height"), 0.0, init(c, "theta_f"), init(c, "theta_r");
    qd(3) = qd(4) = 1.0 / p.kappa_g;
    b.state = {q, qd};
  } else {
    throw ValidationError(c.source + ": unknown scenario '" + name + "'");
  }
  return b;
}

}  // namespace

const std::vector<ScenarioSpec>& scenario_catalog() {
  static const std::vector<ScenarioSpec> catalog = make_catalog();
  return catalog;
}

const ScenarioSpec& scenario_spec(const std::string& name) {
  for (const auto& s : scenario_catalog())
    if (s.name == name) return s;
  throw ValidationError("unknown scenario '" + name + "'");
}

ScenarioConfig default_config(const std::string& name) {
  const ScenarioSpec& spec = scenario_spec(name);
  ScenarioConfig c;
  c.scenario = name;
  c.source = "<catalog:" + name + ">";
  for (const auto& p : spec.parameters) c.parameters[p.key] = p.default_value;
  for (const auto& p : spec.initial) c.initial[p.key] = p.default_value;
  c.t_end = spec.t_end;
  c.run.delta_t = spec.delta_t;
  if (spec.zeno_min_events) c.run.zeno.min_events = *spec.zeno_min_events;
  return c;
}

BuiltScenario build_scenario(const ScenarioConfig& config) {
  const ScenarioSpec& spec = scenario_spec(config.scenario);
  ScenarioConfig c = config;
  for (const auto& p : spec.parameters) c.parameters.emplace(p.key, p.default_value);
  for (const auto& p : spec.initial) c.initial.emplace(p.key, p.default_value);
  check_ranges(c, spec);
  BuiltScenario b = build_system(c);
  const MechSystem& sys = *b.system;
  if (c.initial_mode) b.mode = sys.parse_mode(*c.initial_mode);
  if (c.initial_q) {
    if (static_cast<int>(c.initial_q->size()) != sys.dofs())
      throw ValidationError(c.source + ": initial.q must have " + std::to_string(sys.dofs()) + " entries");
    b.state.q = Eigen::Map<const Eigen::VectorXd>(c.initial_q->data(), sys.dofs());
  }
  if (c.initial_qd) {
    if (static_cast<int>(c.initial_qd->size()) != sys.dofs())
      throw ValidationError(c.source + ": initial.qd must have " + std::to_string(sys.dofs()) + " entries");
    b.state.qd = Eigen::Map<const Eigen::VectorXd>(c.initial_qd->data(), sys.dofs());
  }
  if (!sys.valid_mode(b.mode))
    throw ValidationError(c.source + ": initial mode " + sys.mode_names(b.mode) + " is not a valid mode");
  if (!in_domain(sys, b.mode, b.state, c.run.tol))
    throw ValidationError(c.source + ": initial state is not in the domain of mode '" +
                          sys.mode_names(b.mode) + "'");
  b.options = c.run;
  b.t_end = c.t_end;
  return b;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ValidationError(source + ": top level must be a mapping");
  if (!root["scenario"]) throw ValidationError(source + ": missing required key 'scenario'");
  const std::string name = root["scenario"].as<std::string>();
  ScenarioConfig c;
  try {
    c = default_config(name);
  } catch (const ValidationError&) {
    throw ValidationError(where(source, root["scenario"]) + "unknown scenario '" + name + "'");
  }
  c.source = source;
  const ScenarioSpec& spec = scenario_spec(name);

  auto section = [&](const YAML::Node& node, const std::string& sec) {
    if (!node.IsMap()) throw ValidationError(where(source, node) + "'" + sec + "' must be a mapping");
  };
  auto lookup = [](const std::vector<ParamSpec>& specs, const std::string& key) {
    return std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.key == key; });
  };

  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string key = it->first.as<std::string>();
    const YAML::Node& val = it->second;
    if (key == "scenario") continue;
    if (key == "parameters") {
      section(val, key);
      for (auto p = val.begin(); p != val.end(); ++p) {
        const std::string k = p->first.as<std::string>();
        if (!lookup(spec.parameters, k))
          throw ValidationError(where(source, p->first) + "unknown key '" + k + "' in section 'parameters'");
        c.parameters[k] = as_double(source, p->second, k);
      }
    } else if (key == "initial") {
      section(val, key);
      for (auto p = val.begin(); p != val.end(); ++p) {
        const std::string k = p->first.as<std::string>();
        if (k == "mode") {
          c.initial_mode = p->second.IsSequence()
                               ? [&] {
                                   std::string s;
                                   for (const auto& e : p->second) s += (s.empty() ? "" : "+") + e.as<std::string>();
                                   return s;
                                 }()
                               : p->second.as<std::string>();
        } else if (k == "q" || k == "qd") {
          if (!p->second.IsSequence())
            throw ValidationError(where(source, p->second) + "'" + k + "' must be a list");
          std::vector<double> v;
          for (const auto& e : p->second) v.push_back(as_double(source, e, k));
          (k == "q" ? c.initial_q : c.initial_qd) = v;
        } else if (lookup(spec.initial, k)) {
          c.initial[k] = as_double(source, p->second, k);
        } else {
          throw ValidationError(where(source, p->first) + "unknown key '" + k + "' in section 'initial'");
        }
      }
    } else if (key == "run") {
      section(val, key);
      for (auto p = val.begin(); p != val.end(); ++p) {
        const std::string k = p->first.as<std::string>();
        if (!kRunKeys.count(k))
          throw ValidationError(where(source, p->first) + "unknown key '" + k + "' in section 'run'");
        if (k == "zeno_policy") {
          try {
            c.run.zeno.policy = parse_zeno_policy(p->second.as<std::string>());
          } catch (const ValidationError& e) {
            throw ValidationError(where(source, p->second) + e.what());
          }
        } else if (k == "strict_fa_scope" || k == "stop_on_multiple_solutions") {
          bool b = false;
          try {
            b = p->second.as<bool>();
          } catch (const YAML::Exception&) {
            throw ValidationError(where(source, p->second) + "'" + k + "' must be true or false");
          }
          (k == "strict_fa_scope" ? c.run.strict_fa_scope : c.run.stop_on_multiple_solutions) = b;
        } else {
          const double d = as_double(source, p->second, k);
          if (k == "delta_t") c.run.delta_t = d;
          if (k == "t_end") c.t_end = d;
          if (k == "sample_dt") c.run.sample_dt = d;
          if (k == "zeno_min_events") c.run.zeno.min_events = static_cast<int>(d);
          if (k == "zeno_window") c.run.zeno.window = d;
          if (k == "zeno_ratio") c.run.zeno.ratio = d;
          if (k == "zeno_floor") c.run.zeno.floor = d;
          if (k == "rtol") c.run.rtol = d;
          if (k == "max_step") c.run.max_step = d;
        }
      }
    } else if (key == "tolerances") {
      section(val, key);
      for (auto p = val.begin(); p != val.end(); ++p) {
        const std::string k = p->first.as<std::string>();
        if (!kTolKeys.count(k))
          throw ValidationError(where(source, p->first) + "unknown key '" + k + "' in section 'tolerances'");
        const double d = as_double(source, p->second, k);
        Tolerances& t = c.run.tol;
        if (k == "domain") t.domain = d;
        if (k == "vel") t.vel = d;
        if (k == "lin") t.lin = d;
        if (k == "trend") t.trend = d;
        if (k == "trend_order") t.trend_order = static_cast<int>(d);
        if (k == "event_time") t.event_time = d;
      }
    } else {
      throw ValidationError(where(source, it->first) + "unknown top-level key '" + key + "'");
    }
  }
  return c;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string dump_scenario(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "scenario" << YAML::Value << c.scenario;
  out << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : c.parameters) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : c.initial) out << YAML::Key << k << YAML::Value << v;
  if (c.initial_mode) out << YAML::Key << "mode" << YAML::Value << *c.initial_mode;
  if (c.initial_q) out << YAML::Key << "q" << YAML::Value << YAML::Flow << *c.initial_q;
  if (c.initial_qd) out << YAML::Key << "qd" << YAML::Value << YAML::Flow << *c.initial_qd;
  out << YAML::EndMap;
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "delta_t" << YAML::Value << c.run.delta_t;
  out << YAML::Key << "t_end" << YAML::Value << c.t_end;
  out << YAML::Key << "sample_dt" << YAML::Value << c.run.sample_dt;
  out << YAML::Key << "zeno_policy" << YAML::Value << to_string(c.run.zeno.policy);
  out << YAML::Key << "zeno_min_events" << YAML::Value << c.run.zeno.min_events;
  out << YAML::Key << "zeno_window" << YAML::Value << c.run.zeno.window;
  out << YAML::Key << "zeno_ratio" << YAML::Value << c.run.zeno.ratio;
  out << YAML::Key << "zeno_floor" << YAML::Value << c.run.zeno.floor;
  out << YAML::Key << "strict_fa_scope" << YAML::Value << c.run.strict_fa_scope;
  out << YAML::Key << "stop_on_multiple_solutions" << YAML::Value << c.run.stop_on_multiple_solutions;
  out << YAML::Key << "rtol" << YAML::Value << c.run.rtol;
  out << YAML::Key << "max_step" << YAML::Value << c.run.max_step;
  out << YAML::EndMap;
  const Tolerances& t = c.run.tol;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "domain" << YAML::Value << t.domain;
  out << YAML::Key << "vel" << YAML::Value << t.vel;
  out << YAML::Key << "lin" << YAML::Value << t.lin;
  out << YAML::Key << "trend" << YAML::Value << t.trend;
  out << YAML::Key << "trend_order" << YAML::Value << t.trend_order;
  out << YAML::Key << "event_time" << YAML::Value << t.event_time;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void set_sweep_value(ScenarioConfig& c, const std::string& key, double value) {
  const ScenarioSpec& spec = scenario_spec(c.scenario);
  auto has = [](const std::vector<ParamSpec>& s, const std::string& k) {
    return std::any_of(s.begin(), s.end(), [&](const ParamSpec& p) { return p.key == k; });
  };
  const auto dot = key.find('.');
  const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
  const std::string k = dot == std::string::npos ? key : key.substr(dot + 1);
  if (sec == "parameters" && has(spec.parameters, k)) {
    c.parameters[k] = value;
  } else if (sec == "initial" && has(spec.initial, k)) {
    c.initial[k] = value;
  } else if (key == "run.delta_t" || key == "delta_t") {
    c.run.delta_t = value;
  } else if (key == "run.t_end" || key == "t_end") {
    c.t_end = value;
  } else if (sec.empty() && has(spec.parameters, k)) {
    c.parameters[k] = value;
  } else if (sec.empty() && has(spec.initial, k)) {
    c.initial[k] = value;
  } else {
    throw ValidationError("'" + key + "' is not a sweepable key of scenario " + c.scenario);
  }
}

std::vector<std::string> sweepable_keys(const ScenarioConfig& c) {
  const ScenarioSpec& spec = scenario_spec(c.scenario);
  std::vector<std::string> out;
  for (const auto& p : spec.parameters) out.push_back("parameters." + p.key);
  for (const auto& p : spec.initial) out.push_back("initial." + p.key);
  out.push_back("run.delta_t");
  out.push_back("run.t_end");
  return out;
}

}  // namespace contact_hybrid
