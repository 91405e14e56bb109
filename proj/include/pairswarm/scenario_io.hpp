// Copyright 2026 The pairswarm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON documents: scenario specs, goal configurations, per-tick trace lines,
// run reports, and the flat CSV export of a trace.

#ifndef PAIRSWARM_SCENARIO_IO_HPP_
#define PAIRSWARM_SCENARIO_IO_HPP_

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pairswarm/simulator.hpp"

namespace pairswarm {

using Json = nlohmann::ordered_json;

namespace io {

inline Json pose_json(const Pose2D& p) { return Json::array({p.x(), p.y(), p.theta()}); }
inline Json control_json(const ControlInput& u) { return Json::array({u.v, u.omega}); }
inline Json pair_json(const ConnectionPair& p) {
  return Json::array({p.robot_i, to_string(p.point_i), p.robot_j, to_string(p.point_j)});
}

inline std::string_view to_string(BiasSign s) {
  switch (s) {
    case BiasSign::Same: return "same";
    case BiasSign::Opposite: return "opposite";
    case BiasSign::LeanIn: return "lean_in";
  }
  return "same";
}
inline std::string_view to_string(MimicMode m) { return m == MimicMode::Copy ? "copy" : "rigid"; }

/// Collects field errors while reading a JSON object tree.
class Reader {
 public:
  std::vector<FieldError> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back({path, msg}); }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  bool object(const Json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) {
      fail(path.empty() ? "$" : path, "expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(join(path, k), "unknown field");
    return true;
  }

  void number(const Json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number()) return fail(join(path, key), "expected a number");
    out = v.get<double>();
  }

  void integer(const Json& j, const std::string& path, const char* key, int& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number_integer()) return fail(join(path, key), "expected an integer");
    out = v.get<int>();
  }

  void seed(const Json& j, const std::string& path, const char* key, std::uint64_t& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number_unsigned()) return fail(join(path, key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const Json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_boolean()) return fail(join(path, key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const Json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_string()) return fail(join(path, key), "expected a string");
    out = v.get<std::string>();
  }

  bool pose(const Json& j, const std::string& path, Pose2D& out) {
    if (!j.is_array() || j.size() != 3 ||
        !std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number(); })) {
      fail(path, "expected [x, y, theta]");
      return false;
    }
    out = Pose2D(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    return true;
  }

  std::vector<Pose2D> poses(const Json& j, const std::string& path) {
    std::vector<Pose2D> out;
    if (!j.is_array()) {
      fail(path, "expected an array of poses");
      return out;
    }
    for (std::size_t k = 0; k < j.size(); ++k) {
      Pose2D p;
      if (pose(j[k], path + "[" + std::to_string(k) + "]", p)) out.push_back(p);
    }
    return out;
  }

  void calibration(const Json& j, const std::string& path, CalibrationParams& p) {
    if (!object(j, path,
                {"k_v", "k_omega", "m_min", "m_max", "mu_v", "mu_omega", "polygon_a", "polygon_b"}))
      return;
    number(j, path, "k_v", p.k_v);
    number(j, path, "k_omega", p.k_omega);
    number(j, path, "m_min", p.m_min);
    number(j, path, "m_max", p.m_max);
    number(j, path, "mu_v", p.mu_v);
    number(j, path, "mu_omega", p.mu_omega);
    number(j, path, "polygon_b", p.polygon_b);
    if (j.contains("polygon_a")) {
      const Json& a = j.at("polygon_a");
      if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
        p.polygon_a = {a[0].get<double>(), a[1].get<double>()};
      else
        fail(join(path, "polygon_a"), "expected [v, omega]");
    }
  }
};

}  // namespace io

inline Json calibration_to_json(const CalibrationParams& p) {
  return Json{{"k_v", p.k_v},
              {"k_omega", p.k_omega},
              {"m_min", p.m_min},
              {"m_max", p.m_max},
              {"mu_v", p.mu_v},
              {"mu_omega", p.mu_omega},
              {"polygon_a", Json::array({p.polygon_a.x(), p.polygon_a.y()})},
              {"polygon_b", p.polygon_b}};
}

inline Json goal_spec_to_json(const GoalSpec& g) {
  switch (g.kind) {
    case GoalSpec::Kind::Line:
      return Json{{"kind", "line"}, {"n", g.n}};
    case GoalSpec::Kind::Mesh:
      return Json{{"kind", "mesh"}, {"rows", g.rows}, {"cols", g.cols}};
    case GoalSpec::Kind::Poses: {
      Json ps = Json::array();
      for (const auto& p : g.poses) ps.push_back(io::pose_json(p));
      return Json{{"kind", "poses"}, {"poses", ps}};
    }
  }
  return {};
}

/// Full document with every field, defaults included.
inline Json scenario_to_json(const ScenarioSpec& s) {
  Json j;
  j["schema_version"] = ScenarioSpec::kSchemaVersion;
  j["name"] = s.name;
  j["dt"] = s.dt;
  j["eps"] = s.eps;
  j["body_length"] = s.body_length;
  j["max_time"] = s.max_time;
  j["seed"] = s.seed;
  j["pose_noise"] = s.pose_noise;
  j["gains"] = Json{{"position", s.gains.position}, {"angle", s.gains.angle}};
  j["k_bias"] = s.k_bias;
  j["theta_bias"] = s.theta_bias;
  j["bias_sign"] = io::to_string(s.bias_sign);
  j["mimic"] = io::to_string(s.mimic);
  j["refine_lobes"] = s.refine_lobes;
  j["stall_window"] = s.stall_window;
  j["stall_progress"] = s.stall_progress;
  j["pilot_params"] = calibration_to_json(s.pilot_params);
  j["non_pilot_params"] = calibration_to_json(s.non_pilot_params);
  Json robots = Json::array();
  for (const auto& r : s.robots)
    robots.push_back(Json{{"kind", to_string(r.kind.kind)}, {"pose", io::pose_json(r.pose)}});
  j["robots"] = robots;
  if (s.start) {
    const auto& g = *s.start;
    j["start"] = Json{{"rotation", g.rotation},
                      {"translation", g.translation},
                      {"axial_spread", g.axial_spread},
                      {"axial_jitter", g.axial_jitter},
                      {"lateral_gap_min", g.lateral_gap_min},
                      {"lateral_gap_max", g.lateral_gap_max},
                      {"heading_noise", g.heading_noise},
                      {"pilots", g.pilots},
                      {"max_attempts", g.max_attempts}};
  }
  j["goal"] = goal_spec_to_json(s.goal);
  return j;
}

struct ScenarioParse {
  ScenarioSpec spec;
  std::vector<FieldError> errors;  // parse errors followed by validation errors
  bool ok() const { return errors.empty(); }
};

/// Reads a scenario document. Missing fields take their defaults; unknown
/// fields and type mismatches are reported with their paths.
inline ScenarioParse parse_scenario(const Json& j, bool run_validation = true) {
  ScenarioParse out;
  ScenarioSpec& s = out.spec;
  io::Reader r;
  if (r.object(j, "", {"schema_version", "name", "dt", "eps", "body_length", "max_time", "seed",
                       "pose_noise", "gains", "k_bias", "theta_bias", "bias_sign", "mimic",
                       "refine_lobes", "stall_window", "stall_progress", "pilot_params",
                       "non_pilot_params", "robots", "start", "goal"})) {
    int version = ScenarioSpec::kSchemaVersion;
    if (!j.contains("schema_version")) r.fail("schema_version", "missing");
    r.integer(j, "", "schema_version", version);
    if (version != ScenarioSpec::kSchemaVersion)
      r.fail("schema_version", "unsupported version " + std::to_string(version));
    r.string(j, "", "name", s.name);
    r.number(j, "", "dt", s.dt);
    r.number(j, "", "eps", s.eps);
    r.number(j, "", "body_length", s.body_length);
    r.number(j, "", "max_time", s.max_time);
    r.seed(j, "", "seed", s.seed);
    r.number(j, "", "pose_noise", s.pose_noise);
    if (j.contains("gains") && r.object(j["gains"], "gains", {"position", "angle"})) {
      r.number(j["gains"], "gains", "position", s.gains.position);
      r.number(j["gains"], "gains", "angle", s.gains.angle);
    }
    r.number(j, "", "k_bias", s.k_bias);
    r.number(j, "", "theta_bias", s.theta_bias);
    if (j.contains("bias_sign")) {
      std::string v;
      r.string(j, "", "bias_sign", v);
      if (v == "same") s.bias_sign = BiasSign::Same;
      else if (v == "opposite") s.bias_sign = BiasSign::Opposite;
      else if (v == "lean_in") s.bias_sign = BiasSign::LeanIn;
      else r.fail("bias_sign", "expected same, opposite or lean_in");
    }
    if (j.contains("mimic")) {
      std::string v;
      r.string(j, "", "mimic", v);
      if (v == "copy") s.mimic = MimicMode::Copy;
      else if (v == "rigid") s.mimic = MimicMode::Rigid;
      else r.fail("mimic", "expected copy or rigid");
    }
    r.boolean(j, "", "refine_lobes", s.refine_lobes);
    r.number(j, "", "stall_window", s.stall_window);
    r.number(j, "", "stall_progress", s.stall_progress);
    if (j.contains("pilot_params")) r.calibration(j["pilot_params"], "pilot_params", s.pilot_params);
    if (j.contains("non_pilot_params"))
      r.calibration(j["non_pilot_params"], "non_pilot_params", s.non_pilot_params);

    if (j.contains("robots")) {
      const Json& rs = j["robots"];
      if (!rs.is_array()) {
        r.fail("robots", "expected an array");
      } else {
        for (std::size_t k = 0; k < rs.size(); ++k) {
          const std::string path = "robots[" + std::to_string(k) + "]";
          if (!r.object(rs[k], path, {"kind", "pose"})) continue;
          RobotSpec rob;
          std::string kind = "non_pilot";
          r.string(rs[k], path, "kind", kind);
          if (kind == "pilot") rob.kind = RobotKind::pilot();
          else if (kind == "non_pilot") rob.kind = RobotKind::non_pilot();
          else r.fail(path + ".kind", "expected pilot or non_pilot");
          if (!rs[k].contains("pose")) r.fail(path + ".pose", "missing");
          else r.pose(rs[k]["pose"], path + ".pose", rob.pose);
          s.robots.push_back(rob);
        }
      }
    }

    if (j.contains("start")) {
      const Json& g = j["start"];
      StartGenerator sg;
      if (r.object(g, "start",
                   {"rotation", "translation", "axial_spread", "axial_jitter", "lateral_gap_min",
                    "lateral_gap_max", "heading_noise", "pilots", "max_attempts"})) {
        r.number(g, "start", "rotation", sg.rotation);
        r.number(g, "start", "translation", sg.translation);
        r.number(g, "start", "axial_spread", sg.axial_spread);
        r.number(g, "start", "axial_jitter", sg.axial_jitter);
        r.number(g, "start", "lateral_gap_min", sg.lateral_gap_min);
        r.number(g, "start", "lateral_gap_max", sg.lateral_gap_max);
        r.number(g, "start", "heading_noise", sg.heading_noise);
        r.integer(g, "start", "max_attempts", sg.max_attempts);
        if (g.contains("pilots")) {
          const Json& ps = g["pilots"];
          if (!ps.is_array() ||
              !std::all_of(ps.begin(), ps.end(), [](const Json& e) { return e.is_number_integer(); }))
            r.fail("start.pilots", "expected an array of robot ids");
          else
            sg.pilots = ps.get<std::vector<int>>();
        }
      }
      s.start = sg;
    }

    if (!j.contains("goal")) {
      r.fail("goal", "missing");
    } else {
      const Json& g = j["goal"];
      if (r.object(g, "goal", {"kind", "n", "rows", "cols", "poses"})) {
        std::string kind;
        r.string(g, "goal", "kind", kind);
        if (kind == "line") {
          s.goal.kind = GoalSpec::Kind::Line;
          if (!g.contains("n")) r.fail("goal.n", "missing");
          r.integer(g, "goal", "n", s.goal.n);
        } else if (kind == "mesh") {
          s.goal.kind = GoalSpec::Kind::Mesh;
          if (!g.contains("rows")) r.fail("goal.rows", "missing");
          if (!g.contains("cols")) r.fail("goal.cols", "missing");
          r.integer(g, "goal", "rows", s.goal.rows);
          r.integer(g, "goal", "cols", s.goal.cols);
        } else if (kind == "poses") {
          s.goal.kind = GoalSpec::Kind::Poses;
          if (!g.contains("poses")) r.fail("goal.poses", "missing");
          else s.goal.poses = r.poses(g["poses"], "goal.poses");
        } else {
          r.fail("goal.kind", "expected line, mesh or poses");
        }
      }
    }
  }
  out.errors = std::move(r.errors);
  if (run_validation && out.errors.empty()) out.errors = validate(s);
  return out;
}

inline ScenarioParse parse_scenario_text(const std::string& text, bool run_validation = true) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    ScenarioParse out;
    out.errors.push_back({"$", std::string("malformed JSON: ") + e.what()});
    return out;
  }
  return parse_scenario(j, run_validation);
}

inline ScenarioParse load_scenario(const std::string& path, bool run_validation = true) {
  std::ifstream in(path);
  if (!in) {
    ScenarioParse out;
    out.errors.push_back({"$", "cannot read " + path});
    return out;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), run_validation);
}

inline std::string format_errors(const std::vector<FieldError>& errs) {
  std::string out;
  for (const auto& e : errs) out += e.path + ": " + e.message + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Goal documents

inline Json goal_to_json(const GoalConfiguration& goal, const std::string& label,
                         const BodyGeometry& geom) {
  Json poses = Json::array();
  for (const auto& p : goal.poses) poses.push_back(io::pose_json(p));
  Json pairs = Json::array();
  if (goal.size() >= 2)
    for (const auto& gp : sort_pairs(find_exist_pairs(goal.poses, geom), goal.poses))
      pairs.push_back(io::pair_json(gp.pair));
  return Json{{"schema_version", ScenarioSpec::kSchemaVersion},
              {"label", label},
              {"body_length", geom.body_length},
              {"poses", poses},
              {"pairs", pairs}};
}

inline GoalConfiguration goal_from_json(const Json& j) {
  io::Reader r;
  GoalConfiguration g;
  if (!j.is_object() || !j.contains("poses")) throw std::invalid_argument("goal document needs poses");
  g.poses = r.poses(j["poses"], "poses");
  if (!r.errors.empty()) throw std::invalid_argument(format_errors(r.errors));
  return g;
}

// ---------------------------------------------------------------------------
// Traces and reports

inline Json diagnostics_json(const AssemblyDiagnostics& d) {
  Json active = Json::array();
  for (const auto& l : d.active) {
    const char* kind = l.kind == RowKind::PairX ? "pair_x" : l.kind == RowKind::PairY ? "pair_y" : "polygon";
    active.push_back(Json::array({kind, l.robot_i, l.robot_j}));
  }
  return Json{{"robots", d.robots},
              {"kkt", d.kkt_residual},
              {"iterations", d.iterations},
              {"polygon_dropped", d.polygon_rows_dropped},
              {"infeasible", d.infeasible},
              {"active", active}};
}

inline Json trace_record_to_json(const TraceRecord& rec) {
  Json poses = Json::array(), controls = Json::array(), conn = Json::array(), exec = Json::array(),
       latched = Json::array(), qp = Json::array();
  for (const auto& p : rec.poses) poses.push_back(io::pose_json(p));
  for (const auto& u : rec.controls) controls.push_back(io::control_json(u));
  for (const auto& c : rec.connected) conn.push_back(io::pair_json(c));
  for (const auto& c : rec.executing) exec.push_back(io::pair_json(c));
  for (const auto& c : rec.latched_now) latched.push_back(io::pair_json(c));
  for (const auto& d : rec.diagnostics) qp.push_back(diagnostics_json(d));
  std::vector<int> busy;
  for (bool b : rec.busy) busy.push_back(b ? 1 : 0);
  return Json{{"tick", rec.tick},
              {"t", rec.t},
              {"poses", poses},
              {"controls", controls},
              {"busy", busy},
              {"connected", conn},
              {"separation", rec.connected_separation},
              {"executing", exec},
              {"latched", latched},
              {"qp", qp}};
}

/// Serializes one tick as a single line (no trailing newline).
inline std::string trace_line(const TraceRecord& rec) { return trace_record_to_json(rec).dump(); }

inline Json report_to_json(const RunReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs)
    pairs.push_back(Json{{"pair", io::pair_json(p.goal.pair)},
                         {"goal_distance", p.goal.goal_distance},
                         {"activated_at", p.activated_at},
                         {"connected_at", p.connected_at},
                         {"max_error", p.max_error}});
  Json final_poses = Json::array();
  for (const auto& p : r.final_poses) final_poses.push_back(io::pose_json(p));
  Json kinds = Json::array();
  for (auto k : r.kinds) kinds.push_back(to_string(k));
  return Json{{"schema_version", ScenarioSpec::kSchemaVersion},
              {"scenario", r.scenario},
              {"success", r.success},
              {"diagnostic", r.diagnostic},
              {"completion_time", r.completion_time},
              {"ticks", r.ticks},
              {"num_robots", r.num_robots},
              {"kinds", kinds},
              {"goal_to_robot", r.goal_to_robot},
              {"pairs", pairs},
              {"max_pair_error", r.max_pair_error},
              {"max_kkt_residual", r.max_kkt_residual},
              {"qp_infeasible", r.qp_infeasible},
              {"polygon_escalations", r.polygon_escalations},
              {"procrustes_residual", r.procrustes_residual},
              {"assemblies", r.assemblies},
              {"final_poses", final_poses},
              {"trace", "trace.jsonl"}};
}

/// Converts trace lines to a table with one row per tick: time, per-robot pose
/// and control, pair counts, and the largest connected-pair separation.
inline void trace_to_csv(std::istream& in, std::ostream& out) {
  std::string line;
  bool header = false;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (!header) {
      n = j.at("poses").size();
      out << "tick,t";
      for (std::size_t k = 0; k < n; ++k)
        out << ",x" << k << ",y" << k << ",theta" << k << ",v" << k << ",omega" << k;
      out << ",connected,executing,max_separation,max_kkt\n";
      header = true;
    }
    if (j.at("poses").size() != n) throw std::runtime_error("trace_to_csv: robot count changed");
    std::ostringstream row;
    row.precision(17);
    row << j.at("tick").get<int>() << ',' << j.at("t").get<double>();
    for (std::size_t k = 0; k < n; ++k) {
      const Json& p = j["poses"][k];
      const Json& u = j["controls"][k];
      row << ',' << p[0].get<double>() << ',' << p[1].get<double>() << ',' << p[2].get<double>()
          << ',' << u[0].get<double>() << ',' << u[1].get<double>();
    }
    double sep = 0.0, kkt = 0.0;
    for (const auto& s : j.at("separation")) sep = std::max(sep, s.get<double>());
    for (const auto& d : j.at("qp")) kkt = std::max(kkt, d.at("kkt").get<double>());
    row << ',' << j.at("connected").size() << ',' << j.at("executing").size() << ',' << sep << ','
        << kkt << '\n';
    out << row.str();
  }
  if (!header) throw std::runtime_error("trace_to_csv: empty trace");
}

}  // namespace pairswarm

#endif  // PAIRSWARM_SCENARIO_IO_HPP_
