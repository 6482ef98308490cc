// Copyright 2026 The cfnav Authors
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

#include "cfnav/serialization.h"

#include <fstream>
#include <sstream>
#include <string>

#include "cfnav/error.h"

namespace cfnav {
namespace {

constexpr int kCheckpointVersion = 1;

Json PoseToJson(const Pose2& p) { return Json::array({p.x, p.y, p.theta}); }

Pose2 PoseFromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::kParseError, "pose must be [x, y, theta]");
  return Pose2(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void MatrixFromJson(const Json& j, Eigen::MatrixXd& m) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows())
    throw Error(ErrorCode::kParseError, "checkpoint matrix has wrong shape");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != m.cols())
      throw Error(ErrorCode::kParseError, "checkpoint matrix has wrong shape");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
}

Json VectorToJson(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

void VectorFromJson(const Json& j, Eigen::VectorXd& v) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size())
    throw Error(ErrorCode::kParseError, "checkpoint vector has wrong size");
  for (Eigen::Index k = 0; k < v.size(); ++k)
    v[k] = j[static_cast<size_t>(k)].get<double>();
}

template <typename F>
auto Parsing(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json WaypointsToJson(const Trajectory& traj) {
  Json wps = Json::array();
  for (const Pose2& p : traj.waypoints) wps.push_back(PoseToJson(p));
  return wps;
}

Trajectory WaypointsFromJson(const Json& j, FrameTag frame) {
  if (!j.is_array())
    throw Error(ErrorCode::kParseError, "waypoints must be an array");
  Trajectory t;
  t.frame = frame;
  for (const Json& p : j) t.waypoints.push_back(PoseFromJson(p));
  return t;
}

Json ToJson(const PreferenceRecord& rec) {
  Json j;
  j["obs"] = rec.observation_id;
  j["i"] = rec.i;
  j["j"] = rec.j;
  j["y"] = rec.y;
  j["annotator"] = rec.annotator_id;
  j["source"] = std::string(PreferenceSourceName(rec.source));
  return j;
}

PreferenceRecord PreferenceFromJson(const Json& j) {
  return Parsing("preference record", [&] {
    PreferenceRecord r;
    r.observation_id = j.at("obs").get<std::string>();
    r.i = j.at("i").get<size_t>();
    r.j = j.at("j").get<size_t>();
    r.y = j.at("y").get<int>();
    r.annotator_id = j.at("annotator").get<std::string>();
    r.source = ParsePreferenceSource(j.at("source").get<std::string>());
    return r;
  });
}

Json ToJson(const CandidateSet& cs) {
  Json j;
  j["obs"] = cs.observation_id;
  j["n"] = cs.candidates.empty() ? 0 : cs.candidates.front().trajectory.size();
  Json cands = Json::array();
  for (const Candidate& c : cs.candidates) {
    Json cj;
    cj["kind"] = std::string(CandidateKindName(c.kind));
    cj["wps"] = WaypointsToJson(c.trajectory);
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  return j;
}

CandidateSet CandidateSetFromJson(const Json& j) {
  return Parsing("candidate set", [&] {
    CandidateSet cs;
    cs.observation_id = j.at("obs").get<std::string>();
    const size_t n = j.at("n").get<size_t>();
    for (const Json& cj : j.at("candidates")) {
      Candidate c;
      c.kind = ParseCandidateKind(cj.at("kind").get<std::string>());
      c.trajectory = WaypointsFromJson(cj.at("wps"));
      if (c.trajectory.size() != n)
        throw Error(ErrorCode::kParseError,
                    cs.observation_id + ": candidate length differs from n");
      cs.candidates.push_back(std::move(c));
    }
    return cs;
  });
}

Json ToJson(const LaserScan& scan) {
  Json j;
  j["amin"] = scan.angle_min;
  j["ainc"] = scan.angle_increment;
  j["ranges"] = scan.ranges;
  j["rmax"] = scan.max_range;
  return j;
}

LaserScan ScanFromJson(const Json& j) {
  return Parsing("scan", [&] {
    LaserScan s;
    s.angle_min = j.at("amin").get<double>();
    s.angle_increment = j.at("ainc").get<double>();
    s.ranges = j.at("ranges").get<std::vector<double>>();
    s.max_range = j.at("rmax").get<double>();
    return s;
  });
}

Json ToJson(const Observation& obs) {
  Json j;
  j["obs"] = obs.frame.observation_id;
  j["scan"] = ToJson(obs.frame.scan);
  j["goal"] = Json::array({obs.frame.goal.x, obs.frame.goal.y});
  j["exec"] = WaypointsToJson(obs.executed);
  j["scenario"] = std::string(ScenarioName(obs.scenario));
  j["t"] = obs.frame.stamp;
  j["pose"] = PoseToJson(obs.pose);
  return j;
}

Observation ObservationFromJson(const Json& j) {
  return Parsing("observation", [&] {
    Observation o;
    o.frame.observation_id = j.at("obs").get<std::string>();
    o.frame.scan = ScanFromJson(j.at("scan"));
    const Json& g = j.at("goal");
    o.frame.goal = {g.at(0).get<double>(), g.at(1).get<double>()};
    o.frame.stamp = j.at("t").get<double>();
    o.executed = WaypointsFromJson(j.at("exec"));
    o.scenario = ParseScenario(j.at("scenario").get<std::string>());
    o.pose = PoseFromJson(j.at("pose"));
    return o;
  });
}

Json ToJson(const PolicyParams& p) {
  Json j;
  j["format"] = "cfnav-policy";
  j["version"] = kCheckpointVersion;
  j["seed"] = p.seed;
  const PolicyConfig& c = p.config;
  j["arch"] = {{"n_beams", c.n_beams},
               {"horizon", c.horizon},
               {"hidden", c.hidden},
               {"output_scale", c.output_scale},
               {"goal_scale", c.goal_scale},
               {"max_range", c.max_range}};
  j["w1"] = MatrixToJson(p.w1);
  j["b1"] = VectorToJson(p.b1);
  j["w2"] = MatrixToJson(p.w2);
  j["b2"] = VectorToJson(p.b2);
  j["w3"] = MatrixToJson(p.w3);
  j["b3"] = VectorToJson(p.b3);
  return j;
}

PolicyParams PolicyFromJson(const Json& j) {
  return Parsing("checkpoint", [&] {
    if (j.at("format").get<std::string>() != "cfnav-policy" ||
        j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::kParseError, "unsupported checkpoint format");
    PolicyConfig c;
    const Json& a = j.at("arch");
    c.n_beams = a.at("n_beams").get<size_t>();
    c.horizon = a.at("horizon").get<size_t>();
    c.hidden = a.at("hidden").get<size_t>();
    c.output_scale = a.at("output_scale").get<double>();
    c.goal_scale = a.at("goal_scale").get<double>();
    c.max_range = a.at("max_range").get<double>();
    PolicyParams p = PolicyParams::Zeros(c);
    p.seed = j.at("seed").get<uint64_t>();
    MatrixFromJson(j.at("w1"), p.w1);
    VectorFromJson(j.at("b1"), p.b1);
    MatrixFromJson(j.at("w2"), p.w2);
    VectorFromJson(j.at("b2"), p.b2);
    MatrixFromJson(j.at("w3"), p.w3);
    VectorFromJson(j.at("b3"), p.b3);
    return p;
  });
}

Json ToJson(const EpisodeConfig& c) {
  return {{"control_dt", c.control_dt},
          {"runner_period", c.runner_period},
          {"runner_latency", c.runner_latency},
          {"prune_radius", c.prune_radius},
          {"goal_tolerance", c.goal_tolerance},
          {"waypoint_tolerance", c.waypoint_tolerance},
          {"time_budget", c.time_budget},
          {"robot_radius", c.robot_radius},
          {"lidar",
           {{"n_beams", c.lidar.n_beams},
            {"fov", c.lidar.fov},
            {"max_range", c.lidar.max_range}}},
          {"limits",
           {{"v_max", c.limits.v_max}, {"omega_max", c.limits.omega_max}}},
          {"gains", {{"k_v", c.gains.k_v}, {"k_omega", c.gains.k_omega}}},
          {"start_jitter", PoseToJson(c.start_jitter)},
          {"seed", c.seed}};
}

std::vector<Json> EpisodeLogToJson(const EpisodeLog& log) {
  std::vector<Json> lines;
  Json header;
  header["scenario"] = log.scenario;
  header["policy"] = log.policy;
  header["seed"] = log.seed;
  header["config"] = ToJson(log.config);
  header["start"] = PoseToJson(log.start);
  header["goal"] = Json::array({log.goal.x, log.goal.y});
  header["success"] = log.success;
  header["collisions"] = log.collisions;
  header["collided_terminated"] = log.collided_terminated;
  header["executed_arclen"] = log.executed_arclen;
  header["goal_progress"] = log.goal_progress;
  header["planned_arclen"] = log.planned_arclen;
  header["min_clearance"] = log.min_clearance;
  header["path_completion"] = log.path_completion;
  header["duration"] = log.duration;
  header["paths"] = log.paths.size();
  lines.push_back(std::move(header));
  for (const TickRow& r : log.rows) {
    Json row;
    row["t"] = r.t;
    row["pose"] = PoseToJson(r.pose);
    row["cmd"] = Json::array({r.cmd.v, r.cmd.omega});
    row["target"] = r.target ? PoseToJson(*r.target) : Json(nullptr);
    row["seq"] = r.source_seq;
    row["collision"] = r.collision;
    lines.push_back(std::move(row));
  }
  return lines;
}

EpisodeLog EpisodeLogFromJson(const std::vector<Json>& lines) {
  return Parsing("episode log", [&] {
    if (lines.empty())
      throw Error(ErrorCode::kParseError, "episode log is empty");
    EpisodeLog log;
    const Json& h = lines.front();
    log.scenario = h.at("scenario").get<std::string>();
    log.policy = h.at("policy").get<std::string>();
    log.seed = h.at("seed").get<uint64_t>();
    log.start = PoseFromJson(h.at("start"));
    log.goal = {h.at("goal").at(0).get<double>(),
                h.at("goal").at(1).get<double>()};
    log.success = h.at("success").get<bool>();
    log.collisions = h.at("collisions").get<int>();
    log.collided_terminated = h.at("collided_terminated").get<bool>();
    log.executed_arclen = h.at("executed_arclen").get<double>();
    log.goal_progress = h.at("goal_progress").get<double>();
    log.planned_arclen = h.at("planned_arclen").get<double>();
    log.min_clearance = h.at("min_clearance").get<double>();
    log.path_completion = h.at("path_completion").get<double>();
    log.duration = h.at("duration").get<double>();
    const Json& c = h.at("config");
    log.config.control_dt = c.at("control_dt").get<double>();
    log.config.runner_period = c.at("runner_period").get<double>();
    log.config.runner_latency = c.at("runner_latency").get<double>();
    log.config.prune_radius = c.at("prune_radius").get<double>();
    log.config.goal_tolerance = c.at("goal_tolerance").get<double>();
    log.config.time_budget = c.at("time_budget").get<double>();
    log.config.robot_radius = c.at("robot_radius").get<double>();
    log.config.seed = c.at("seed").get<uint64_t>();
    for (size_t k = 1; k < lines.size(); ++k) {
      const Json& r = lines[k];
      TickRow row;
      row.t = r.at("t").get<double>();
      row.pose = PoseFromJson(r.at("pose"));
      row.cmd = {r.at("cmd").at(0).get<double>(),
                 r.at("cmd").at(1).get<double>()};
      if (!r.at("target").is_null()) row.target = PoseFromJson(r.at("target"));
      row.source_seq = r.at("seq").get<uint64_t>();
      row.collision = r.at("collision").get<bool>();
      log.rows.push_back(row);
    }
    return log;
  });
}

Json SummaryToJson(const MetricsReport& r) {
  return {{"samples", r.sample_count},
          {"near_collision_count", r.near_collision_count},
          {"mean_deviation", r.mean_deviation},
          {"mean_min_clearance", r.mean_min_clearance},
          {"episodes", r.episode_count},
          {"success_rate", r.success_rate},
          {"mean_episode_clearance", r.mean_episode_clearance},
          {"mean_collisions", r.mean_collisions},
          {"mean_path_completion", r.mean_path_completion}};
}

void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<Json>& lines) {
  std::ostringstream out;
  for (const Json& j : lines) out << j.dump() << '\n';
  WriteText(path, out.str());
}

std::vector<Json> ReadJsonLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" +
                                              std::to_string(lineno) + ": " +
                                              e.what());
    }
  }
  return out;
}

void WriteJson(const std::filesystem::path& path, const Json& value) {
  WriteText(path, value.dump(2) + "\n");
}

Json ReadJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

namespace {

template <typename T, typename F>
std::vector<T> ReadLinesAs(const std::filesystem::path& path, F&& convert) {
  const std::vector<Json> lines = ReadJsonLines(path);
  std::vector<T> out;
  out.reserve(lines.size());
  for (size_t k = 0; k < lines.size(); ++k) {
    try {
      out.push_back(convert(lines[k]));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(k + 1) +
                                ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Observation> ReadObservations(const std::filesystem::path& path) {
  return ReadLinesAs<Observation>(path, ObservationFromJson);
}

std::vector<CandidateSet> ReadCandidateSets(const std::filesystem::path& path) {
  return ReadLinesAs<CandidateSet>(path, CandidateSetFromJson);
}

std::vector<PreferenceRecord> ReadPreferences(
    const std::filesystem::path& path) {
  return ReadLinesAs<PreferenceRecord>(path, PreferenceFromJson);
}

}  // namespace cfnav
