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

#include "cfnav/annotation.h"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <string>

#include "cfnav/error.h"
#include "cfnav/random.h"

namespace cfnav {
namespace {

// Neutral palette: no red/green good-bad coding.
constexpr const char* kPalette[] = {"#1f77b4", "#9467bd", "#ff7f0e",
                                    "#17becf", "#e377c2", "#bcbd22"};

double SteadySeconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

Json Point(const Vec2& p) { return Json::array({p.x, p.y}); }

Json ErrorBody(const Error& e) {
  return {{"code", std::string(e.name())}, {"message", e.what()}};
}

}  // namespace

std::string_view AnnotatorRoleName(AnnotatorRole role) {
  return role == AnnotatorRole::kTargetProvider ? "target_provider"
                                                : "preference_labeler";
}

AnnotatorRole ParseAnnotatorRole(std::string_view name) {
  if (name == "target_provider" || name == "target")
    return AnnotatorRole::kTargetProvider;
  if (name == "preference_labeler" || name == "preference")
    return AnnotatorRole::kPreferenceLabeler;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown role '" + std::string(name) + "'");
}

Json ToJson(const AnnotationTask& task) {
  Json j;
  j["task_id"] = task.task_id;
  j["obs"] = task.observation_id;
  j["phase"] = task.phase == TaskPhase::kTarget ? "target" : "preference";
  j["scene"] = task.scene;
  if (task.pair) {
    j["pair"] = Json::array({task.pair->first, task.pair->second});
    Json wps = Json::array();
    for (const Trajectory& t : task.pair_waypoints)
      wps.push_back(WaypointsToJson(t));
    j["pair_waypoints"] = std::move(wps);
    j["colors"] = task.colors;
  } else {
    j["pair"] = nullptr;
  }
  return j;
}

AnnotationService::AnnotationService(PreferenceStore& store,
                                     std::vector<Observation> observations,
                                     AnnotationConfig cfg, Clock clock)
    : store_(store), cfg_(std::move(cfg)), clock_(std::move(clock)) {
  if (!clock_) clock_ = SteadySeconds;
  for (Observation& obs : observations) {
    std::string id = obs.frame.observation_id;
    if (observations_.contains(id))
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate observation id '" + id + "'");
    order_.push_back(id);
    ObservationEntry entry;
    entry.obs = std::move(obs);
    observations_.emplace(std::move(id), std::move(entry));
  }
}

bool AnnotationService::Available(Lease& lease, double now) const {
  if (lease.state == State::kLeased && now >= lease.expires) {
    lease.state = State::kOpen;  // requeue
    lease.holder.clear();
  }
  return lease.state == State::kOpen;
}

Json AnnotationService::SceneFor(const Observation& obs) const {
  const Scenario sc = BuildScenario(obs.scenario);
  const Transform2 to_ego = Transform2::FromPose(obs.pose).Inverse();
  Json segments = Json::array();
  for (const Segment& s : sc.world.static_segments)
    segments.push_back(
        Json::array({Point(to_ego.Apply(s.a)), Point(to_ego.Apply(s.b))}));
  Json circles = Json::array();
  for (const Circle& c : sc.world.static_circles) {
    const Vec2 p = to_ego.Apply(c.center);
    circles.push_back(Json::array({p.x, p.y, c.radius}));
  }
  Json agents = Json::array();
  for (const DynamicAgent& a : sc.world.agents) {
    const Vec2 p = to_ego.Apply(a.PositionAt(obs.frame.stamp));
    agents.push_back(Json::array({p.x, p.y, a.radius}));
  }
  const Rect& b = sc.world.bounds;
  Json bounds = Json::array();
  for (const Vec2& corner : {b.min, Vec2{b.max.x, b.min.y}, b.max,
                             Vec2{b.min.x, b.max.y}})
    bounds.push_back(Point(to_ego.Apply(corner)));
  return {{"segments", segments},
          {"circles", circles},
          {"agents", agents},
          {"bounds", bounds},
          {"robot", Json::array({0.0, 0.0, 0.0})},
          {"goal", Point(obs.frame.goal)},
          {"dataset", WaypointsToJson(obs.executed)}};
}

AnnotationTask AnnotationService::MakePreferenceTask(
    const PreferenceTask& t) const {
  const ObservationEntry& entry = observations_.at(t.observation_id);
  const std::optional<CandidateSet> cs = store_.GetCandidateSet(t.observation_id);
  AnnotationTask task;
  task.task_id = t.task_id;
  task.observation_id = t.observation_id;
  task.phase = TaskPhase::kPreference;
  task.scene = SceneFor(entry.obs);
  task.scene.erase("dataset");
  task.pair = std::make_pair(t.first, t.second);
  task.pair_waypoints = {(*cs)[t.first].trajectory, (*cs)[t.second].trajectory};
  task.colors = t.colors;
  return task;
}

std::optional<AnnotationTask> AnnotationService::NextTask(
    const AnnotatorSession& session) {
  std::lock_guard lock(mu_);
  const double now = clock_();
  if (session.role == AnnotatorRole::kTargetProvider) {
    for (const std::string& id : order_) {
      ObservationEntry& e = observations_.at(id);
      if (!Available(e.target_lease, now)) continue;
      e.target_lease = {State::kLeased, session.annotator_id,
                        now + cfg_.lease_seconds};
      AnnotationTask task;
      task.task_id = "target/" + id;
      task.observation_id = id;
      task.phase = TaskPhase::kTarget;
      task.scene = SceneFor(e.obs);
      return task;
    }
    return std::nullopt;
  }
  for (PreferenceTask& t : pref_tasks_) {
    const ObservationEntry& e = observations_.at(t.observation_id);
    if (e.target_provider == session.annotator_id) continue;
    if (!Available(t.lease, now)) continue;
    t.lease = {State::kLeased, session.annotator_id, now + cfg_.lease_seconds};
    return MakePreferenceTask(t);
  }
  return std::nullopt;
}

void AnnotationService::SubmitTarget(const AnnotatorSession& session,
                                     const std::string& observation_id,
                                     std::optional<Vec2> click, bool stop) {
  if (session.role != AnnotatorRole::kTargetProvider)
    throw Error(ErrorCode::kWrongRole, "session is not a target provider");
  if (click && stop)
    throw Error(ErrorCode::kInvalidArgument,
                "submit either a click or a stop request, not both");
  if (!click && !stop)
    throw Error(ErrorCode::kInvalidArgument, "missing click or stop request");

  std::lock_guard lock(mu_);
  auto it = observations_.find(observation_id);
  if (it == observations_.end())
    throw Error(ErrorCode::kMissingObservation,
                "unknown observation '" + observation_id + "'");
  ObservationEntry& e = it->second;
  const double now = clock_();
  if (e.target_lease.state != State::kLeased ||
      e.target_lease.holder != session.annotator_id ||
      now >= e.target_lease.expires)
    throw Error(ErrorCode::kStaleTask,
                "target task for '" + observation_id + "' is not leased to '" +
                    session.annotator_id + "'");

  AnnotatorInput input = StopRequest{};
  if (click) {
    const Vec2 world_click =
        Transform2::FromPose(e.obs.pose).Apply(*click);
    if (!BuildScenario(e.obs.scenario).world.bounds.Contains(world_click))
      throw Error(ErrorCode::kOutOfBounds, "click lies outside the scene");
    input = TargetClick{*click};
  }
  GenConfig gen = cfg_.gen;
  gen.n = e.obs.executed.size();
  CandidateSet cs =
      GenerateCandidates(observation_id, e.obs.executed, input, gen);
  const size_t m = cs.size();
  store_.PutCandidateSet(std::move(cs));
  e.target_lease.state = State::kDone;
  e.target_provider = session.annotator_id;

  for (const auto& [i, j] : AllPairs(m)) {
    PreferenceTask t;
    t.observation_id = observation_id;
    t.task_id = "pref/" + observation_id + "/" + std::to_string(i) + "-" +
                std::to_string(j);
    Rng rng(DeriveSeed(cfg_.seed, t.task_id));
    const bool swap = UniformIndex(rng, 2) == 1;
    t.first = swap ? j : i;
    t.second = swap ? i : j;
    std::vector<std::string> palette(std::begin(kPalette), std::end(kPalette));
    Shuffle(palette, rng);
    t.colors = {palette[0], palette[1]};
    pref_index_[t.task_id] = pref_tasks_.size();
    pref_tasks_.push_back(std::move(t));
  }
}

void AnnotationService::SubmitPreference(const AnnotatorSession& session,
                                         const std::string& task_id,
                                         Choice choice) {
  if (session.role != AnnotatorRole::kPreferenceLabeler)
    throw Error(ErrorCode::kWrongRole, "session is not a preference labeler");
  std::lock_guard lock(mu_);
  auto it = pref_index_.find(task_id);
  if (it == pref_index_.end())
    throw Error(ErrorCode::kUnknownTask, "unknown task '" + task_id + "'");
  PreferenceTask& t = pref_tasks_[it->second];
  if (t.lease.state == State::kDone)
    throw Error(ErrorCode::kDuplicateRecord,
                "task '" + task_id + "' was already answered");
  const double now = clock_();
  if (t.lease.state != State::kLeased ||
      t.lease.holder != session.annotator_id || now >= t.lease.expires) {
    if (t.lease.state == State::kLeased && now >= t.lease.expires) {
      t.lease.state = State::kOpen;
      t.lease.holder.clear();
    }
    throw Error(ErrorCode::kStaleTask,
                "task '" + task_id + "' is not leased to '" +
                    session.annotator_id + "'");
  }
  PreferenceRecord rec;
  rec.observation_id = t.observation_id;
  rec.i = t.first;
  rec.j = t.second;
  rec.y = choice == Choice::kI ? 1 : 0;
  rec.annotator_id = session.annotator_id;
  rec.source = PreferenceSource::kHuman;
  store_.Record(rec);
  t.lease.state = State::kDone;
}

ExportBundle AnnotationService::Export() const {
  const PreferenceDataset data = store_.Snapshot();
  ExportBundle bundle;
  std::ostringstream cands;
  for (const auto& [id, cs] : data.candidate_sets)
    cands << ToJson(cs).dump() << '\n';
  std::vector<PreferenceRecord> recs = data.records;
  std::sort(recs.begin(), recs.end(),
            [](const PreferenceRecord& a, const PreferenceRecord& b) {
              return std::tie(a.observation_id, a.i, a.j, a.annotator_id) <
                     std::tie(b.observation_id, b.i, b.j, b.annotator_id);
            });
  std::ostringstream prefs;
  for (const PreferenceRecord& r : recs) prefs << ToJson(r).dump() << '\n';
  bundle.candidates = cands.str();
  bundle.preferences = prefs.str();
  const DatasetSummary s = SummarizeDataset(data, cfg_.seed);
  bundle.summary = {{"observations", s.observations},
                    {"m", s.m},
                    {"total_candidates", s.total_candidates},
                    {"fraction_dataset_not_preferred",
                     s.fraction_dataset_not_preferred},
                    {"total_comparisons", s.total_comparisons}};
  if (cfg_.export_dir) {
    WriteText(*cfg_.export_dir / "candidates.jsonl", bundle.candidates);
    WriteText(*cfg_.export_dir / "preferences.jsonl", bundle.preferences);
    WriteJson(*cfg_.export_dir / "summary.json", bundle.summary);
  }
  return bundle;
}

bool AnnotationService::DisjointnessHolds() const {
  const PreferenceDataset data = store_.Snapshot();
  std::lock_guard lock(mu_);
  for (const PreferenceRecord& r : data.records) {
    auto it = observations_.find(r.observation_id);
    if (it != observations_.end() &&
        it->second.target_provider == r.annotator_id)
      return false;
  }
  return true;
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingObservation:
    case ErrorCode::kUnknownTask:
      return 404;
    case ErrorCode::kDuplicateRecord:
    case ErrorCode::kStaleTask:
      return 409;
    case ErrorCode::kWrongRole:
      return 403;
    case ErrorCode::kIoError:
      return 500;
    default:
      return 400;
  }
}

HttpReply HandleRequest(AnnotationService& service, const std::string& method,
                        const std::string& path,
                        const std::map<std::string, std::string>& query,
                        const std::string& body) {
  auto param = [&](const char* key) -> std::string {
    auto it = query.find(key);
    if (it == query.end())
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("missing query parameter '") + key + "'");
    return it->second;
  };
  try {
    if (method == "GET" && path == "/task") {
      AnnotatorSession session{param("annotator"),
                               ParseAnnotatorRole(param("role"))};
      auto task = service.NextTask(session);
      if (!task) return {200, {{"task", nullptr}}};
      return {200, ToJson(*task)};
    }
    if (method == "GET" && path == "/export") {
      const ExportBundle b = service.Export();
      return {200,
              {{"candidates", b.candidates},
               {"preferences", b.preferences},
               {"summary", b.summary}}};
    }
    if (method == "POST" && (path == "/target" || path == "/preference")) {
      Json req;
      try {
        req = Json::parse(body);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kParseError, e.what());
      }
      try {
        if (path == "/target") {
          AnnotatorSession session{req.at("annotator").get<std::string>(),
                                   AnnotatorRole::kTargetProvider};
          const bool stop = req.value("stop", false);
          std::optional<Vec2> click;
          if (req.contains("x") && !req["x"].is_null() && req.contains("y") &&
              !req["y"].is_null())
            click = Vec2{req["x"].get<double>(), req["y"].get<double>()};
          service.SubmitTarget(session, req.at("obs").get<std::string>(),
                               click, stop);
        } else {
          AnnotatorSession session{req.at("annotator").get<std::string>(),
                                   AnnotatorRole::kPreferenceLabeler};
          const std::string choice = req.at("choice").get<std::string>();
          if (choice != "i" && choice != "j")
            throw Error(ErrorCode::kInvalidArgument,
                        "choice must be \"i\" or \"j\"");
          service.SubmitPreference(session, req.at("task_id").get<std::string>(),
                                   choice == "i" ? Choice::kI : Choice::kJ);
        }
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, e.what());
      }
      return {200, {{"ok", true}}};
    }
    return {404, {{"code", "not-found"}, {"message", method + " " + path}}};
  } catch (const Error& e) {
    return {HttpStatusFor(e.code()), ErrorBody(e)};
  }
}

}  // namespace cfnav
