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

#ifndef CFNAV_ANNOTATION_H_
#define CFNAV_ANNOTATION_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfnav/counterfactual.h"
#include "cfnav/error.h"
#include "cfnav/preference.h"
#include "cfnav/serialization.h"
#include "cfnav/sim.h"

namespace cfnav {

enum class AnnotatorRole { kTargetProvider, kPreferenceLabeler };

std::string_view AnnotatorRoleName(AnnotatorRole role);
AnnotatorRole ParseAnnotatorRole(std::string_view name);

struct AnnotatorSession {
  std::string annotator_id;
  AnnotatorRole role = AnnotatorRole::kTargetProvider;
};

enum class TaskPhase { kTarget, kPreference };

// What the UI needs to draw one task. `scene` is a top-down geometry payload
// in the observation's ego frame (robot at the origin facing +x).
struct AnnotationTask {
  std::string task_id;
  std::string observation_id;
  TaskPhase phase = TaskPhase::kTarget;
  Json scene;
  // Preference phase only: presented candidate indices (i, j) in display
  // order, their waypoints and the neutral colors assigned to them.
  std::optional<std::pair<size_t, size_t>> pair;
  std::vector<Trajectory> pair_waypoints;
  std::vector<std::string> colors;
};

Json ToJson(const AnnotationTask& task);

enum class Choice { kI, kJ };

struct AnnotationConfig {
  double lease_seconds = 600.0;
  uint64_t seed = 0;  // presentation order and colors
  GenConfig gen;
  std::optional<std::filesystem::path> export_dir;
};

struct ExportBundle {
  std::string candidates;   // candidate-set lines
  std::string preferences;  // preference-record lines
  Json summary;
};

// Serves target and preference tasks over a shared PreferenceStore and
// enforces that nobody labels pairs of an observation they set the target
// for. All state transitions are serialized by one mutex; leasing is a
// compare-and-swap on the task state.
class AnnotationService {
 public:
  using Clock = std::function<double()>;

  AnnotationService(PreferenceStore& store,
                    std::vector<Observation> observations,
                    AnnotationConfig cfg, Clock clock = {});

  std::optional<AnnotationTask> NextTask(const AnnotatorSession& session);
  void SubmitTarget(const AnnotatorSession& session,
                    const std::string& observation_id,
                    std::optional<Vec2> click, bool stop);
  void SubmitPreference(const AnnotatorSession& session,
                        const std::string& task_id, Choice choice);
  ExportBundle Export() const;

  // Full-store scan of the disjoint-annotator rule.
  bool DisjointnessHolds() const;

 private:
  enum class State { kOpen, kLeased, kDone };

  struct Lease {
    State state = State::kOpen;
    std::string holder;
    double expires = 0.0;
  };

  struct PreferenceTask {
    std::string task_id;
    std::string observation_id;
    size_t first = 0;   // presented as "i"
    size_t second = 0;  // presented as "j"
    std::vector<std::string> colors;
    Lease lease;
  };

  struct ObservationEntry {
    Observation obs;
    Lease target_lease;
    std::optional<std::string> target_provider;
  };

  bool Available(Lease& lease, double now) const;
  Json SceneFor(const Observation& obs) const;
  AnnotationTask MakePreferenceTask(const PreferenceTask& t) const;

  PreferenceStore& store_;
  AnnotationConfig cfg_;
  Clock clock_;
  mutable std::mutex mu_;
  std::vector<std::string> order_;
  std::map<std::string, ObservationEntry> observations_;
  std::vector<PreferenceTask> pref_tasks_;
  std::map<std::string, size_t> pref_index_;
};

// Minimal HTTP-style dispatcher so the routing is testable without sockets.
//   GET  /task?role=...&annotator=...
//   POST /target      {obs, x, y, stop, annotator}
//   POST /preference  {task_id, choice: "i"|"j", annotator}
//   GET  /export
// Errors come back as {code, message} with the library error name.
struct HttpReply {
  int status = 200;
  Json body;
};

HttpReply HandleRequest(AnnotationService& service, const std::string& method,
                        const std::string& path,
                        const std::map<std::string, std::string>& query,
                        const std::string& body);

int HttpStatusFor(ErrorCode code);

}  // namespace cfnav

#endif  // CFNAV_ANNOTATION_H_
