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

#ifndef CFNAV_SERIALIZATION_H_
#define CFNAV_SERIALIZATION_H_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfnav/counterfactual.h"
#include "cfnav/executor.h"
#include "cfnav/metrics.h"
#include "cfnav/policy.h"
#include "cfnav/preference.h"
#include "cfnav/sim.h"

// Line-delimited JSON formats shared by the CLI, the annotation service and
// the tests.
//
//   preferences:  {"obs", "i", "j", "y", "annotator", "source"}
//   candidates:   {"obs", "n", "candidates": [{"kind", "wps": [[x,y,th],..]}]}
//   observations: {"obs", "scan": {"amin","ainc","ranges","rmax"}, "goal",
//                  "exec", "scenario", "t", "pose"}
namespace cfnav {

using Json = nlohmann::json;

Json WaypointsToJson(const Trajectory& traj);
Trajectory WaypointsFromJson(const Json& j, FrameTag frame = FrameTag::kEgoStart);

Json ToJson(const PreferenceRecord& rec);
PreferenceRecord PreferenceFromJson(const Json& j);

Json ToJson(const CandidateSet& cs);
CandidateSet CandidateSetFromJson(const Json& j);

Json ToJson(const LaserScan& scan);
LaserScan ScanFromJson(const Json& j);

Json ToJson(const Observation& obs);
Observation ObservationFromJson(const Json& j);

Json ToJson(const PolicyParams& params);
PolicyParams PolicyFromJson(const Json& j);

Json ToJson(const EpisodeConfig& cfg);
// Header object followed by one object per tick.
std::vector<Json> EpisodeLogToJson(const EpisodeLog& log);
EpisodeLog EpisodeLogFromJson(const std::vector<Json>& lines);

Json SummaryToJson(const MetricsReport& report);

// One JSON object per line, no trailing whitespace beyond '\n'.
void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<Json>& lines);
// Parse errors carry file:line context.
std::vector<Json> ReadJsonLines(const std::filesystem::path& path);

void WriteJson(const std::filesystem::path& path, const Json& value);
Json ReadJson(const std::filesystem::path& path);
void WriteText(const std::filesystem::path& path, const std::string& text);

std::vector<Observation> ReadObservations(const std::filesystem::path& path);
std::vector<CandidateSet> ReadCandidateSets(const std::filesystem::path& path);
std::vector<PreferenceRecord> ReadPreferences(
    const std::filesystem::path& path);

}  // namespace cfnav

#endif  // CFNAV_SERIALIZATION_H_
