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

#ifndef CFNAV_PIPELINE_H_
#define CFNAV_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <map>
#include <vector>

#include "cfnav/counterfactual.h"
#include "cfnav/executor.h"
#include "cfnav/metrics.h"
#include "cfnav/policy.h"
#include "cfnav/preference.h"
#include "cfnav/serialization.h"
#include "cfnav/sim.h"

// The end-to-end experiment: dataset generation, oracle annotation,
// aggregation, training, offline evaluation and closed-loop simulation. Each
// stage reads and writes files under RunConfig::out_dir only.
namespace cfnav {

struct RunConfig {
  std::vector<ScenarioId> scenarios = {std::begin(kAllScenarios),
                                       std::end(kAllScenarios)};
  uint64_t seed = 7;
  size_t observations = 2000;
  size_t episodes = 5;  // per (policy, scenario)
  double test_fraction = 0.2;
  // Uniform start-pose jitter half-widths for data and evaluation episodes.
  double jitter_xy = 0.3;
  double jitter_theta = 0.3;

  GenConfig gen;
  TrainConfig train;
  PolicyConfig policy;
  TeleopNoise noise{0.1, 0.3, 9, 1.0};
  TeleopConfig teleop;
  OracleConfig oracle;
  MetricsConfig metrics;
  EpisodeConfig episode;
  std::filesystem::path out_dir = "run";

  Json ToJson() const;
  static RunConfig FromJson(const Json& j);
  static RunConfig Load(const std::filesystem::path& path);
  // Consistency checks between the module configs (beam counts, horizon).
  void Validate() const;
};

namespace files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kObservations = "observations.jsonl";
inline constexpr const char* kCandidates = "candidates.jsonl";
inline constexpr const char* kPreferences = "preferences.jsonl";
inline constexpr const char* kAggregate = "aggregate.jsonl";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kSplit = "split.json";
}  // namespace files

std::filesystem::path CheckpointPath(const RunConfig& cfg, LossKind loss);

struct GenDataResult {
  std::vector<Observation> observations;
  std::vector<CandidateSet> candidates;
  size_t episodes = 0;
  size_t truncated_episodes = 0;
};

GenDataResult GenData(const RunConfig& cfg);

// Oracle labels for every pair of every observation.
std::vector<PreferenceRecord> AutoAnnotate(const RunConfig& cfg);

struct AggregateRow {
  std::string observation_id;
  size_t index = 0;
  CandidateKind kind = CandidateKind::kDataset;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  DatasetSummary summary;
  std::map<CandidateKind, double> kind_rewards;  // pooled Bradley-Terry fit
};

AggregateResult Aggregate(const RunConfig& cfg);

// Seeded 80/20 observation-level split; returns held-out ids (sorted).
std::vector<std::string> HeldOutIds(const RunConfig& cfg,
                                    std::vector<std::string> all_ids);

TrainResult TrainPolicy(const RunConfig& cfg, LossKind loss);

// Offline metrics of a checkpoint on the held-out split, against the
// aggregated preferred trajectories.
MetricsReport EvalOffline(const RunConfig& cfg,
                          const std::filesystem::path& checkpoint,
                          const std::string& label);

// Closed-loop episodes; logs land in out_dir/episodes/<label>/.
std::vector<EpisodeLog> Simulate(const RunConfig& cfg,
                                 const std::filesystem::path& checkpoint,
                                 const std::string& label,
                                 const std::vector<ScenarioId>& scenarios);

// Start-pose perturbation for evaluation episode k of a scenario.
Pose2 EpisodeJitter(const RunConfig& cfg, ScenarioId id, size_t k);

// Side-by-side markdown of offline and closed-loop metrics for the given
// labels, built only from files in out_dir.
std::string Report(const std::filesystem::path& run_dir,
                   const std::vector<std::string>& labels);

}  // namespace cfnav

#endif  // CFNAV_PIPELINE_H_
