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

#include "cfnav/counterfactual.h"

#include <cmath>
#include <string>

#include "cfnav/error.h"

namespace cfnav {

std::string_view CandidateKindName(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::kDataset: return "dataset";
    case CandidateKind::kRotatedCcw: return "rotated_ccw";
    case CandidateKind::kRotatedCw: return "rotated_cw";
    case CandidateKind::kHumanTarget: return "human_target";
    case CandidateKind::kStop: return "stop";
  }
  return "unknown";
}

CandidateKind ParseCandidateKind(std::string_view name) {
  for (CandidateKind k :
       {CandidateKind::kDataset, CandidateKind::kRotatedCcw,
        CandidateKind::kRotatedCw, CandidateKind::kHumanTarget,
        CandidateKind::kStop}) {
    if (CandidateKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kParseError,
              "unknown candidate kind '" + std::string(name) + "'");
}

void ValidateCandidateSet(const CandidateSet& set, size_t n) {
  if (set.candidates.size() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                set.observation_id + ": fewer than 2 candidates");
  if (set.candidates.front().kind != CandidateKind::kDataset)
    throw Error(ErrorCode::kInvalidArgument,
                set.observation_id + ": candidate 0 is not the dataset path");
  size_t dataset_count = 0;
  for (const Candidate& c : set.candidates) {
    if (c.kind == CandidateKind::kDataset) ++dataset_count;
    if (c.trajectory.size() != n || c.trajectory.frame != FrameTag::kEgoStart ||
        !c.trajectory.IsFinite())
      throw Error(ErrorCode::kInvalidArgument,
                  set.observation_id + ": candidate trajectory is malformed");
  }
  if (dataset_count != 1)
    throw Error(ErrorCode::kInvalidArgument,
                set.observation_id + ": expected exactly one dataset candidate");
}

void GenConfig::Validate() const {
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "m must be >= 2");
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "n must be >= 2");
  if (!(rot_min > 0.0 && rot_min < rot_max && rot_max < M_PI))
    throw Error(ErrorCode::kInvalidArgument,
                "rotation range must satisfy 0 < rot_min < rot_max < pi");
}

Trajectory MakeStopTrajectory(size_t n) {
  if (n < 2)
    throw Error(ErrorCode::kInvalidArgument, "stop trajectory needs n >= 2");
  Trajectory t;
  t.frame = FrameTag::kEgoStart;
  t.waypoints.assign(n, Pose2{});
  return t;
}

CandidateSet GenerateCandidates(std::string observation_id,
                                const Trajectory& dataset_traj,
                                const AnnotatorInput& annotator_input,
                                const GenConfig& cfg, Rng& rng) {
  cfg.Validate();
  if (dataset_traj.size() != cfg.n || !dataset_traj.IsFinite() ||
      dataset_traj.frame != FrameTag::kEgoStart)
    throw Error(ErrorCode::kInvalidArgument,
                observation_id + ": dataset trajectory must be a finite "
                                 "ego_start path of length n");

  CandidateSet set;
  set.observation_id = std::move(observation_id);
  set.candidates.reserve(cfg.m);
  set.candidates.push_back({CandidateKind::kDataset, dataset_traj});

  bool counter_clockwise = true;
  auto push_rotation = [&] {
    const double magnitude = UniformReal(rng, cfg.rot_min, cfg.rot_max);
    const double angle = counter_clockwise ? magnitude : -magnitude;
    set.candidates.push_back(
        {counter_clockwise ? CandidateKind::kRotatedCcw
                           : CandidateKind::kRotatedCw,
         RotateTrajectory(dataset_traj, angle)});
    counter_clockwise = !counter_clockwise;
  };

  while (set.candidates.size() + 1 < cfg.m) push_rotation();

  if (const auto* click = std::get_if<TargetClick>(&annotator_input)) {
    set.candidates.push_back(
        {CandidateKind::kHumanTarget,
         ReparameterizeToTarget(dataset_traj, click->target, cfg.n)});
  } else if (std::holds_alternative<StopRequest>(annotator_input)) {
    set.candidates.push_back({CandidateKind::kStop, MakeStopTrajectory(cfg.n)});
  } else {
    push_rotation();
  }
  return set;
}

CandidateSet GenerateCandidates(std::string observation_id,
                                const Trajectory& dataset_traj,
                                const AnnotatorInput& annotator_input,
                                const GenConfig& cfg) {
  Rng rng(DeriveSeed(cfg.rng_seed, observation_id));
  return GenerateCandidates(std::move(observation_id), dataset_traj,
                            annotator_input, cfg, rng);
}

uint64_t PairCount(uint64_t m) {
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "pair count needs m >= 2");
  return m * (m - 1) / 2;
}

std::vector<std::pair<size_t, size_t>> AllPairs(size_t m) {
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  return pairs;
}

}  // namespace cfnav
