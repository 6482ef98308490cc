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

#ifndef CFNAV_COUNTERFACTUAL_H_
#define CFNAV_COUNTERFACTUAL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cfnav/geometry.h"
#include "cfnav/random.h"

namespace cfnav {

enum class CandidateKind { kDataset, kRotatedCcw, kRotatedCw, kHumanTarget, kStop };

std::string_view CandidateKindName(CandidateKind kind);
CandidateKind ParseCandidateKind(std::string_view name);

// Candidates that came out of the annotator's own target/stop step.
inline bool IsAnnotatorSuggested(CandidateKind kind) {
  return kind == CandidateKind::kHumanTarget || kind == CandidateKind::kStop;
}

struct Candidate {
  CandidateKind kind = CandidateKind::kDataset;
  Trajectory trajectory;
  bool operator==(const Candidate&) const = default;
};

// The counterfactual set for one observation. Index 0 is always the dataset
// trajectory, so indices are stable identifiers everywhere downstream.
struct CandidateSet {
  std::string observation_id;
  std::vector<Candidate> candidates;

  size_t size() const { return candidates.size(); }
  const Candidate& operator[](size_t i) const { return candidates[i]; }
  bool operator==(const CandidateSet&) const = default;
};

// Throws kInvalidArgument when a CandidateSet breaks its layout invariants.
void ValidateCandidateSet(const CandidateSet& set, size_t n);

struct GenConfig {
  size_t m = 4;
  size_t n = 8;
  double rot_min = 0.2618;  // 15 deg
  double rot_max = 0.7854;  // 45 deg
  uint64_t rng_seed = 0;

  void Validate() const;
};

struct TargetClick {
  Vec2 target;
};
struct StopRequest {};
using AnnotatorInput = std::variant<std::monostate, TargetClick, StopRequest>;

Trajectory MakeStopTrajectory(size_t n);

// Fills cfg.m slots: [dataset, ccw, cw, ccw, ...] and the final slot from the
// annotator input when present (human_target or stop), otherwise with the
// next rotation in the alternation.
CandidateSet GenerateCandidates(std::string observation_id,
                                const Trajectory& dataset_traj,
                                const AnnotatorInput& annotator_input,
                                const GenConfig& cfg, Rng& rng);

// Same, with the per-observation stream seed = hash(cfg.rng_seed, id).
CandidateSet GenerateCandidates(std::string observation_id,
                                const Trajectory& dataset_traj,
                                const AnnotatorInput& annotator_input,
                                const GenConfig& cfg);

// Number of unordered pairs among m candidates.
uint64_t PairCount(uint64_t m);

// All unordered (i, j), i < j, in lexicographic order.
std::vector<std::pair<size_t, size_t>> AllPairs(size_t m);

}  // namespace cfnav

#endif  // CFNAV_COUNTERFACTUAL_H_
