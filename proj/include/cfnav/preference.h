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

#ifndef CFNAV_PREFERENCE_H_
#define CFNAV_PREFERENCE_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cfnav/counterfactual.h"
#include "cfnav/random.h"

namespace cfnav {

enum class PreferenceSource { kHuman, kOracle };

std::string_view PreferenceSourceName(PreferenceSource source);
PreferenceSource ParsePreferenceSource(std::string_view name);

// One pairwise label: y = 1 means candidate i was preferred over j.
struct PreferenceRecord {
  std::string observation_id;
  size_t i = 0;
  size_t j = 0;
  int y = 0;
  std::string annotator_id;
  PreferenceSource source = PreferenceSource::kOracle;

  bool operator==(const PreferenceRecord&) const = default;
};

// Immutable view used by aggregation, fitting and export.
struct PreferenceDataset {
  std::vector<PreferenceRecord> records;
  std::map<std::string, CandidateSet> candidate_sets;

  std::vector<PreferenceRecord> RecordsFor(const std::string& obs) const;
  // Observation ids in which every unordered pair has at least one record.
  std::vector<std::string> FullyAnnotated() const;
};

// Append-only preference store. Candidate sets are registered first; records
// are validated against them and appended (to the log file too when one is
// configured). Safe for concurrent producers.
class PreferenceStore {
 public:
  PreferenceStore() = default;
  explicit PreferenceStore(std::filesystem::path log_path);

  // Registers or replaces the candidate set for its observation. Replacing
  // is allowed only while no records reference the observation.
  void PutCandidateSet(CandidateSet set);
  void Record(const PreferenceRecord& rec);

  size_t size() const;
  bool HasObservation(const std::string& obs) const;
  std::optional<CandidateSet> GetCandidateSet(const std::string& obs) const;
  PreferenceDataset Snapshot() const;

 private:
  mutable std::mutex mu_;
  PreferenceDataset data_;
  std::set<std::tuple<std::string, size_t, size_t, std::string>> seen_;
  std::optional<std::ofstream> log_;
};

// Index of the candidate with the most pairwise wins. Ties go to an
// annotator-suggested candidate, then the dataset candidate, else a seeded
// uniform pick among the tied.
size_t AggregateBest(const CandidateSet& cs,
                     std::span<const PreferenceRecord> recs, Rng& rng);
// Same, with the rng stream derived from (seed, observation id).
size_t AggregateBest(const CandidateSet& cs,
                     std::span<const PreferenceRecord> recs, uint64_t seed);

// Win count per candidate index, one vote per record.
std::vector<int> WinCounts(size_t n_items,
                           std::span<const PreferenceRecord> recs);

// Logistic preference probability sigma(r_i - r_j).
double PrefProbability(double r_i, double r_j);

struct RewardFit {
  std::vector<double> rewards;  // mean-centered
  double log_likelihood = 0.0;  // regularized mean per-comparison value
  size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per accepted step
};

struct BradleyTerryOptions {
  double l2 = 1e-3;
  size_t max_iter = 10000;
  double tol = 1e-8;
  double initial_step = 1.0;
};

// Maximum-likelihood Bradley-Terry rewards by gradient ascent with step
// halving. Items are the record indices i, j. Throws kUnderIdentified if an
// item never appears in a comparison.
RewardFit FitBradleyTerry(std::span<const PreferenceRecord> recs,
                          size_t n_items,
                          const BradleyTerryOptions& options = {});

// Pools records across observations by candidate kind and fits one reward
// per kind that appears in the data.
std::map<CandidateKind, double> FitRewardsByKind(
    const PreferenceDataset& dataset, const BradleyTerryOptions& options = {});

// Dataset statistics table: annotated observations, candidates per
// observation, total candidates, share of observations whose aggregated
// winner is not the dataset trajectory, and total comparisons.
struct DatasetSummary {
  size_t observations = 0;
  size_t m = 0;
  size_t total_candidates = 0;
  double fraction_dataset_not_preferred = 0.0;
  size_t total_comparisons = 0;
};

DatasetSummary SummarizeDataset(const PreferenceDataset& dataset,
                                uint64_t aggregate_seed);

}  // namespace cfnav

#endif  // CFNAV_PREFERENCE_H_
