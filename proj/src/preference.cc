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

#include "cfnav/preference.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfnav/error.h"
#include "cfnav/serialization.h"

namespace cfnav {
namespace {

std::tuple<std::string, size_t, size_t, std::string> DedupKey(
    const PreferenceRecord& rec) {
  return {rec.observation_id, std::min(rec.i, rec.j), std::max(rec.i, rec.j),
          rec.annotator_id};
}

// log(sigma(x)) without overflow.
double LogSigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

std::string_view PreferenceSourceName(PreferenceSource source) {
  return source == PreferenceSource::kHuman ? "human" : "oracle";
}

PreferenceSource ParsePreferenceSource(std::string_view name) {
  if (name == "human") return PreferenceSource::kHuman;
  if (name == "oracle") return PreferenceSource::kOracle;
  throw Error(ErrorCode::kParseError,
              "unknown preference source '" + std::string(name) + "'");
}

std::vector<PreferenceRecord> PreferenceDataset::RecordsFor(
    const std::string& obs) const {
  std::vector<PreferenceRecord> out;
  for (const PreferenceRecord& r : records)
    if (r.observation_id == obs) out.push_back(r);
  return out;
}

std::vector<std::string> PreferenceDataset::FullyAnnotated() const {
  std::map<std::string, std::set<std::pair<size_t, size_t>>> covered;
  for (const PreferenceRecord& r : records)
    covered[r.observation_id].emplace(std::min(r.i, r.j), std::max(r.i, r.j));
  std::vector<std::string> out;
  for (const auto& [obs, cs] : candidate_sets) {
    auto it = covered.find(obs);
    if (it != covered.end() && it->second.size() == PairCount(cs.size()))
      out.push_back(obs);
  }
  return out;
}

PreferenceStore::PreferenceStore(std::filesystem::path log_path) {
  log_.emplace(log_path, std::ios::app);
  if (!*log_)
    throw Error(ErrorCode::kIoError,
                "cannot open preference log " + log_path.string());
}

void PreferenceStore::PutCandidateSet(CandidateSet set) {
  std::lock_guard lock(mu_);
  const std::string id = set.observation_id;
  auto it = data_.candidate_sets.find(id);
  if (it != data_.candidate_sets.end()) {
    for (const PreferenceRecord& r : data_.records)
      if (r.observation_id == id)
        throw Error(ErrorCode::kInvalidArgument,
                    id + ": candidate set already has preference records");
    it->second = std::move(set);
  } else {
    data_.candidate_sets.emplace(id, std::move(set));
  }
}

void PreferenceStore::Record(const PreferenceRecord& rec) {
  std::lock_guard lock(mu_);
  auto it = data_.candidate_sets.find(rec.observation_id);
  if (it == data_.candidate_sets.end())
    throw Error(ErrorCode::kMissingObservation,
                "unknown observation '" + rec.observation_id + "'");
  const size_t m = it->second.size();
  if (rec.i == rec.j || rec.i >= m || rec.j >= m ||
      (rec.y != 0 && rec.y != 1))
    throw Error(ErrorCode::kInvalidRecord,
                rec.observation_id + ": invalid pair (" +
                    std::to_string(rec.i) + ", " + std::to_string(rec.j) +
                    ") y=" + std::to_string(rec.y));
  auto key = DedupKey(rec);
  if (seen_.contains(key))
    throw Error(ErrorCode::kDuplicateRecord,
                rec.observation_id + ": pair already labeled by '" +
                    rec.annotator_id + "'");
  if (log_) {
    *log_ << ToJson(rec).dump() << '\n';
    log_->flush();
    if (!*log_)
      throw Error(ErrorCode::kIoError, "failed to append preference record");
  }
  seen_.insert(std::move(key));
  data_.records.push_back(rec);
}

size_t PreferenceStore::size() const {
  std::lock_guard lock(mu_);
  return data_.records.size();
}

bool PreferenceStore::HasObservation(const std::string& obs) const {
  std::lock_guard lock(mu_);
  return data_.candidate_sets.contains(obs);
}

std::optional<CandidateSet> PreferenceStore::GetCandidateSet(
    const std::string& obs) const {
  std::lock_guard lock(mu_);
  auto it = data_.candidate_sets.find(obs);
  if (it == data_.candidate_sets.end()) return std::nullopt;
  return it->second;
}

PreferenceDataset PreferenceStore::Snapshot() const {
  std::lock_guard lock(mu_);
  return data_;
}

std::vector<int> WinCounts(size_t n_items,
                           std::span<const PreferenceRecord> recs) {
  std::vector<int> wins(n_items, 0);
  for (const PreferenceRecord& r : recs) {
    if (r.i >= n_items || r.j >= n_items || r.i == r.j)
      throw Error(ErrorCode::kInvalidRecord,
                  r.observation_id + ": record index out of range");
    ++wins[r.y == 1 ? r.i : r.j];
  }
  return wins;
}

size_t AggregateBest(const CandidateSet& cs,
                     std::span<const PreferenceRecord> recs, Rng& rng) {
  if (recs.empty())
    throw Error(ErrorCode::kNoAnnotations,
                "no annotations for observation '" + cs.observation_id + "'");
  const std::vector<int> wins = WinCounts(cs.size(), recs);
  const int best = *std::max_element(wins.begin(), wins.end());
  std::vector<size_t> tied;
  for (size_t k = 0; k < wins.size(); ++k)
    if (wins[k] == best) tied.push_back(k);
  if (tied.size() == 1) return tied.front();

  for (size_t k : tied)
    if (IsAnnotatorSuggested(cs[k].kind)) return k;
  for (size_t k : tied)
    if (cs[k].kind == CandidateKind::kDataset) return k;
  return tied[UniformIndex(rng, tied.size())];
}

size_t AggregateBest(const CandidateSet& cs,
                     std::span<const PreferenceRecord> recs, uint64_t seed) {
  Rng rng(DeriveSeed(seed, cs.observation_id));
  return AggregateBest(cs, recs, rng);
}

double PrefProbability(double r_i, double r_j) {
  const double d = r_i - r_j;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

RewardFit FitBradleyTerry(std::span<const PreferenceRecord> recs,
                          size_t n_items,
                          const BradleyTerryOptions& options) {
  // wins[a][b]: number of records in which a beat b.
  std::vector<std::vector<double>> wins(n_items,
                                        std::vector<double>(n_items, 0.0));
  std::vector<size_t> appearances(n_items, 0);
  for (const PreferenceRecord& r : recs) {
    if (r.i >= n_items || r.j >= n_items || r.i == r.j)
      throw Error(ErrorCode::kInvalidRecord,
                  "comparison references an item outside [0, n_items)");
    const size_t winner = r.y == 1 ? r.i : r.j;
    const size_t loser = r.y == 1 ? r.j : r.i;
    wins[winner][loser] += 1.0;
    ++appearances[r.i];
    ++appearances[r.j];
  }
  for (size_t k = 0; k < n_items; ++k)
    if (appearances[k] == 0)
      throw Error(ErrorCode::kUnderIdentified,
                  "item " + std::to_string(k) + " has no comparisons");

  // Regularized mean log-likelihood per comparison.
  const double per_record = 1.0 / static_cast<double>(recs.size());
  auto objective = [&](const std::vector<double>& r) {
    double ll = 0.0, sq = 0.0;
    for (size_t a = 0; a < n_items; ++a) {
      sq += r[a] * r[a];
      for (size_t b = 0; b < n_items; ++b)
        if (wins[a][b] > 0.0) ll += wins[a][b] * LogSigmoid(r[a] - r[b]);
    }
    return per_record * ll - 0.5 * options.l2 * sq;
  };
  auto gradient = [&](const std::vector<double>& r) {
    std::vector<double> g(n_items, 0.0);
    for (size_t a = 0; a < n_items; ++a) {
      g[a] -= options.l2 * r[a];
      for (size_t b = 0; b < n_items; ++b) {
        if (wins[a][b] == 0.0) continue;
        // d/dr_a of log sigma(r_a - r_b) = 1 - sigma(r_a - r_b)
        const double push =
            per_record * wins[a][b] * (1.0 - PrefProbability(r[a], r[b]));
        g[a] += push;
        g[b] -= push;
      }
    }
    return g;
  };

  RewardFit fit;
  std::vector<double> r(n_items, 0.0);
  double current = objective(r);
  fit.objective_trace.push_back(current);
  for (; fit.iterations < options.max_iter; ++fit.iterations) {
    const std::vector<double> g = gradient(r);
    double g_inf = 0.0;
    for (double v : g) g_inf = std::max(g_inf, std::abs(v));
    if (g_inf < options.tol) {
      fit.converged = true;
      break;
    }
    double step = options.initial_step;
    std::vector<double> trial(n_items);
    bool accepted = false;
    while (step > 1e-18) {
      for (size_t k = 0; k < n_items; ++k) trial[k] = r[k] + step * g[k];
      const double value = objective(trial);
      if (value >= current) {
        r = trial;
        current = value;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent possible at machine precision: stationary point.
      fit.converged = true;
      break;
    }
    fit.objective_trace.push_back(current);
  }

  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(n_items);
  for (double& v : r) v -= mean;
  fit.rewards = std::move(r);
  fit.log_likelihood = current;
  return fit;
}

std::map<CandidateKind, double> FitRewardsByKind(
    const PreferenceDataset& dataset, const BradleyTerryOptions& options) {
  std::map<CandidateKind, size_t> item_of;
  std::vector<CandidateKind> kinds;
  std::vector<PreferenceRecord> pooled;
  auto item = [&](CandidateKind kind) {
    auto [it, inserted] = item_of.emplace(kind, kinds.size());
    if (inserted) kinds.push_back(kind);
    return it->second;
  };
  for (const PreferenceRecord& r : dataset.records) {
    auto cs = dataset.candidate_sets.find(r.observation_id);
    if (cs == dataset.candidate_sets.end()) continue;
    const size_t a = item(cs->second[r.i].kind);
    const size_t b = item(cs->second[r.j].kind);
    if (a == b) continue;  // same kind on both sides carries no information
    PreferenceRecord p = r;
    p.i = a;
    p.j = b;
    pooled.push_back(std::move(p));
  }
  std::map<CandidateKind, double> out;
  if (kinds.size() < 2) return out;
  const RewardFit fit = FitBradleyTerry(pooled, kinds.size(), options);
  for (size_t k = 0; k < kinds.size(); ++k) out[kinds[k]] = fit.rewards[k];
  return out;
}

DatasetSummary SummarizeDataset(const PreferenceDataset& dataset,
                                uint64_t aggregate_seed) {
  std::map<std::string, std::vector<PreferenceRecord>> by_obs;
  for (const PreferenceRecord& r : dataset.records)
    by_obs[r.observation_id].push_back(r);
  DatasetSummary s;
  size_t not_dataset = 0;
  for (const auto& [obs, recs] : by_obs) {
    auto cs = dataset.candidate_sets.find(obs);
    if (cs == dataset.candidate_sets.end()) continue;
    ++s.observations;
    s.m = std::max(s.m, cs->second.size());
    s.total_candidates += cs->second.size();
    s.total_comparisons += recs.size();
    if (AggregateBest(cs->second, recs, aggregate_seed) != 0) ++not_dataset;
  }
  if (s.observations > 0)
    s.fraction_dataset_not_preferred =
        static_cast<double>(not_dataset) / static_cast<double>(s.observations);
  return s;
}

}  // namespace cfnav
