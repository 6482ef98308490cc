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

#ifndef CFNAV_POLICY_H_
#define CFNAV_POLICY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfnav/counterfactual.h"
#include "cfnav/geometry.h"
#include "cfnav/preference.h"
#include "cfnav/sim.h"

namespace cfnav {

struct PolicyConfig {
  size_t n_beams = 64;
  size_t horizon = 8;         // N waypoints predicted
  size_t hidden = 64;         // H
  double output_scale = 3.0;  // m
  double goal_scale = 5.0;    // m
  double max_range = 10.0;    // m

  size_t input_dim() const { return n_beams + 2; }
  size_t output_dim() const { return 2 * horizon; }
};

// Normalized ranges (r / max_range) followed by goal / goal_scale, each goal
// coordinate clipped to [-1, 1].
struct FeatureVec {
  Eigen::VectorXd values;
};

FeatureVec EncodeFeatures(const SensorFrame& frame, const PolicyConfig& cfg);

// input -> H -> H -> 2N, tanh at every layer; outputs scaled by
// output_scale are ego-frame (x, y) offsets per waypoint.
struct PolicyParams {
  PolicyConfig config;
  uint64_t seed = 0;
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  // All-zero parameters of the configured shape.
  static PolicyParams Zeros(const PolicyConfig& cfg);
  // Uniform(-scale, scale) / sqrt(fan_in) weights, zero biases.
  static PolicyParams Random(const PolicyConfig& cfg, uint64_t seed,
                             double init_scale = 1.0);

  size_t ParameterCount() const;
  // Row-major concatenation w1, b1, w2, b2, w3, b3.
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);
  bool IsFinite() const;
};

Trajectory Predict(const PolicyParams& params, const FeatureVec& features);

enum class LossKind { kBc, kChop };
std::string_view LossKindName(LossKind kind);
LossKind ParseLossKind(std::string_view name);

// Mean over waypoints of squared position error; headings are ignored.
// `kind` only records which target the caller paired: both losses share this
// form.
double Loss(const PolicyParams& params, const FeatureVec& features,
            const Trajectory& target, LossKind kind);

struct TrainingExample {
  FeatureVec features;
  Trajectory target;
};

// Analytic gradient of the mean batch loss.
PolicyParams Grad(const PolicyParams& params,
                  std::span<const TrainingExample> batch, LossKind kind);
// Same, also returning the mean batch loss.
PolicyParams Grad(const PolicyParams& params,
                  std::span<const TrainingExample> batch, LossKind kind,
                  double* mean_loss);

struct TrainConfig {
  double learning_rate = 0.02;
  size_t batch_size = 32;
  size_t epochs = 200;
  uint64_t seed = 1;
  LossKind loss_kind = LossKind::kBc;
  size_t hidden = 64;
  double weight_init = 1.0;
  double momentum = 0.9;
  // Fraction of epochs run at learning_rate before the step size follows a
  // half cosine down to 0. 1 keeps it constant.
  double decay_start = 0.8;
};

struct TrainResult {
  PolicyParams params;
  std::vector<double> loss_curve;  // mean training loss per epoch
};

// Mini-batch SGD with momentum; fixed shuffle order from cfg.seed. Throws
// kTrainingDiverged when the loss stops being finite.
TrainResult Train(std::span<const TrainingExample> dataset,
                  const PolicyConfig& policy_cfg, const TrainConfig& cfg);

enum class DistillMode { kBc, kChop };

struct DistillTarget {
  std::string observation_id;
  size_t candidate_index = 0;
  CandidateKind kind = CandidateKind::kDataset;
  Trajectory target;
};

// bc: every observation paired with its dataset trajectory (candidate 0).
// chop: paired with the aggregated winner of its preference records.
std::vector<DistillTarget> DistillTargets(
    std::span<const Observation> observations, const PreferenceDataset& prefs,
    DistillMode mode, uint64_t aggregate_seed);

}  // namespace cfnav

#endif  // CFNAV_POLICY_H_
