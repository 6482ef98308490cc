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

#include "cfnav/policy.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "cfnav/error.h"
#include "cfnav/random.h"

namespace cfnav {
namespace {

struct Forward {
  Eigen::VectorXd h1, h2, a3;
};

Forward RunForward(const PolicyParams& p, const Eigen::VectorXd& x) {
  Forward f;
  f.h1 = (p.w1 * x + p.b1).array().tanh().matrix();
  f.h2 = (p.w2 * f.h1 + p.b2).array().tanh().matrix();
  f.a3 = (p.w3 * f.h2 + p.b3).array().tanh().matrix();
  return f;
}

Eigen::VectorXd TargetVector(const Trajectory& target, size_t horizon) {
  if (target.size() != horizon)
    throw Error(ErrorCode::kInvalidArgument,
                "target length " + std::to_string(target.size()) +
                    " does not match horizon " + std::to_string(horizon));
  Eigen::VectorXd t(2 * horizon);
  for (size_t k = 0; k < horizon; ++k) {
    t[2 * k] = target[k].x;
    t[2 * k + 1] = target[k].y;
  }
  return t;
}

void CheckFeatures(const PolicyParams& p, const FeatureVec& f) {
  if (static_cast<size_t>(f.values.size()) != p.config.input_dim())
    throw Error(ErrorCode::kInvalidArgument,
                "feature length does not match the policy input");
}

template <typename M>
void Append(std::vector<double>& out, const M& m) {
  // Row-major regardless of Eigen's storage order.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

template <typename M>
size_t Extract(std::span<const double> flat, size_t offset, M& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[offset++];
  return offset;
}

}  // namespace

FeatureVec EncodeFeatures(const SensorFrame& frame, const PolicyConfig& cfg) {
  if (frame.scan.ranges.size() != cfg.n_beams)
    throw Error(ErrorCode::kInvalidArgument,
                "scan has " + std::to_string(frame.scan.ranges.size()) +
                    " beams, policy expects " + std::to_string(cfg.n_beams));
  FeatureVec f;
  f.values.resize(static_cast<Eigen::Index>(cfg.input_dim()));
  for (size_t k = 0; k < cfg.n_beams; ++k)
    f.values[static_cast<Eigen::Index>(k)] =
        std::clamp(frame.scan.ranges[k] / cfg.max_range, 0.0, 1.0);
  f.values[static_cast<Eigen::Index>(cfg.n_beams)] =
      std::clamp(frame.goal.x / cfg.goal_scale, -1.0, 1.0);
  f.values[static_cast<Eigen::Index>(cfg.n_beams + 1)] =
      std::clamp(frame.goal.y / cfg.goal_scale, -1.0, 1.0);
  return f;
}

PolicyParams PolicyParams::Zeros(const PolicyConfig& cfg) {
  PolicyParams p;
  p.config = cfg;
  const auto in = static_cast<Eigen::Index>(cfg.input_dim());
  const auto h = static_cast<Eigen::Index>(cfg.hidden);
  const auto out = static_cast<Eigen::Index>(cfg.output_dim());
  p.w1 = Eigen::MatrixXd::Zero(h, in);
  p.b1 = Eigen::VectorXd::Zero(h);
  p.w2 = Eigen::MatrixXd::Zero(h, h);
  p.b2 = Eigen::VectorXd::Zero(h);
  p.w3 = Eigen::MatrixXd::Zero(out, h);
  p.b3 = Eigen::VectorXd::Zero(out);
  return p;
}

PolicyParams PolicyParams::Random(const PolicyConfig& cfg, uint64_t seed,
                                  double init_scale) {
  PolicyParams p = Zeros(cfg);
  p.seed = seed;
  Rng rng(seed);
  auto fill = [&](Eigen::MatrixXd& m) {
    const double bound = init_scale / std::sqrt(static_cast<double>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = UniformReal(rng, -bound, bound);
  };
  fill(p.w1);
  fill(p.w2);
  fill(p.w3);
  return p;
}

size_t PolicyParams::ParameterCount() const {
  return static_cast<size_t>(w1.size() + b1.size() + w2.size() + b2.size() +
                             w3.size() + b3.size());
}

std::vector<double> PolicyParams::Flatten() const {
  std::vector<double> out;
  out.reserve(ParameterCount());
  Append(out, w1);
  Append(out, b1);
  Append(out, w2);
  Append(out, b2);
  Append(out, w3);
  Append(out, b3);
  return out;
}

void PolicyParams::Unflatten(std::span<const double> flat) {
  if (flat.size() != ParameterCount())
    throw Error(ErrorCode::kInvalidArgument, "parameter vector size mismatch");
  size_t off = 0;
  off = Extract(flat, off, w1);
  off = Extract(flat, off, b1);
  off = Extract(flat, off, w2);
  off = Extract(flat, off, b2);
  off = Extract(flat, off, w3);
  Extract(flat, off, b3);
}

bool PolicyParams::IsFinite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() &&
         b2.allFinite() && w3.allFinite() && b3.allFinite();
}

Trajectory Predict(const PolicyParams& params, const FeatureVec& features) {
  CheckFeatures(params, features);
  const Forward f = RunForward(params, features.values);
  const size_t n = params.config.horizon;
  std::vector<Vec2> positions(n);
  for (size_t k = 0; k < n; ++k)
    positions[k] = Vec2{f.a3[2 * k], f.a3[2 * k + 1]} * params.config.output_scale;
  return TrajectoryFromPositions(positions, FrameTag::kEgoStart);
}

std::string_view LossKindName(LossKind kind) {
  return kind == LossKind::kBc ? "bc" : "chop";
}

LossKind ParseLossKind(std::string_view name) {
  if (name == "bc") return LossKind::kBc;
  if (name == "chop") return LossKind::kChop;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown loss '" + std::string(name) + "' (expected bc|chop)");
}

double Loss(const PolicyParams& params, const FeatureVec& features,
            const Trajectory& target, LossKind /*kind*/) {
  CheckFeatures(params, features);
  const size_t n = params.config.horizon;
  const Eigen::VectorXd t = TargetVector(target, n);
  const Forward f = RunForward(params, features.values);
  const Eigen::VectorXd o = f.a3 * params.config.output_scale;
  return (o - t).squaredNorm() / static_cast<double>(n);
}

PolicyParams Grad(const PolicyParams& params,
                  std::span<const TrainingExample> batch, LossKind kind,
                  double* mean_loss) {
  (void)kind;
  if (batch.empty())
    throw Error(ErrorCode::kInvalidArgument, "gradient of an empty batch");
  PolicyParams g = PolicyParams::Zeros(params.config);
  const size_t n = params.config.horizon;
  const double s = params.config.output_scale;
  double loss_sum = 0.0;
  for (const TrainingExample& ex : batch) {
    CheckFeatures(params, ex.features);
    const Eigen::VectorXd& x = ex.features.values;
    const Forward f = RunForward(params, x);
    const Eigen::VectorXd diff = f.a3 * s - TargetVector(ex.target, n);
    loss_sum += diff.squaredNorm() / static_cast<double>(n);
    const Eigen::VectorXd d3 =
        ((2.0 / static_cast<double>(n)) * diff).array() * s *
        (1.0 - f.a3.array().square());
    g.w3.noalias() += d3 * f.h2.transpose();
    g.b3 += d3;
    const Eigen::VectorXd d2 = (params.w3.transpose() * d3).array() *
                               (1.0 - f.h2.array().square());
    g.w2.noalias() += d2 * f.h1.transpose();
    g.b2 += d2;
    const Eigen::VectorXd d1 = (params.w2.transpose() * d2).array() *
                               (1.0 - f.h1.array().square());
    g.w1.noalias() += d1 * x.transpose();
    g.b1 += d1;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.w1 *= inv;
  g.b1 *= inv;
  g.w2 *= inv;
  g.b2 *= inv;
  g.w3 *= inv;
  g.b3 *= inv;
  if (mean_loss) *mean_loss = loss_sum * inv;
  return g;
}

PolicyParams Grad(const PolicyParams& params,
                  std::span<const TrainingExample> batch, LossKind kind) {
  return Grad(params, batch, kind, nullptr);
}

TrainResult Train(std::span<const TrainingExample> dataset,
                  const PolicyConfig& policy_cfg, const TrainConfig& cfg) {
  if (dataset.empty())
    throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1 ||
      !(cfg.decay_start >= 0.0 && cfg.decay_start <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  PolicyConfig pc = policy_cfg;
  pc.hidden = cfg.hidden;
  TrainResult result;
  result.params = PolicyParams::Random(pc, cfg.seed, cfg.weight_init);
  PolicyParams& p = result.params;
  PolicyParams vel = PolicyParams::Zeros(pc);

  Rng rng(DeriveSeed(cfg.seed, "shuffle"));
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingExample> batch;
  batch.reserve(cfg.batch_size);

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Shuffle(order, rng);
    const double hold = cfg.decay_start * static_cast<double>(cfg.epochs);
    const double into = static_cast<double>(epoch) - hold;
    const double lr =
        into <= 0.0
            ? cfg.learning_rate
            : cfg.learning_rate * 0.5 *
                  (1.0 + std::cos(M_PI * into /
                                  (static_cast<double>(cfg.epochs) - hold)));
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      for (size_t k = start; k < end; ++k) batch.push_back(dataset[order[k]]);
      double batch_loss = 0.0;
      const PolicyParams g = Grad(p, batch, cfg.loss_kind, &batch_loss);
      epoch_loss += batch_loss * static_cast<double>(batch.size());
      vel.w1 = cfg.momentum * vel.w1 - lr * g.w1;
      vel.b1 = cfg.momentum * vel.b1 - lr * g.b1;
      vel.w2 = cfg.momentum * vel.w2 - lr * g.w2;
      vel.b2 = cfg.momentum * vel.b2 - lr * g.b2;
      vel.w3 = cfg.momentum * vel.w3 - lr * g.w3;
      vel.b3 = cfg.momentum * vel.b3 - lr * g.b3;
      p.w1 += vel.w1;
      p.b1 += vel.b1;
      p.w2 += vel.w2;
      p.b2 += vel.b2;
      p.w3 += vel.w3;
      p.b3 += vel.b3;
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || !p.IsFinite())
      throw Error(ErrorCode::kTrainingDiverged,
                  "training diverged at epoch " + std::to_string(epoch));
    result.loss_curve.push_back(epoch_loss);
  }
  return result;
}

std::vector<DistillTarget> DistillTargets(
    std::span<const Observation> observations, const PreferenceDataset& prefs,
    DistillMode mode, uint64_t aggregate_seed) {
  std::map<std::string, std::vector<PreferenceRecord>> by_obs;
  if (mode == DistillMode::kChop)
    for (const PreferenceRecord& r : prefs.records)
      by_obs[r.observation_id].push_back(r);

  std::vector<DistillTarget> out;
  out.reserve(observations.size());
  for (const Observation& obs : observations) {
    const std::string& id = obs.frame.observation_id;
    auto cs = prefs.candidate_sets.find(id);
    if (cs == prefs.candidate_sets.end())
      throw Error(ErrorCode::kMissingObservation,
                  "no candidate set for observation '" + id + "'");
    size_t index = 0;
    if (mode == DistillMode::kChop) {
      auto recs = by_obs.find(id);
      if (recs == by_obs.end())
        throw Error(ErrorCode::kNoAnnotations,
                    "no annotations for observation '" + id + "'");
      index = AggregateBest(cs->second, recs->second, aggregate_seed);
    }
    const Candidate& c = cs->second[index];
    out.push_back({id, index, c.kind, c.trajectory});
  }
  return out;
}

}  // namespace cfnav
