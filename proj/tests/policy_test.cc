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


#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "cfnav/counterfactual.h"
#include "cfnav/error.h"
#include "cfnav/policy.h"
#include "oracles.h"

namespace cfnav {
namespace {

using testing::ErrorOf;

SensorFrame Frame(size_t beams, double range, Vec2 goal) {
  SensorFrame f;
  f.scan.angle_min = -0.75 * M_PI;
  f.scan.angle_increment = 1.5 * M_PI / (beams - 1);
  f.scan.ranges.assign(beams, range);
  f.scan.max_range = 10.0;
  f.goal = goal;
  return f;
}

FeatureVec RandomFeatures(Rng& rng, const PolicyConfig& cfg) {
  SensorFrame f = Frame(cfg.n_beams, 10.0, {UniformReal(rng, -6, 6), UniformReal(rng, -6, 6)});
  for (double& r : f.scan.ranges) r = UniformReal(rng, 0.1, 10.0);
  return EncodeFeatures(f, cfg);
}

Trajectory RandomTarget(Rng& rng, size_t n) { return testing::RandomForwardPath(rng, n); }

TEST_CASE("EncodeFeatures") {
  const PolicyConfig cfg;
  const FeatureVec far = EncodeFeatures(Frame(64, 10.0, {0, 0}), cfg);
  REQUIRE(far.values.size() == 66);
  for (int k = 0; k < 64; ++k) CHECK(far.values[k] == 1.0);
  CHECK(far.values[64] == 0.0);
  CHECK(far.values[65] == 0.0);

  const FeatureVec clipped = EncodeFeatures(Frame(64, 5.0, {100, 0}), cfg);
  CHECK(clipped.values[0] == 0.5);
  CHECK(clipped.values[64] == 1.0);
  CHECK(clipped.values[65] == 0.0);

  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const FeatureVec f = RandomFeatures(rng, cfg);
    CHECK(f.values.maxCoeff() <= 1.0);
    CHECK(f.values.minCoeff() >= -1.0);
  }
  CHECK(ErrorOf([&] { EncodeFeatures(Frame(32, 5.0, {1, 0}), cfg); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("Predict") {
  const PolicyConfig cfg;
  Rng rng(2);
  const FeatureVec f = RandomFeatures(rng, cfg);
  const Trajectory stop = Predict(PolicyParams::Zeros(cfg), f);
  CHECK(stop == MakeStopTrajectory(cfg.horizon));

  const PolicyParams p = PolicyParams::Random(cfg, 5, 3.0);
  const Trajectory a = Predict(p, f);
  Predict(p, RandomFeatures(rng, cfg));
  CHECK(Predict(p, f) == a);
  CHECK(a.size() == cfg.horizon);
  CHECK(a.frame == FrameTag::kEgoStart);

  for (int k = 0; k < 1000; ++k) {
    const PolicyParams q = PolicyParams::Random(cfg, k, 5.0);
    const Trajectory t = Predict(q, RandomFeatures(rng, cfg));
    for (const Pose2& w : t.waypoints) {
      CHECK(std::abs(w.x) <= cfg.output_scale);
      CHECK(std::abs(w.y) <= cfg.output_scale);
    }
  }
  FeatureVec wrong;
  wrong.values = Eigen::VectorXd::Zero(10);
  CHECK(ErrorOf([&] { Predict(p, wrong); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Parameter flattening round-trips") {
  const PolicyConfig cfg;
  const PolicyParams p = PolicyParams::Random(cfg, 3);
  const std::vector<double> flat = p.Flatten();
  CHECK(flat.size() == p.ParameterCount());
  CHECK(p.ParameterCount() == 64 * 66 + 64 + 64 * 64 + 64 + 16 * 64 + 16);
  PolicyParams q = PolicyParams::Zeros(cfg);
  q.Unflatten(flat);
  CHECK(q.Flatten() == flat);
  CHECK(q.w1(0, 1) == flat[1]);  // row-major
  CHECK(q.w1(1, 0) == flat[66]);
}

Trajectory Offset(const Trajectory& t, Vec2 d) {
  Trajectory out = t;
  for (Pose2& p : out.waypoints) p = Pose2(p.x + d.x, p.y + d.y, p.theta);
  return out;
}

TEST_CASE("Loss") {
  const PolicyConfig cfg;
  Rng rng(4);
  const PolicyParams p = PolicyParams::Random(cfg, 4);
  const FeatureVec f = RandomFeatures(rng, cfg);
  const Trajectory pred = Predict(p, f);
  for (LossKind kind : {LossKind::kBc, LossKind::kChop}) {
    CHECK(Loss(p, f, pred, kind) < 1e-24);
    CHECK(Loss(p, f, Offset(pred, {1, 0}), kind) == doctest::Approx(1.0));
  }
  for (int k = 0; k < 100; ++k) {
    const FeatureVec g = RandomFeatures(rng, cfg);
    const Trajectory target = RandomTarget(rng, cfg.horizon);
    const Trajectory out = Predict(p, g);
    double hand = 0.0;
    for (size_t i = 0; i < cfg.horizon; ++i) {
      const double d = std::hypot(out[i].x - target[i].x, out[i].y - target[i].y);
      hand += d * d;
    }
    hand /= cfg.horizon;
    CHECK(std::abs(Loss(p, g, target, LossKind::kBc) - hand) < 1e-12);
    CHECK(Loss(p, g, target, LossKind::kBc) == Loss(p, g, target, LossKind::kChop));
    CHECK(Loss(p, g, target, LossKind::kBc) >= 0.0);
  }
  CHECK(ParseLossKind(LossKindName(LossKind::kChop)) == LossKind::kChop);
  CHECK(ParseLossKind("bc") == LossKind::kBc);
}

// Relative error with a floor on the scale for coordinates whose gradient
// is numerically zero.
double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-7});
}

double WorstGradientError(LossKind kind, uint64_t seed) {
  const PolicyConfig cfg;
  Rng rng(seed);
  PolicyParams p = PolicyParams::Random(cfg, seed, 1.0);
  std::vector<TrainingExample> samples;
  for (int k = 0; k < 10; ++k)
    samples.push_back({RandomFeatures(rng, cfg), RandomTarget(rng, cfg.horizon)});
  double worst = 0.0;
  for (const TrainingExample& ex : samples) {
    const std::vector<TrainingExample> one{ex};
    const std::vector<double> g = Grad(p, one, kind).Flatten();
    std::vector<double> theta = p.Flatten();
    for (int c = 0; c < 200; ++c) {
      const size_t idx = UniformIndex(rng, theta.size());
      const double h = 1e-5;
      const double saved = theta[idx];
      theta[idx] = saved + h;
      p.Unflatten(theta);
      const double up = Loss(p, ex.features, ex.target, kind);
      theta[idx] = saved - h;
      p.Unflatten(theta);
      const double down = Loss(p, ex.features, ex.target, kind);
      theta[idx] = saved;
      p.Unflatten(theta);
      worst = std::max(worst, RelativeError(g[idx], (up - down) / (2 * h)));
    }
  }
  return worst;
}

TEST_CASE("Analytic gradients match central differences") {
  CHECK(WorstGradientError(LossKind::kBc, 11) <= 1e-4);
  CHECK(WorstGradientError(LossKind::kChop, 12) <= 1e-4);
}

TEST_CASE("Gradient is zero at a perfect fit and linear over the batch") {
  const PolicyConfig cfg;
  Rng rng(6);
  const PolicyParams zero = PolicyParams::Zeros(cfg);
  const std::vector<TrainingExample> still{
      {RandomFeatures(rng, cfg), MakeStopTrajectory(cfg.horizon)}};
  for (double v : Grad(zero, still, LossKind::kBc).Flatten()) CHECK(v == 0.0);

  const PolicyParams p = PolicyParams::Random(cfg, 6);
  std::vector<TrainingExample> batch;
  for (int k = 0; k < 7; ++k) batch.push_back({RandomFeatures(rng, cfg), RandomTarget(rng, cfg.horizon)});
  const std::vector<double> whole = Grad(p, batch, LossKind::kChop).Flatten();
  std::vector<double> mean(whole.size(), 0.0);
  for (const TrainingExample& ex : batch) {
    const std::vector<TrainingExample> one{ex};
    const std::vector<double> g = Grad(p, one, LossKind::kChop).Flatten();
    for (size_t i = 0; i < g.size(); ++i) mean[i] += g[i] / batch.size();
  }
  double worst = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) worst = std::max(worst, std::abs(mean[i] - whole[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("Training memorizes one sample") {
  const PolicyConfig cfg;
  Rng rng(7);
  Trajectory target = testing::StraightPath(cfg.horizon, 0.25);
  const std::vector<TrainingExample> data{{RandomFeatures(rng, cfg), target}};
  TrainConfig tc;
  tc.epochs = 400;
  tc.learning_rate = 0.01;
  const TrainResult r = Train(data, cfg, tc);
  CHECK(r.loss_curve.size() == tc.epochs);
  CHECK(r.loss_curve.back() < 1e-4);
  CHECK(Loss(r.params, data[0].features, target, LossKind::kBc) < 1e-4);
}

TEST_CASE("Training is deterministic for a seed") {
  const PolicyConfig cfg;
  Rng rng(8);
  std::vector<TrainingExample> data;
  for (int k = 0; k < 50; ++k) data.push_back({RandomFeatures(rng, cfg), RandomTarget(rng, cfg.horizon)});
  TrainConfig tc;
  tc.epochs = 5;
  const TrainResult a = Train(data, cfg, tc);
  const TrainResult b = Train(data, cfg, tc);
  CHECK(a.params.Flatten() == b.params.Flatten());
  CHECK(a.loss_curve == b.loss_curve);
  tc.seed = 2;
  CHECK_FALSE(Train(data, cfg, tc).params.Flatten() == a.params.Flatten());
}

TEST_CASE("Training reports divergence with the epoch") {
  const PolicyConfig cfg;
  Rng rng(9);
  std::vector<TrainingExample> data;
  for (int k = 0; k < 8; ++k) data.push_back({RandomFeatures(rng, cfg), RandomTarget(rng, cfg.horizon)});
  TrainConfig tc;
  tc.epochs = 5;
  tc.learning_rate = 1e308;
  try {
    Train(data, cfg, tc);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTrainingDiverged);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
  tc.learning_rate = 0.0;
  CHECK(ErrorOf([&] { Train(data, cfg, tc); }) == ErrorCode::kInvalidArgument);
}

Observation Obs(const std::string& id) {
  Observation o;
  o.frame = Frame(64, 5.0, {3, 0});
  o.frame.observation_id = id;
  o.executed = testing::StraightPath(8, 0.25);
  return o;
}

TEST_CASE("DistillTargets") {
  PreferenceDataset prefs;
  std::vector<Observation> obs;
  GenConfig gen;
  for (int k = 0; k < 6; ++k) {
    const std::string id = "o" + std::to_string(k);
    obs.push_back(Obs(id));
    prefs.candidate_sets[id] = GenerateCandidates(id, obs.back().executed, StopRequest{}, gen);
    for (auto [i, j] : AllPairs(4)) {
      // Even observations: the dataset path wins everything. Odd: stop does.
      const size_t winner = k % 2 == 0 ? 0 : 3;
      const int y = i == winner ? 1 : j == winner ? 0 : 1;
      prefs.records.push_back({id, i, j, y, "oracle", PreferenceSource::kOracle});
    }
  }
  const auto bc = DistillTargets(obs, prefs, DistillMode::kBc, 1);
  REQUIRE(bc.size() == 6);
  for (const DistillTarget& t : bc) {
    CHECK(t.kind == CandidateKind::kDataset);
    CHECK(t.target == testing::StraightPath(8, 0.25));
  }
  const auto chop = DistillTargets(obs, prefs, DistillMode::kChop, 1);
  for (size_t k = 0; k < 6; ++k) {
    CHECK(chop[k].kind == (k % 2 == 0 ? CandidateKind::kDataset : CandidateKind::kStop));
    CHECK(chop[k].candidate_index == (k % 2 == 0 ? 0u : 3u));
  }

  std::vector<Observation> extra = obs;
  extra.push_back(Obs("unlabeled"));
  prefs.candidate_sets["unlabeled"] =
      GenerateCandidates("unlabeled", extra.back().executed, StopRequest{}, gen);
  try {
    DistillTargets(extra, prefs, DistillMode::kChop, 1);
    FAIL("expected missing annotations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoAnnotations);
    CHECK(std::string(e.what()).find("unlabeled") != std::string::npos);
  }
  CHECK(DistillTargets(extra, prefs, DistillMode::kBc, 1).size() == 7);
}

}  // namespace
}  // namespace cfnav
