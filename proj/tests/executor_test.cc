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


#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include <doctest.h>

#include "cfnav/counterfactual.h"
#include "cfnav/error.h"
#include "cfnav/executor.h"
#include "oracles.h"

namespace cfnav {
namespace {

using testing::ErrorOf;
using testing::Unexpress;

SensorFrame EmptyFrame() {
  SensorFrame f;
  f.scan.angle_min = -0.75 * M_PI;
  f.scan.angle_increment = 1.5 * M_PI / 63;
  f.scan.ranges.assign(64, 10.0);
  f.scan.max_range = 10.0;
  f.goal = {3, 0};
  return f;
}

PathMsg Msg(Trajectory path, Pose2 start, uint64_t seq) {
  PathMsg m;
  m.waypoints = std::move(path);
  m.start_pose = start;
  m.seq = seq;
  return m;
}

// Drives straight at the relative goal and a little past it.
PathSource StraightToGoal() {
  return [](const SensorFrame& f) -> std::optional<Trajectory> {
    const double d = f.goal.Norm();
    const double heading = std::atan2(f.goal.y, f.goal.x);
    const double spacing = (d + 0.5) / 8.0;
    Trajectory t;
    for (int k = 1; k <= 8; ++k)
      t.waypoints.emplace_back(spacing * k * std::cos(heading),
                               spacing * k * std::sin(heading), heading);
    return t;
  };
}

PathSource StopScript() {
  return [](const SensorFrame&) -> std::optional<Trajectory> {
    return MakeStopTrajectory(8);
  };
}

Scenario EmptyScenario(Vec2 goal) {
  Scenario s;
  s.world.bounds = {{-20, -20}, {20, 20}};
  s.start = Pose2(0, 0, 0);
  s.goal = goal;
  return s;
}

TEST_CASE("Model runner") {
  const PolicyConfig cfg;
  const SensorFrame frame = EmptyFrame();
  const auto msg = ModelRunnerTick(PolicyParams::Zeros(cfg), frame, Pose2(1, 2, 0.3), 4);
  REQUIRE(msg);
  CHECK(msg->seq == 5);
  CHECK(msg->waypoints == MakeStopTrajectory(cfg.horizon));
  CHECK(msg->start_pose == Pose2(1, 2, 0.3));

  ModelRunner runner(PolicyPathSource(PolicyParams::Random(cfg, 1)));
  const auto a = runner.Tick(frame, Pose2(), 0.0);
  const auto b = runner.Tick(frame, Pose2(), 0.5);
  REQUIRE(a);
  REQUIRE(b);
  CHECK(b->seq > a->seq);

  int calls = 0;
  ModelRunner flaky([&](const SensorFrame&) -> std::optional<Trajectory> {
    ++calls;
    if (calls == 2) return std::nullopt;
    if (calls == 3) throw Error(ErrorCode::kInvalidArgument, "boom");
    return MakeStopTrajectory(8);
  });
  CHECK(flaky.Tick(frame, Pose2(), 0)->seq == 1);
  CHECK_FALSE(flaky.Tick(frame, Pose2(), 0));
  CHECK_FALSE(flaky.Tick(frame, Pose2(), 0));
  CHECK(flaky.last_seq() == 1);
  CHECK(flaky.Tick(frame, Pose2(), 0)->seq == 2);

  SensorFrame bad = frame;
  bad.scan.ranges.resize(10);
  CHECK_FALSE(ModelRunnerTick(PolicyParams::Zeros(cfg), bad, Pose2(), 0));
}

TEST_CASE("AcceptNewPath maps ego waypoints into odom") {
  PathManager mgr;
  mgr.AcceptNewPath(Msg(testing::StraightPath(4, 1.0), Pose2(0, 0, M_PI / 2), 1));
  const ActivePath p = mgr.active();
  CHECK(p.source_seq == 1);
  REQUIRE(p.remaining.size() == 4);
  for (size_t k = 0; k < 4; ++k) {
    CHECK(std::abs(p.remaining[k].x) < 1e-12);
    CHECK(p.remaining[k].y == doctest::Approx(k + 1.0));
  }

  CHECK(ErrorOf([&] { mgr.AcceptNewPath(Msg(testing::StraightPath(2, 1.0), Pose2(), 1)); }) ==
        ErrorCode::kRejectedStale);
  CHECK(ErrorOf([&] { mgr.AcceptNewPath(Msg(testing::StraightPath(2, 1.0), Pose2(), 0)); }) ==
        ErrorCode::kRejectedStale);
  CHECK(mgr.active().remaining == p.remaining);
  CHECK(mgr.active().source_seq == 1);

  Rng rng(3);
  for (uint64_t k = 0; k < 200; ++k) {
    const Pose2 start(UniformReal(rng, -10, 10), UniformReal(rng, -10, 10),
                      UniformReal(rng, -M_PI, M_PI));
    const Trajectory ego = testing::RandomTrajectory(rng, 8);
    mgr.AcceptNewPath(Msg(ego, start, k + 2));
    const ActivePath a = mgr.active();
    for (size_t i = 0; i < 8; ++i) {
      const Pose2 want = Unexpress(ego[i], start);
      CHECK(std::abs(a.remaining[i].x - want.x) < 1e-9);
      CHECK(std::abs(a.remaining[i].y - want.y) < 1e-9);
      CHECK(std::abs(testing::AngleDiff(a.remaining[i].theta, want.theta)) < 1e-9);
    }
  }
}

TEST_CASE("PathManager update prunes near and behind waypoints") {
  PathManager mgr;
  mgr.AcceptNewPath(Msg(testing::StraightPath(4, 1.0), Pose2(), 1));
  CHECK(mgr.Update(Pose2(0.9, 0, 0), 0.25)->x == doctest::Approx(2.0));
  CHECK(mgr.active().remaining.size() == 3);

  PathManager close;
  close.AcceptNewPath(Msg(testing::StraightPath(4, 1.0), Pose2(), 1));
  // First waypoint ahead but within the radius.
  const auto t = close.Update(Pose2(0.85, 0.05, 0), 0.25);
  REQUIRE(t);
  CHECK(t->x == doctest::Approx(2.0));
  CHECK(close.Update(Pose2(0, 0, 0), 0.25)->x == doctest::Approx(2.0));

  PathManager behind;
  behind.AcceptNewPath(Msg(testing::StraightPath(4, 1.0), Pose2(), 1));
  CHECK_FALSE(behind.Update(Pose2(10, 0, 0), 0.25));
  CHECK(behind.active().remaining.empty());
  CHECK_FALSE(behind.Update(Pose2(0, 0, 0), 0.25));

  PathManager turned;
  turned.AcceptNewPath(Msg(testing::StraightPath(4, 1.0), Pose2(), 1));
  CHECK_FALSE(turned.Update(Pose2(0, 0, M_PI), 0.25));

  CHECK_FALSE(PathManager().Update(Pose2(), 0.25));
  CHECK(ErrorOf([&] { PathManager().Update(Pose2(), 0.0); }) == ErrorCode::kInvalidArgument);

  Rng rng(4);
  for (int k = 0; k < 500; ++k) {
    PathManager m;
    const Pose2 start(UniformReal(rng, -2, 2), UniformReal(rng, -2, 2), UniformReal(rng, -M_PI, M_PI));
    m.AcceptNewPath(Msg(testing::RandomTrajectory(rng, 8), start, 1));
    const std::vector<Pose2> before = m.active().remaining;
    const Pose2 odom(UniformReal(rng, -2, 2), UniformReal(rng, -2, 2), UniformReal(rng, -M_PI, M_PI));
    const double radius = UniformReal(rng, 0.05, 1.0);
    const auto target = m.Update(odom, radius);
    size_t first = 0;
    while (first < before.size()) {
      const Pose2 local = testing::ExpressIn(before[first], odom);
      if (std::hypot(local.x, local.y) >= radius && local.x >= 0) break;
      ++first;
    }
    if (first == before.size()) {
      CHECK_FALSE(target);
    } else {
      REQUIRE(target);
      CHECK(*target == before[first]);
      CHECK(m.active().remaining.size() == before.size() - first);
    }
  }
}

TEST_CASE("Path swaps are atomic with respect to updates") {
  PathManager mgr;
  std::vector<Trajectory> paths;
  for (int k = 0; k < 200; ++k) {
    Trajectory t;
    for (int i = 1; i <= 8; ++i) t.waypoints.emplace_back(i, k, 0);
    paths.push_back(t);
  }
  std::atomic<bool> done{false};
  std::atomic<int> mixed{0};
  std::thread reader([&] {
    while (!done) {
      const ActivePath a = mgr.active();
      for (const Pose2& p : a.remaining)
        if (a.source_seq > 0 && p.y != static_cast<double>(a.source_seq - 1)) ++mixed;
      const auto t = mgr.Update(Pose2(0, 0, 0), 0.25);
      if (t && std::abs(t->y - std::round(t->y)) > 0) ++mixed;
    }
  });
  for (int k = 0; k < 200; ++k) mgr.AcceptNewPath(Msg(paths[k], Pose2(), k + 1));
  done = true;
  reader.join();
  CHECK(mixed == 0);
  CHECK(mgr.active().source_seq == 200);
}

TEST_CASE("PlannerTick") {
  const PlannerGains gains;
  const RobotLimits limits;
  const VelocityCmd ahead = PlannerTick(Pose2(1, 0, 0), Pose2(), gains, limits, 0.05);
  CHECK(ahead.omega == 0.0);
  CHECK(ahead.v > 0.0);
  CHECK(PlannerTick(Pose2(0.01, 0.02, 0), Pose2(), gains, limits, 0.05) == VelocityCmd{});
  const VelocityCmd back = PlannerTick(Pose2(-1, 0, 0), Pose2(), gains, limits, 0.05);
  CHECK(back.v == 0.0);
  CHECK(std::abs(back.omega) == doctest::Approx(limits.omega_max));

  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const Pose2 odom(UniformReal(rng, -3, 3), UniformReal(rng, -3, 3), UniformReal(rng, -M_PI, M_PI));
    const Pose2 target(UniformReal(rng, -3, 3), UniformReal(rng, -3, 3), 0);
    const VelocityCmd c = PlannerTick(target, odom, gains, limits, 0.05);
    CHECK(c.v >= 0.0);
    CHECK(c.v <= limits.v_max);
    CHECK(std::abs(c.omega) <= limits.omega_max);
    const double e = std::remainder(std::atan2(target.y - odom.y, target.x - odom.x) - odom.theta, 2 * M_PI);
    if (std::hypot(target.x - odom.x, target.y - odom.y) > 0.05 && std::abs(e) > 1e-6)
      CHECK((c.omega > 0) == (e > 0));
  }
}

TEST_CASE("Scripted straight path reaches the goal in an empty world") {
  const Scenario s = EmptyScenario({5, 0});
  const EpisodeLog log = RunEpisode(s, StraightToGoal(), EpisodeConfig{});
  CHECK(log.success);
  CHECK(log.collisions == 0);
  CHECK(log.path_completion == 1.0);
  CHECK(log.planned_arclen == doctest::Approx(5.0));
  CHECK(log.executed_arclen >= 4.8);
}

TEST_CASE("Latency twice the runner period still reaches the goal") {
  const Scenario s = EmptyScenario({5, 0});
  EpisodeConfig cfg;
  cfg.runner_latency = 2 * cfg.runner_period;
  const EpisodeLog log = RunEpisode(s, StraightToGoal(), cfg);
  CHECK(log.success);
  REQUIRE(log.paths.size() >= 2);
  // Each path goes live one latency after it was planned.
  for (const TickRow& r : log.rows)
    for (const PathMsg& p : log.paths)
      if (p.seq == r.source_seq) CHECK(r.t + 1e-9 >= p.stamp + cfg.runner_latency);
  // The robot keeps moving between path arrivals.
  size_t moving = 0;
  for (const TickRow& r : log.rows) moving += r.cmd.v > 0;
  CHECK(moving > log.rows.size() / 2);
}

TEST_CASE("Inference delay keeps the previous path in use") {
  const Scenario s = EmptyScenario({5, 0});
  EpisodeConfig cfg;
  cfg.runner_latency = 0.3;
  const EpisodeLog log = RunEpisode(s, StraightToGoal(), cfg);
  CHECK(log.success);
  for (const TickRow& r : log.rows) {
    if (r.t >= 0.5 && r.t < 0.8 - 1e-9) CHECK(r.source_seq == 1);
    if (r.t >= 0.3 && r.t < 0.8 - 1e-9) CHECK(r.target.has_value());
  }
}

TEST_CASE("Stop script never collides or succeeds") {
  Scenario s = EmptyScenario({5, 0});
  DynamicAgent blocker;
  blocker.waypoints = {{2.5, 0}};
  blocker.speed = 0.0;
  s.world.agents.push_back(blocker);
  const EpisodeLog log = RunEpisode(s, StopScript(), EpisodeConfig{});
  CHECK(log.collisions == 0);
  CHECK_FALSE(log.success);
  CHECK(log.path_completion < 1.0);
  CHECK(log.rows.size() == 1200);
}

TEST_CASE("Agent contact is counted and removed; static contact ends the run") {
  Scenario s = EmptyScenario({5, 0});
  DynamicAgent blocker;
  blocker.waypoints = {{2.5, 0}};
  s.world.agents.push_back(blocker);
  const EpisodeLog through = RunEpisode(s, StraightToGoal(), EpisodeConfig{});
  CHECK(through.collisions == 1);
  CHECK(through.success);
  CHECK(through.path_completion == 1.0);

  Scenario wall = EmptyScenario({5, 0});
  wall.world.static_segments.push_back({{2.5, -3}, {2.5, 3}});
  const EpisodeLog stopped = RunEpisode(wall, StraightToGoal(), EpisodeConfig{});
  CHECK(stopped.collided_terminated);
  CHECK(stopped.collisions == 1);
  CHECK_FALSE(stopped.success);
  CHECK(stopped.path_completion <= kCollidedCompletionCap);
  CHECK(stopped.rows.back().collision);
}

bool SameLog(const EpisodeLog& a, const EpisodeLog& b) {
  if (a.rows.size() != b.rows.size() || a.paths.size() != b.paths.size()) return false;
  for (size_t k = 0; k < a.rows.size(); ++k) {
    const TickRow& x = a.rows[k];
    const TickRow& y = b.rows[k];
    if (!(x.t == y.t && x.pose == y.pose && x.cmd == y.cmd && x.target == y.target &&
          x.source_seq == y.source_seq && x.collision == y.collision))
      return false;
  }
  return a.success == b.success && a.collisions == b.collisions &&
         a.executed_arclen == b.executed_arclen && a.min_clearance == b.min_clearance;
}

void CheckTargets(const EpisodeLog& log) {
  std::map<uint64_t, const PathMsg*> by_seq;
  for (const PathMsg& p : log.paths) by_seq[p.seq] = &p;
  uint64_t last_seq = 0;
  for (const TickRow& r : log.rows) {
    CHECK(r.source_seq >= last_seq);
    last_seq = r.source_seq;
    if (!r.target) continue;
    const Pose2 local = testing::ExpressIn(*r.target, r.pose);
    CHECK(std::hypot(local.x, local.y) >= log.config.prune_radius);
    CHECK(local.x >= 0.0);
    REQUIRE(by_seq.count(r.source_seq));
    const PathMsg& src = *by_seq[r.source_seq];
    double best = INFINITY;
    for (const Pose2& wp : src.waypoints.waypoints) {
      const Pose2 want = Unexpress(wp, src.start_pose);
      best = std::min(best, std::hypot(want.x - r.target->x, want.y - r.target->y));
    }
    CHECK(best < 1e-9);
  }
}

TEST_CASE("Policy episodes are reproducible and publish valid targets") {
  const PolicyConfig pc;
  for (ScenarioId id : kAllScenarios) {
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      const Scenario s = BuildScenario(id);
      EpisodeConfig cfg;
      cfg.seed = seed;
      cfg.time_budget = 20.0;
      cfg.runner_latency = 0.1 * seed;
      cfg.start_jitter = Pose2(0.1 * seed, -0.05 * seed, 0.02 * seed);
      const PathSource policy = PolicyPathSource(PolicyParams::Random(pc, seed, 1.0));
      const EpisodeLog a = RunEpisode(s, policy, cfg);
      const EpisodeLog b = RunEpisode(s, policy, cfg);
      CHECK(SameLog(a, b));
      CheckTargets(a);
      const EpisodeLog straight = RunEpisode(s, StraightToGoal(), cfg);
      CheckTargets(straight);
      for (const TickRow& r : a.rows) {
        CHECK(r.cmd.v >= 0.0);
        CHECK(r.cmd.v <= cfg.limits.v_max);
        CHECK(std::abs(r.cmd.omega) <= cfg.limits.omega_max);
      }
    }
  }
}

TEST_CASE("Summarize copies the episode outcome") {
  const EpisodeLog log = RunEpisode(EmptyScenario({5, 0}), StraightToGoal(), EpisodeConfig{});
  const EpisodeSummary s = Summarize(log);
  CHECK(s.success == log.success);
  CHECK(s.collisions == log.collisions);
  CHECK(s.min_clearance == log.min_clearance);
  CHECK(s.path_completion == log.path_completion);
}

}  // namespace
}  // namespace cfnav
