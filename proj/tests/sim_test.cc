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


#include <cmath>
#include <vector>

#include <doctest.h>

#include "cfnav/counterfactual.h"
#include "cfnav/error.h"
#include "cfnav/metrics.h"
#include "cfnav/sim.h"
#include "oracles.h"

namespace cfnav {
namespace {

using testing::ErrorOf;

World EmptyWorld() {
  World w;
  w.bounds = {{-20, -20}, {20, 20}};
  return w;
}

// Robot boxed in by walls 0.45 m ahead and to the sides, open behind.
World BoxedIn() {
  World w = EmptyWorld();
  w.static_segments.push_back({{0.7, -2}, {0.7, 2}});
  w.static_segments.push_back({{-2, 0.7}, {0.7, 0.7}});
  w.static_segments.push_back({{-2, -0.7}, {0.7, -0.7}});
  return w;
}

TEST_CASE("CastScan analytic cases") {
  World w = EmptyWorld();
  const LaserScan empty = CastScan(w, Pose2(), 64, 1.5 * M_PI, 10.0, 0.0);
  REQUIRE(empty.ranges.size() == 64);
  for (double r : empty.ranges) CHECK(r == 10.0);

  w.static_segments.push_back({{2, -5}, {2, 5}});
  const LaserScan wall = CastScan(w, Pose2(), 3, M_PI, 10.0, 0.0);
  CHECK(wall.BeamAngle(1) == doctest::Approx(0.0));
  CHECK(wall.ranges[1] == doctest::Approx(2.0));

  World disc = EmptyWorld();
  disc.static_circles.push_back({{3, 0}, 1.0});
  const LaserScan d = CastScan(disc, Pose2(), 3, M_PI, 10.0, 0.0);
  const auto oracle = testing::RayCircle({0, 0}, {1, 0}, {3, 0}, 1.0);
  REQUIRE(oracle);
  CHECK(d.ranges[1] == doctest::Approx(*oracle));
  CHECK(d.ranges[1] == doctest::Approx(2.0));
}

TEST_CASE("CastScan matches ray-circle intersection for every beam") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    World w = EmptyWorld();
    const Circle c{{UniformReal(rng, -5, 5), UniformReal(rng, -5, 5)}, UniformReal(rng, 0.2, 1.5)};
    w.static_circles.push_back(c);
    const Pose2 pose(UniformReal(rng, -5, 5), UniformReal(rng, -5, 5), UniformReal(rng, -M_PI, M_PI));
    if (Distance(pose.position(), c.center) <= c.radius) continue;
    const LaserScan s = CastScan(w, pose, 64, 1.5 * M_PI, 10.0, 0.0);
    for (size_t k = 0; k < 64; ++k) {
      const double a = pose.theta + s.BeamAngle(k);
      const auto hit = testing::RayCircle(pose.position(), {std::cos(a), std::sin(a)}, c.center, c.radius);
      const double expect = hit && *hit < 10.0 ? *hit : 10.0;
      CHECK(s.ranges[k] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("CastScan ranges stay in (0, max_range]") {
  Rng rng(22);
  for (ScenarioId id : kAllScenarios) {
    const Scenario sc = BuildScenario(id);
    for (int k = 0; k < 50; ++k) {
      const Pose2 p(UniformReal(rng, sc.world.bounds.min.x, sc.world.bounds.max.x),
                    UniformReal(rng, sc.world.bounds.min.y, sc.world.bounds.max.y),
                    UniformReal(rng, -M_PI, M_PI));
      const LaserScan s = CastScan(sc.world, p, LidarConfig{}, UniformReal(rng, 0, 30));
      for (double r : s.ranges) {
        CHECK(r > 0.0);
        CHECK(r <= s.max_range);
      }
    }
  }
}

TEST_CASE("StepRobot") {
  const RobotState a = StepRobot({}, 1.0, 0.0, 0.1);
  CHECK(a.pose.x == doctest::Approx(0.1));
  CHECK(a.pose.y == 0.0);
  CHECK(a.pose.theta == 0.0);

  const RobotState b = StepRobot({}, 0.0, M_PI, 1.0);
  CHECK(b.pose.theta == doctest::Approx(M_PI));

  RobotState c;
  for (int k = 0; k < 100; ++k) c = StepRobot(c, 1.0, 1.0, 0.01);
  CHECK(std::hypot(c.pose.x - std::sin(1.0), c.pose.y - (1.0 - std::cos(1.0))) < 0.02);

  const RobotState clamped = StepRobot({}, 5.0, -9.0, 0.1, RobotLimits{1.0, 2.0});
  CHECK(clamped.v == 1.0);
  CHECK(clamped.omega == -2.0);
  CHECK(ErrorOf([] { StepRobot({}, 1, 0, 0.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("CheckCollision") {
  World w = EmptyWorld();
  CHECK_FALSE(CheckCollision(w, Pose2(), 0.25, 0.0));
  w.agents.push_back({{{1, 0}, {1, 0}}, 0.0, 0.25, 0.0, true});
  CHECK(CheckCollision(w, Pose2(1, 0, 0), 0.25, 0.0));
  CHECK_FALSE(CheckCollision(w, Pose2(0.5, 0, 0), 0.25, 0.0));
  CHECK(CheckCollision(w, Pose2(0.5 + 1e-9, 0, 0), 0.25, 0.0));
  CHECK(FindContact(w, {1, 0.1}, 0.25, 0).kind == ContactKind::kAgent);
  w.static_circles.push_back({{-3, 0}, 0.5});
  CHECK(FindContact(w, {-2.4, 0}, 0.25, 0).kind == ContactKind::kStatic);
}

TEST_CASE("DynamicAgent motion") {
  const DynamicAgent loop{{{0, 0}, {2, 0}}, 1.0, 0.25, 0.0, true};
  CHECK(loop.PositionAt(1.0).x == doctest::Approx(1.0));
  CHECK(loop.PositionAt(3.0).x == doctest::Approx(1.0));  // on the way back
  CHECK(loop.PositionAt(4.0).x == doctest::Approx(0.0).epsilon(1e-12));
  const DynamicAgent once{{{0, 0}, {2, 0}}, 1.0, 0.25, -1.0, false};
  CHECK(once.PositionAt(0.5).x == 0.0);  // still waiting
  CHECK(once.PositionAt(2.0).x == doctest::Approx(1.0));
  CHECK(once.PositionAt(100.0).x == doctest::Approx(2.0));
}

TEST_CASE("Scenario construction") {
  const double robot_radius = TeleopConfig{}.robot_radius;
  {
    const Scenario s = BuildScenario(ScenarioId::kOpenSpace);
    CHECK(s.world.agents.size() == 1);
    const Vec2 a = s.start.position(), b = s.goal;
    for (int k = 0; k <= 1000; ++k) {
      const Vec2 p = a + (b - a) * (k / 1000.0);
      CHECK_FALSE(CheckCollision(s.world, Pose2(p.x, p.y, 0), robot_radius, 0.0));
    }
  }
  {
    const Scenario s = BuildScenario(ScenarioId::kGlassCorridor);
    CHECK(s.world.static_circles.size() >= 2);
    CHECK(s.world.agents.size() == 2);
  }
  {
    const Scenario s = BuildScenario(ScenarioId::kNarrowPassage);
    // Measure the passage with vertical rays from its middle.
    World statics = s.world;
    statics.agents.clear();
    const double up = CastScan(statics, Pose2(6.0, 0, M_PI / 2), 1, 0.1, 10.0, 0).ranges[0];
    const double down = CastScan(statics, Pose2(6.0, 0, -M_PI / 2), 1, 0.1, 10.0, 0).ranges[0];
    const double robot_width = 2 * robot_radius;
    const double lateral_clearance = (up + down) - robot_width;
    CHECK(up + down == doctest::Approx(ScenarioOptions{}.passage_width));
    CHECK(lateral_clearance < 2 * robot_width);
  }
}

TEST_CASE("Scenario construction is deterministic") {
  for (ScenarioId id : kAllScenarios) {
    const Scenario a = BuildScenario(id), b = BuildScenario(id);
    CHECK(a.start == b.start);
    CHECK(a.goal == b.goal);
    REQUIRE(a.world.static_segments.size() == b.world.static_segments.size());
    REQUIRE(a.world.static_circles.size() == b.world.static_circles.size());
    REQUIRE(a.world.agents.size() == b.world.agents.size());
    for (double t : {0.0, 3.3, 17.0}) {
      CHECK(CastScan(a.world, a.start, LidarConfig{}, t) ==
            CastScan(b.world, b.start, LidarConfig{}, t));
    }
    CHECK(ParseScenario(ScenarioName(id)) == id);
  }
  CHECK(ErrorOf([] { ParseScenario("mall"); }) == ErrorCode::kParseError);
}

TEST_CASE("World validation") {
  World w = EmptyWorld();
  w.static_circles.push_back({{0, 0}, 0.0});
  CHECK(ErrorOf([&] { w.Validate(); }) == ErrorCode::kInvalidArgument);
  World flat;
  CHECK(ErrorOf([&] { flat.Validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Noiseless teleop in an empty world drives a straight line") {
  Rng rng(1);
  TeleopConfig cfg;
  cfg.lidar.max_range = 10.0;
  const Vec2 goal{8, 6};
  const Pose2 start(0, 0, std::atan2(6.0, 8.0));
  const TeleopEpisode ep = TeleopSurrogate(EmptyWorld(), start, goal, TeleopNoise{}, cfg, rng);
  CHECK(ep.reached_goal);
  REQUIRE_FALSE(ep.samples.empty());
  const Vec2 dir{0.8, 0.6};
  for (const Pose2& p : ep.poses) CHECK(std::abs(dir.Cross(p.position())) < 1e-6);
  for (const TeleopSample& s : ep.samples) {
    REQUIRE(s.executed.size() == cfg.horizon);
    for (const Pose2& w : s.executed.waypoints) CHECK(std::abs(w.y) < 1e-6);
  }
}

TEST_CASE("Teleop is deterministic for a seed") {
  const Scenario sc = BuildScenario(ScenarioId::kGlassCorridor);
  const TeleopNoise noise{0.1, 0.3, 5, 0.5};
  Rng a(9), b(9), c(10);
  const TeleopEpisode ea = TeleopSurrogate(sc.world, sc.start, sc.goal, noise, {}, a);
  const TeleopEpisode eb = TeleopSurrogate(sc.world, sc.start, sc.goal, noise, {}, b);
  const TeleopEpisode ec = TeleopSurrogate(sc.world, sc.start, sc.goal, noise, {}, c);
  REQUIRE(ea.samples.size() == eb.samples.size());
  CHECK(ea.poses == eb.poses);
  for (size_t k = 0; k < ea.samples.size(); ++k) {
    CHECK(ea.samples[k].executed == eb.samples[k].executed);
    CHECK(ea.samples[k].frame.scan == eb.samples[k].frame.scan);
    CHECK(ea.samples[k].frame.observation_id == eb.samples[k].frame.observation_id);
  }
  CHECK_FALSE(ea.poses == ec.poses);
}

double MeanSampleClearance(const TeleopEpisode& ep) {
  double sum = 0.0;
  for (const TeleopSample& s : ep.samples)
    sum += MinClearance(s.executed, ScanToPoints(s.frame.scan), 0.05);
  return sum / static_cast<double>(ep.samples.size());
}

TEST_CASE("Noisy lagged teleop keeps less clearance on the glass corridor") {
  const Scenario sc = BuildScenario(ScenarioId::kGlassCorridor);
  Rng quiet(1);
  const double clean = MeanSampleClearance(
      TeleopSurrogate(sc.world, sc.start, sc.goal, TeleopNoise{}, {}, quiet));
  double noisy = 0.0;
  const int runs = 5;
  for (int s = 0; s < runs; ++s) {
    Rng rng(100 + s);
    noisy += MeanSampleClearance(TeleopSurrogate(
        sc.world, sc.start, sc.goal, TeleopNoise{0.0, 0.2, 3, 0.5}, {}, rng));
  }
  CHECK(noisy / runs < clean);
}

TEST_CASE("Noiseless teleop never collides in open space") {
  const Scenario sc = BuildScenario(ScenarioId::kOpenSpace);
  const TeleopConfig cfg;
  for (double dx : {-0.3, 0.0, 0.3}) {
    for (double dy : {-0.3, 0.0, 0.3}) {
      for (double dth : {-0.3, 0.0, 0.3}) {
        Rng rng(0);
        const Pose2 start(sc.start.x + dx, sc.start.y + dy, sc.start.theta + dth);
        const TeleopEpisode ep = TeleopSurrogate(sc.world, start, sc.goal, TeleopNoise{}, cfg, rng);
        CHECK(ep.reached_goal);
        CHECK_FALSE(ep.crashed);
        CHECK_FALSE(ep.agent_contact);
        for (size_t k = 0; k < ep.poses.size(); ++k)
          CHECK_FALSE(CheckCollision(sc.world, ep.poses[k], cfg.robot_radius, k * cfg.control_dt));
      }
    }
  }
}

TEST_CASE("Teleop flags an unreachable goal as truncated but keeps samples") {
  World w = EmptyWorld();
  // Goal sealed inside a box.
  w.static_segments.push_back({{4, -1}, {6, -1}});
  w.static_segments.push_back({{6, -1}, {6, 1}});
  w.static_segments.push_back({{6, 1}, {4, 1}});
  w.static_segments.push_back({{4, 1}, {4, -1}});
  TeleopConfig cfg;
  cfg.time_budget = 20.0;
  Rng rng(2);
  const TeleopEpisode ep = TeleopSurrogate(w, Pose2(), {5, 0}, TeleopNoise{}, cfg, rng);
  CHECK_FALSE(ep.reached_goal);
  CHECK((ep.truncated || ep.crashed));
  CHECK_FALSE(ep.samples.empty());
}

CandidateSet FourCandidates(const std::vector<Trajectory>& t) {
  CandidateSet cs;
  cs.observation_id = "o";
  const CandidateKind kinds[] = {CandidateKind::kDataset, CandidateKind::kRotatedCcw,
                                 CandidateKind::kRotatedCw, CandidateKind::kStop};
  for (size_t k = 0; k < t.size(); ++k) cs.candidates.push_back({kinds[k], t[k]});
  return cs;
}

TEST_CASE("Oracle prefers the candidate that does not collide") {
  World w = EmptyWorld();
  w.static_circles.push_back({{1.5, 0}, 0.3});
  const Trajectory straight = testing::StraightPath(8, 0.25);
  const Trajectory left = RotateTrajectory(straight, 0.7);
  const CandidateSet cs = FourCandidates({straight, left});
  CHECK(OraclePrefer(cs, 0, 1, w, Pose2(), {5, 0}, 0.0) == 0);
  CHECK(OraclePrefer(cs, 1, 0, w, Pose2(), {5, 0}, 0.0) == 1);
  const CandidateSet same = FourCandidates({left, left});
  CHECK(OraclePrefer(same, 0, 1, w, Pose2(), {5, 0}, 0.0) == 1);
}

TEST_CASE("Oracle preferences are antisymmetric") {
  Rng rng(31);
  const Scenario sc = BuildScenario(ScenarioId::kGlassCorridor);
  for (int k = 0; k < 100; ++k) {
    GenConfig gen;
    gen.rng_seed = k;
    const CandidateSet cs = GenerateCandidates(
        "o" + std::to_string(k), testing::RandomForwardPath(rng, 8), StopRequest{}, gen);
    const Pose2 pose(UniformReal(rng, 0, 12), UniformReal(rng, -0.5, 0.8), UniformReal(rng, -0.5, 0.5));
    const Vec2 goal = ToFrame(Pose2(sc.goal.x, sc.goal.y, 0), pose).position();
    const auto scores = OracleScores(cs, sc.world, pose, goal, 2.0);
    for (auto [i, j] : AllPairs(4)) {
      const int y = OraclePrefer(cs, i, j, sc.world, pose, goal, 2.0);
      CHECK(y == PreferFromScores(scores[i], scores[j], i, j));
      if (scores[i] != scores[j])
        CHECK(y == 1 - OraclePrefer(cs, j, i, sc.world, pose, goal, 2.0));
    }
  }
}

TEST_CASE("Boxed in, the oracle picks stop in every pair") {
  const World w = BoxedIn();
  GenConfig gen;
  const CandidateSet cs = GenerateCandidates("boxed", testing::StraightPath(8, 0.25),
                                             StopRequest{}, gen);
  const auto scores = OracleScores(cs, w, Pose2(), {5, 0}, 0.0);
  for (size_t k = 0; k < 3; ++k) CHECK(std::isinf(scores[k]));
  CHECK(std::isfinite(scores[3]));
  for (auto [i, j] : AllPairs(4)) {
    if (j != 3) continue;
    CHECK(OraclePrefer(cs, i, j, w, Pose2(), {5, 0}, 0.0) == 0);
    CHECK(OraclePrefer(cs, j, i, w, Pose2(), {5, 0}, 0.0) == 1);
  }
}

}  // namespace
}  // namespace cfnav
