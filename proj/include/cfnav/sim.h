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

#ifndef CFNAV_SIM_H_
#define CFNAV_SIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfnav/counterfactual.h"
#include "cfnav/geometry.h"
#include "cfnav/metrics.h"
#include "cfnav/random.h"

namespace cfnav {

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

struct Rect {
  Vec2 min;
  Vec2 max;
  bool Contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

// Constant-speed walker along a waypoint polyline. A negative phase delays
// the start (the agent waits at its first waypoint). Non-looping agents stop
// at their last waypoint.
struct DynamicAgent {
  std::vector<Vec2> waypoints;
  double speed = 0.0;   // m/s
  double radius = 0.25;  // m
  double phase = 0.0;   // s
  bool loop = true;

  Vec2 PositionAt(double t) const;
};

struct World {
  std::vector<Segment> static_segments;
  std::vector<Circle> static_circles;
  std::vector<DynamicAgent> agents;
  Rect bounds;

  void Validate() const;
};

enum class ScenarioId { kOpenSpace, kGlassCorridor, kNarrowPassage };

struct RobotLimits {
  double v_max = 1.0;       // m/s
  double omega_max = M_PI;  // rad/s
};

struct RobotState {
  Pose2 pose;
  double v = 0.0;
  double omega = 0.0;
};

struct LidarConfig {
  size_t n_beams = 64;
  double fov = 1.5 * M_PI;  // 270 deg
  double max_range = 10.0;
};

struct SensorFrame {
  std::string observation_id;
  LaserScan scan;
  Vec2 goal;  // relative to the robot, in the robot frame
  double stamp = 0.0;
};

// One row of the observation dataset: what the robot saw, where it was, and
// the path the (noisy) driver actually executed next.
struct Observation {
  SensorFrame frame;
  Trajectory executed;
  ScenarioId scenario = ScenarioId::kOpenSpace;
  Pose2 pose;  // world frame at frame.stamp
};

// Ray cast against segments, circles and agent discs (at time t).
LaserScan CastScan(const World& world, const Pose2& pose, size_t n_beams,
                   double fov, double max_range, double t);
LaserScan CastScan(const World& world, const Pose2& pose,
                   const LidarConfig& lidar, double t);

// Unicycle Euler step with command clamping.
RobotState StepRobot(const RobotState& state, double v, double omega,
                     double dt, const RobotLimits& limits = {});

enum class ContactKind { kNone, kStatic, kAgent };

struct Contact {
  ContactKind kind = ContactKind::kNone;
  size_t agent_index = 0;
};

// Strict overlap: touching at exactly the sum of radii is not a collision.
bool CheckCollision(const World& world, const Pose2& pose, double robot_radius,
                    double t);
Contact FindContact(const World& world, const Vec2& position,
                    double robot_radius, double t);

// Clearance from a position to the nearest obstacle surface at time t.
double DistanceToObstacles(const World& world, const Vec2& position, double t);

std::string_view ScenarioName(ScenarioId id);
ScenarioId ParseScenario(std::string_view name);
inline constexpr ScenarioId kAllScenarios[] = {
    ScenarioId::kOpenSpace, ScenarioId::kGlassCorridor,
    ScenarioId::kNarrowPassage};

struct ScenarioOptions {
  double passage_width = 1.2;  // m, narrow_passage only
};

struct Scenario {
  ScenarioId id = ScenarioId::kOpenSpace;
  World world;
  Pose2 start;
  Vec2 goal;
};

Scenario BuildScenario(ScenarioId id, const ScenarioOptions& options = {});

struct TeleopNoise {
  double sigma_v = 0.0;      // m/s, stationary std of the speed error
  double sigma_omega = 0.0;  // rad/s, stationary std of the turn-rate error
  size_t lag_ticks = 0;      // commands reach the robot this many ticks late
  double correlation_time = 0.5;  // s, joystick errors drift slowly
};

struct TeleopConfig {
  double control_dt = 0.05;     // s
  double sample_period = 0.5;   // s between recorded observations
  double waypoint_dt = 0.25;    // s between consecutive future waypoints
  size_t horizon = 8;           // N
  double cruise_speed = 0.8;    // m/s
  double heading_gain = 0.5;
  double repulsion_gain = 0.08;
  double influence_radius = 1.2;  // m
  double lookahead = 2.5;         // m, sidestep corridor length
  double corridor_half_width = 0.6;  // m
  double sidestep_gain = 1.5;
  double goal_tolerance = 0.2;  // m
  double time_budget = 60.0;    // s
  double robot_radius = 0.25;
  LidarConfig lidar;
  RobotLimits limits;
};

struct TeleopSample {
  SensorFrame frame;
  Pose2 pose;             // robot pose in the world at the sample instant
  Trajectory executed;    // next N poses in the ego frame
};

struct TeleopEpisode {
  std::vector<TeleopSample> samples;
  std::vector<Pose2> poses;  // every control tick
  bool truncated = false;
  bool reached_goal = false;
  bool crashed = false;        // ended on contact with static geometry
  bool agent_contact = false;
};

// Noisy, lagged goal-seeking driver with potential-field avoidance. Produces
// the imperfect demonstrations used as dataset trajectories. `id_prefix`
// namespaces the observation ids.
TeleopEpisode TeleopSurrogate(const World& world, const Pose2& start,
                              const Vec2& goal, const TeleopNoise& noise,
                              const TeleopConfig& cfg, Rng& rng,
                              const std::string& id_prefix = "obs");

struct OracleConfig {
  double progress_weight = 0.5;  // lambda
  double robot_radius = 0.25;
  double interp_step = 0.05;
  LidarConfig lidar;
};

// Per-candidate oracle score; -infinity when the path collides.
double OracleScore(const Trajectory& candidate, const World& world,
                   const Pose2& robot_pose, const Vec2& goal_ego, double t,
                   const OracleConfig& cfg = {});

// Scores every candidate of the set with a single scan.
std::vector<double> OracleScores(const CandidateSet& cs, const World& world,
                                 const Pose2& robot_pose, const Vec2& goal_ego,
                                 double t, const OracleConfig& cfg = {});

// Preference between two already-computed scores (ties favor lower index).
int PreferFromScores(double score_i, double score_j, size_t i, size_t j);

// y = 1 iff candidate i scores higher than j; exact ties favor the lower
// index.
int OraclePrefer(const CandidateSet& cs, size_t i, size_t j,
                 const World& world, const Pose2& robot_pose,
                 const Vec2& goal_ego, double t,
                 const OracleConfig& cfg = {});

}  // namespace cfnav

#endif  // CFNAV_SIM_H_
