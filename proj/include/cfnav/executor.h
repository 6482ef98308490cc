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

#ifndef CFNAV_EXECUTOR_H_
#define CFNAV_EXECUTOR_H_

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cfnav/geometry.h"
#include "cfnav/policy.h"
#include "cfnav/sim.h"

namespace cfnav {

// /path + /started: an ego-frame path and the odometry pose it was planned
// from.
struct PathMsg {
  Trajectory waypoints;  // ego_start frame
  Pose2 start_pose;      // odom frame at planning time
  double stamp = 0.0;
  uint64_t seq = 0;
};

struct ActivePath {
  std::vector<Pose2> remaining;  // odom frame
  uint64_t source_seq = 0;
};

struct VelocityCmd {
  double v = 0.0;
  double omega = 0.0;
  bool operator==(const VelocityCmd&) const = default;
};

// Anything that maps an observation to an ego-frame path. Returning nullopt
// (or throwing) counts as an inference failure.
using PathSource = std::function<std::optional<Trajectory>(const SensorFrame&)>;

PathSource PolicyPathSource(PolicyParams params);

// Runs inference and stamps the result. A failed inference publishes nothing
// and does not consume a sequence number.
class ModelRunner {
 public:
  explicit ModelRunner(PathSource source) : source_(std::move(source)) {}

  std::optional<PathMsg> Tick(const SensorFrame& frame, const Pose2& odom,
                              double stamp);
  uint64_t last_seq() const { return seq_; }

 private:
  PathSource source_;
  uint64_t seq_ = 0;
};

// Single-shot form: publishes predict(policy, encode(frame)) with seq + 1.
std::optional<PathMsg> ModelRunnerTick(const PolicyParams& policy,
                                       const SensorFrame& frame,
                                       const Pose2& odom, uint64_t seq,
                                       double stamp = 0.0);

// Holds the only mutable path state. AcceptNewPath swaps the active path
// atomically with respect to Update.
class PathManager {
 public:
  // Throws kRejectedStale when msg.seq is not newer than the active path.
  void AcceptNewPath(const PathMsg& msg);

  // Prunes leading waypoints that are within prune_radius of the robot or
  // behind it, then returns the first remaining one (nullopt when done).
  std::optional<Pose2> Update(const Pose2& odom, double prune_radius);

  ActivePath active() const;

 private:
  mutable std::mutex mu_;
  ActivePath path_;
};

struct PlannerGains {
  double k_v = 2.0;
  double k_omega = 2.0;
};

VelocityCmd PlannerTick(const Pose2& target, const Pose2& odom,
                        const PlannerGains& gains, const RobotLimits& limits,
                        double goal_tol);

struct EpisodeConfig {
  double control_dt = 0.05;      // 20 Hz
  double runner_period = 0.5;    // s
  double runner_latency = 0.0;   // s from sensing to publication
  double prune_radius = 0.25;    // m
  double goal_tolerance = 0.2;   // m
  double waypoint_tolerance = 0.05;  // m, planner stop radius
  double time_budget = 60.0;     // s
  double robot_radius = 0.25;    // m
  LidarConfig lidar;
  RobotLimits limits;
  PlannerGains gains;
  Pose2 start_jitter;            // added to the scenario start pose
  uint64_t seed = 0;
};

struct TickRow {
  double t = 0.0;
  Pose2 pose;  // at the time the command was computed
  VelocityCmd cmd;
  std::optional<Pose2> target;
  uint64_t source_seq = 0;
  bool collision = false;
};

struct EpisodeLog {
  std::string scenario;
  std::string policy;
  uint64_t seed = 0;
  EpisodeConfig config;
  Pose2 start;
  Vec2 goal;
  std::vector<TickRow> rows;
  std::vector<PathMsg> paths;  // every accepted path, in order
  bool success = false;
  int collisions = 0;
  bool collided_terminated = false;
  double executed_arclen = 0.0;   // odometer
  double goal_progress = 0.0;     // straight-line progress toward the goal
  double planned_arclen = 0.0;    // straight-line start-goal distance
  double min_clearance = 0.0;     // smallest lidar return over the run
  double path_completion = 0.0;
  double duration = 0.0;
};

// Simulated-clock plan-execute loop: runner at its own period and latency,
// path manager and planner at the control rate. Agent contacts are counted,
// the agent is removed and the run continues; static contact ends the run.
EpisodeLog RunEpisode(const Scenario& scenario, const PathSource& policy,
                      const EpisodeConfig& cfg,
                      const std::string& policy_name = "policy");

EpisodeSummary Summarize(const EpisodeLog& log);

}  // namespace cfnav

#endif  // CFNAV_EXECUTOR_H_
