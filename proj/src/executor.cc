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

#include "cfnav/executor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cfnav/error.h"
#include "cfnav/metrics.h"

namespace cfnav {

PathSource PolicyPathSource(PolicyParams params) {
  return [params = std::move(params)](
             const SensorFrame& frame) -> std::optional<Trajectory> {
    return Predict(params, EncodeFeatures(frame, params.config));
  };
}

std::optional<PathMsg> ModelRunner::Tick(const SensorFrame& frame,
                                         const Pose2& odom, double stamp) {
  std::optional<Trajectory> path;
  try {
    path = source_(frame);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!path || path->empty() || !path->IsFinite()) return std::nullopt;
  PathMsg msg;
  msg.waypoints = std::move(*path);
  msg.waypoints.frame = FrameTag::kEgoStart;
  msg.start_pose = odom;
  msg.stamp = stamp;
  msg.seq = ++seq_;
  return msg;
}

std::optional<PathMsg> ModelRunnerTick(const PolicyParams& policy,
                                       const SensorFrame& frame,
                                       const Pose2& odom, uint64_t seq,
                                       double stamp) {
  try {
    PathMsg msg;
    msg.waypoints = Predict(policy, EncodeFeatures(frame, policy.config));
    if (!msg.waypoints.IsFinite()) return std::nullopt;
    msg.start_pose = odom;
    msg.stamp = stamp;
    msg.seq = seq + 1;
    return msg;
  } catch (const Error&) {
    return std::nullopt;
  }
}

void PathManager::AcceptNewPath(const PathMsg& msg) {
  ActivePath next;
  next.source_seq = msg.seq;
  next.remaining.reserve(msg.waypoints.size());
  for (const Pose2& wp : msg.waypoints.waypoints)
    next.remaining.push_back(FromFrame(wp, msg.start_pose));
  std::lock_guard lock(mu_);
  if (msg.seq <= path_.source_seq)
    throw Error(ErrorCode::kRejectedStale,
                "path seq " + std::to_string(msg.seq) +
                    " is not newer than active seq " +
                    std::to_string(path_.source_seq));
  path_ = std::move(next);
}

std::optional<Pose2> PathManager::Update(const Pose2& odom,
                                         double prune_radius) {
  if (!(prune_radius > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "prune_radius must be > 0");
  std::lock_guard lock(mu_);
  auto& wps = path_.remaining;
  auto first_kept = std::find_if(wps.begin(), wps.end(), [&](const Pose2& wp) {
    const Pose2 local = ToFrame(wp, odom);
    const bool near = std::hypot(local.x, local.y) < prune_radius;
    const bool behind = local.x < 0.0;
    return !(near || behind);
  });
  wps.erase(wps.begin(), first_kept);
  if (wps.empty()) return std::nullopt;
  return wps.front();
}

ActivePath PathManager::active() const {
  std::lock_guard lock(mu_);
  return path_;
}

VelocityCmd PlannerTick(const Pose2& target, const Pose2& odom,
                        const PlannerGains& gains, const RobotLimits& limits,
                        double goal_tol) {
  const double dx = target.x - odom.x;
  const double dy = target.y - odom.y;
  const double dist = std::hypot(dx, dy);
  if (dist <= goal_tol) return {};
  const double err = NormalizeAngle(std::atan2(dy, dx) - odom.theta);
  VelocityCmd cmd;
  cmd.omega = std::clamp(gains.k_omega * err, -limits.omega_max,
                         limits.omega_max);
  cmd.v = std::clamp(gains.k_v * dist, 0.0, limits.v_max) *
          std::max(0.0, std::cos(err));
  return cmd;
}

EpisodeLog RunEpisode(const Scenario& scenario, const PathSource& policy,
                      const EpisodeConfig& cfg,
                      const std::string& policy_name) {
  EpisodeLog log;
  log.scenario = std::string(ScenarioName(scenario.id));
  log.policy = policy_name;
  log.seed = cfg.seed;
  log.config = cfg;
  log.goal = scenario.goal;

  World world = scenario.world;
  RobotState state;
  state.pose = Pose2(scenario.start.x + cfg.start_jitter.x,
                     scenario.start.y + cfg.start_jitter.y,
                     scenario.start.theta + cfg.start_jitter.theta);
  log.start = state.pose;
  log.planned_arclen = Distance(state.pose.position(), scenario.goal);

  ModelRunner runner(policy);
  PathManager manager;
  std::optional<PathMsg> pending;
  double pending_due = 0.0;
  double next_fire = 0.0;
  double min_clearance = std::numeric_limits<double>::infinity();

  const double dt = cfg.control_dt;
  const auto budget = static_cast<size_t>(std::llround(cfg.time_budget / dt));
  for (size_t tick = 0; tick < budget; ++tick) {
    const double t = static_cast<double>(tick) * dt;
    const Pose2 odom = state.pose;

    if (pending && t + 1e-9 >= pending_due) {
      manager.AcceptNewPath(*pending);
      log.paths.push_back(*pending);
      pending.reset();
    }
    const LaserScan scan = CastScan(world, odom, cfg.lidar, t);
    for (double r : scan.ranges) min_clearance = std::min(min_clearance, r);
    if (!pending && t + 1e-9 >= next_fire) {
      SensorFrame frame;
      frame.observation_id = log.scenario + "/tick" + std::to_string(tick);
      frame.scan = scan;
      frame.goal = Transform2::FromPose(odom).Inverse().ApplyRotation(
          scenario.goal - odom.position());
      frame.stamp = t;
      if (auto msg = runner.Tick(frame, odom, t)) {
        pending = std::move(msg);
        pending_due = t + cfg.runner_latency;
        if (cfg.runner_latency <= 0.0) {
          manager.AcceptNewPath(*pending);
          log.paths.push_back(*pending);
          pending.reset();
        }
      }
      next_fire = t + cfg.runner_period;
    }

    TickRow row;
    row.t = t;
    row.pose = odom;
    row.target = manager.Update(odom, cfg.prune_radius);
    row.source_seq = manager.active().source_seq;
    if (row.target)
      row.cmd = PlannerTick(*row.target, odom, cfg.gains, cfg.limits,
                            cfg.waypoint_tolerance);

    const RobotState next = StepRobot(state, row.cmd.v, row.cmd.omega, dt,
                                      cfg.limits);
    log.executed_arclen += Distance(state.pose.position(), next.pose.position());
    state = next;

    const Contact contact =
        FindContact(world, state.pose.position(), cfg.robot_radius, t + dt);
    if (contact.kind != ContactKind::kNone) {
      row.collision = true;
      ++log.collisions;
      if (contact.kind == ContactKind::kAgent) {
        world.agents.erase(world.agents.begin() +
                           static_cast<std::ptrdiff_t>(contact.agent_index));
      } else {
        log.collided_terminated = true;
      }
    }
    log.rows.push_back(std::move(row));
    log.duration = t + dt;
    if (log.collided_terminated) break;
    if (Distance(state.pose.position(), scenario.goal) < cfg.goal_tolerance) {
      log.success = true;
      break;
    }
  }

  log.goal_progress = std::max(
      0.0, log.planned_arclen - Distance(state.pose.position(), scenario.goal));
  log.min_clearance = std::isfinite(min_clearance) ? min_clearance
                                                   : cfg.lidar.max_range;
  log.path_completion = PathCompletion(log.goal_progress, log.planned_arclen,
                                       log.success, log.collided_terminated);
  return log;
}

EpisodeSummary Summarize(const EpisodeLog& log) {
  EpisodeSummary s;
  s.success = log.success;
  s.min_clearance = log.min_clearance;
  s.collisions = log.collisions;
  s.path_completion = log.path_completion;
  return s;
}

}  // namespace cfnav
