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

#include "cfnav/sim.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "cfnav/error.h"

namespace cfnav {
namespace {

constexpr double kMinRange = 1e-6;

double RaySegment(const Vec2& origin, const Vec2& dir, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double denom = dir.Cross(e);
  if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::infinity();
  const Vec2 ao = seg.a - origin;
  const double s = ao.Cross(e) / denom;
  const double u = ao.Cross(dir) / denom;
  if (s <= 0.0 || u < 0.0 || u > 1.0)
    return std::numeric_limits<double>::infinity();
  return s;
}

double RayCircle(const Vec2& origin, const Vec2& dir, const Vec2& center,
                 double radius) {
  const Vec2 f = origin - center;
  const double b = f.Dot(dir);
  const double c = f.Dot(f) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  const double near = -b - sq;
  if (near > 0.0) return near;
  const double far = -b + sq;
  if (far > 0.0) return far;
  return std::numeric_limits<double>::infinity();
}

double PointSegmentDistance(const Vec2& p, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double len_sq = e.Dot(e);
  double u = len_sq > 0.0 ? (p - seg.a).Dot(e) / len_sq : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return Distance(p, seg.a + e * u);
}

void AddWall(World& w, Vec2 a, Vec2 b) { w.static_segments.push_back({a, b}); }

void AddBox(World& w, Vec2 lo, Vec2 hi) {
  AddWall(w, {lo.x, lo.y}, {hi.x, lo.y});
  AddWall(w, {hi.x, lo.y}, {hi.x, hi.y});
  AddWall(w, {hi.x, hi.y}, {lo.x, hi.y});
  AddWall(w, {lo.x, hi.y}, {lo.x, lo.y});
}

void AddRoom(World& w, const Rect& r) { AddBox(w, r.min, r.max); }

}  // namespace

Vec2 DynamicAgent::PositionAt(double t) const {
  if (waypoints.empty()) return {};
  if (waypoints.size() == 1 || speed <= 0.0) return waypoints.front();
  double s = speed * std::max(0.0, t + phase);
  std::vector<double> seg_len;
  double total = 0.0;
  const size_t n = waypoints.size();
  const size_t segments = loop ? n : n - 1;
  for (size_t k = 0; k < segments; ++k) {
    seg_len.push_back(Distance(waypoints[k], waypoints[(k + 1) % n]));
    total += seg_len.back();
  }
  if (total <= 0.0) return waypoints.front();
  if (loop) {
    s = std::fmod(s, total);
  } else if (s >= total) {
    return waypoints.back();
  }
  for (size_t k = 0; k < segments; ++k) {
    if (s <= seg_len[k] || k + 1 == segments) {
      const double u = seg_len[k] > 0.0 ? std::min(1.0, s / seg_len[k]) : 0.0;
      const Vec2& a = waypoints[k];
      const Vec2& b = waypoints[(k + 1) % n];
      return a + (b - a) * u;
    }
    s -= seg_len[k];
  }
  return waypoints.back();
}

void World::Validate() const {
  for (const Circle& c : static_circles)
    if (!(c.radius > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "circle radius must be > 0");
  for (const DynamicAgent& a : agents)
    if (!(a.radius > 0.0) || a.speed < 0.0)
      throw Error(ErrorCode::kInvalidArgument, "invalid dynamic agent");
  if (!(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y))
    throw Error(ErrorCode::kInvalidArgument, "world bounds are degenerate");
}

LaserScan CastScan(const World& world, const Pose2& pose, size_t n_beams,
                   double fov, double max_range, double t) {
  if (n_beams < 1 || !(fov > 0.0) || fov > 2.0 * M_PI + 1e-12)
    throw Error(ErrorCode::kInvalidArgument, "invalid lidar configuration");
  LaserScan scan;
  scan.max_range = max_range;
  if (n_beams == 1) {
    scan.angle_min = 0.0;
    scan.angle_increment = 0.0;
  } else {
    const bool full_circle = fov >= 2.0 * M_PI - 1e-12;
    scan.angle_increment =
        fov / static_cast<double>(full_circle ? n_beams : n_beams - 1);
    scan.angle_min = -0.5 * fov;
  }
  std::vector<Vec2> agent_pos;
  for (const DynamicAgent& a : world.agents) agent_pos.push_back(a.PositionAt(t));

  const Vec2 origin = pose.position();
  scan.ranges.resize(n_beams);
  for (size_t k = 0; k < n_beams; ++k) {
    const double a = pose.theta + scan.BeamAngle(k);
    const Vec2 dir{std::cos(a), std::sin(a)};
    double best = max_range;
    for (const Segment& s : world.static_segments)
      best = std::min(best, RaySegment(origin, dir, s));
    for (const Circle& c : world.static_circles)
      best = std::min(best, RayCircle(origin, dir, c.center, c.radius));
    for (size_t i = 0; i < agent_pos.size(); ++i)
      best = std::min(best, RayCircle(origin, dir, agent_pos[i],
                                      world.agents[i].radius));
    scan.ranges[k] = std::clamp(best, kMinRange, max_range);
  }
  return scan;
}

LaserScan CastScan(const World& world, const Pose2& pose,
                   const LidarConfig& lidar, double t) {
  return CastScan(world, pose, lidar.n_beams, lidar.fov, lidar.max_range, t);
}

RobotState StepRobot(const RobotState& state, double v, double omega,
                     double dt, const RobotLimits& limits) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  RobotState next;
  next.v = std::clamp(v, -limits.v_max, limits.v_max);
  next.omega = std::clamp(omega, -limits.omega_max, limits.omega_max);
  const Pose2& p = state.pose;
  next.pose = Pose2(p.x + next.v * std::cos(p.theta) * dt,
                    p.y + next.v * std::sin(p.theta) * dt,
                    p.theta + next.omega * dt);
  return next;
}

Contact FindContact(const World& world, const Vec2& position,
                    double robot_radius, double t) {
  for (const Segment& s : world.static_segments)
    if (PointSegmentDistance(position, s) < robot_radius)
      return {ContactKind::kStatic, 0};
  for (const Circle& c : world.static_circles)
    if (Distance(position, c.center) < robot_radius + c.radius)
      return {ContactKind::kStatic, 0};
  for (size_t i = 0; i < world.agents.size(); ++i) {
    const DynamicAgent& a = world.agents[i];
    if (Distance(position, a.PositionAt(t)) < robot_radius + a.radius)
      return {ContactKind::kAgent, i};
  }
  return {};
}

bool CheckCollision(const World& world, const Pose2& pose, double robot_radius,
                    double t) {
  if (!(robot_radius > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "robot_radius must be > 0");
  return FindContact(world, pose.position(), robot_radius, t).kind !=
         ContactKind::kNone;
}

double DistanceToObstacles(const World& world, const Vec2& position,
                           double t) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : world.static_segments)
    best = std::min(best, PointSegmentDistance(position, s));
  for (const Circle& c : world.static_circles)
    best = std::min(best, Distance(position, c.center) - c.radius);
  for (const DynamicAgent& a : world.agents)
    best = std::min(best, Distance(position, a.PositionAt(t)) - a.radius);
  return best;
}

std::string_view ScenarioName(ScenarioId id) {
  switch (id) {
    case ScenarioId::kOpenSpace: return "open_space";
    case ScenarioId::kGlassCorridor: return "glass_corridor";
    case ScenarioId::kNarrowPassage: return "narrow_passage";
  }
  return "unknown";
}

ScenarioId ParseScenario(std::string_view name) {
  for (ScenarioId id : kAllScenarios)
    if (ScenarioName(id) == name) return id;
  throw Error(ErrorCode::kParseError,
              "unknown scenario '" + std::string(name) + "'");
}

Scenario BuildScenario(ScenarioId id, const ScenarioOptions& options) {
  Scenario sc;
  sc.id = id;
  World& w = sc.world;
  switch (id) {
    case ScenarioId::kOpenSpace: {
      // Open room, goal straight ahead, free space to the right, an exit
      // corridor to the left. One person walks from the goal toward the
      // robot.
      w.bounds = {{-2.0, -5.0}, {13.0, 5.0}};
      AddWall(w, {-2.0, -5.0}, {13.0, -5.0});
      AddWall(w, {13.0, -5.0}, {13.0, 5.0});
      AddWall(w, {-2.0, -5.0}, {-2.0, 5.0});
      AddWall(w, {-2.0, 5.0}, {3.0, 5.0});   // left wall, exit gap at x in [3, 5]
      AddWall(w, {5.0, 5.0}, {13.0, 5.0});
      AddWall(w, {3.0, 5.0}, {3.0, 3.0});
      AddWall(w, {5.0, 5.0}, {5.0, 3.0});
      w.static_circles.push_back({{6.5, 2.4}, 0.45});
      w.static_circles.push_back({{3.5, -2.6}, 0.35});
      w.static_circles.push_back({{8.5, -2.2}, 0.4});
      AddBox(w, {10.5, 2.5}, {12.0, 3.5});
      // Chairs and a bin scattered near the direct route.
      w.static_circles.push_back({{2.5, 0.75}, 0.3});
      w.static_circles.push_back({{5.0, -0.7}, 0.35});
      w.static_circles.push_back({{7.5, 0.7}, 0.3});
      w.agents.push_back({{{10.5, 0.15}, {-4.0, 0.15}}, 0.6, 0.25, 0.0, false});
      sc.start = Pose2(0.0, 0.0, 0.0);
      sc.goal = {10.0, 0.0};
      break;
    }
    case ScenarioId::kGlassCorridor: {
      // Glass wall on the left, a pillar row on the right, people walking
      // toward the robot along either side.
      w.bounds = {{-1.0, -2.2}, {14.0, 1.8}};
      AddWall(w, {-1.0, 1.6}, {14.0, 1.6});    // glass
      AddWall(w, {-1.0, -2.2}, {14.0, -2.2});  // wall behind pillars
      AddWall(w, {-1.0, -2.2}, {-1.0, 1.6});
      AddWall(w, {14.0, -2.2}, {14.0, 1.6});
      for (double x = 1.0; x < 13.0; x += 2.0)
        w.static_circles.push_back({{x, -1.0}, 0.3});
      w.agents.push_back({{{13.0, 0.85}, {-4.0, 0.85}}, 0.5, 0.25, 0.0, false});
      w.agents.push_back(
          {{{13.5, -0.55}, {-4.0, -0.55}}, 0.5, 0.25, -5.0, false});
      sc.start = Pose2(0.0, 0.0, 0.0);
      sc.goal = {12.0, 0.0};
      break;
    }
    case ScenarioId::kNarrowPassage: {
      // Passage between two desk rows; two people emerge from opposite
      // sides at the far end and walk toward the robot one after the other.
      const double half = 0.5 * options.passage_width;
      w.bounds = {{-1.0, -3.0}, {14.0, 3.0}};
      AddRoom(w, w.bounds);
      AddBox(w, {4.5, half}, {7.5, half + 0.8});
      AddBox(w, {4.5, -half - 0.8}, {7.5, -half});
      const double lane = 0.3 * half / 0.6;
      w.agents.push_back({{{11.0, 2.2}, {9.0, lane}, {3.5, lane}, {2.5, 2.2}},
                          0.5, 0.2, 0.0, false});
      w.agents.push_back(
          {{{11.0, -2.2}, {9.0, -lane}, {3.5, -lane}, {2.5, -2.2}},
           0.5, 0.2, -7.0, false});
      sc.start = Pose2(0.0, 0.0, 0.0);
      sc.goal = {11.5, 0.0};
      break;
    }
  }
  w.Validate();
  return sc;
}

// Lower bound on the goal-ward part of the steering force.
constexpr double kMinForwardPull = 0.3;
constexpr double kMinSpeedFraction = 0.3;

TeleopEpisode TeleopSurrogate(const World& world, const Pose2& start,
                              const Vec2& goal, const TeleopNoise& noise,
                              const TeleopConfig& cfg, Rng& rng,
                              const std::string& id_prefix) {
  TeleopEpisode ep;
  RobotState state;
  state.pose = start;
  const double dt = cfg.control_dt;
  const double decay = std::exp(-dt / std::max(noise.correlation_time, dt));
  const double drive = std::sqrt(1.0 - decay * decay);
  double noise_v = noise.sigma_v * Gaussian(rng);
  double noise_w = noise.sigma_omega * Gaussian(rng);
  std::deque<std::pair<double, double>> pipeline(noise.lag_ticks, {0.0, 0.0});

  std::vector<double> stamps;
  const size_t budget_ticks =
      static_cast<size_t>(std::llround(cfg.time_budget / dt));
  const size_t sample_every =
      std::max<size_t>(1, static_cast<size_t>(std::llround(cfg.sample_period / dt)));
  std::vector<size_t> sample_ticks;
  std::vector<SensorFrame> frames;

  ep.poses.push_back(state.pose);
  const size_t wp_ticks = std::max<size_t>(
      1, static_cast<size_t>(std::llround(cfg.waypoint_dt / dt)));
  // After arrival the operator drives through the goal for one horizon, so
  // the last recorded paths run past it instead of stopping short.
  size_t coast_ticks = 0;
  size_t tick = 0;
  for (; tick < budget_ticks; ++tick) {
    const double t = static_cast<double>(tick) * dt;
    const Pose2& p = state.pose;
    const Vec2 to_goal = goal - p.position();
    if (!ep.reached_goal && to_goal.Norm() < cfg.goal_tolerance) {
      ep.reached_goal = true;
      coast_ticks = cfg.horizon * wp_ticks;
    }
    if (ep.reached_goal) {
      if (coast_ticks == 0) break;
      --coast_ticks;
      state = StepRobot(state, cfg.cruise_speed, 0.0, dt, cfg.limits);
      ep.poses.push_back(state.pose);
      continue;
    }
    const LaserScan scan = CastScan(world, p, cfg.lidar, t);
    if (tick % sample_every == 0) {
      SensorFrame f;
      f.observation_id = id_prefix + "/t" + std::to_string(frames.size());
      f.scan = scan;
      const Transform2 to_ego = Transform2::FromPose(p).Inverse();
      f.goal = to_ego.ApplyRotation(to_goal);
      f.stamp = t;
      frames.push_back(std::move(f));
      sample_ticks.push_back(tick);
    }

    // Attraction toward the goal plus repulsion from nearby returns.
    Vec2 force = to_goal * (1.0 / to_goal.Norm());
    for (size_t k = 0; k < scan.ranges.size(); ++k) {
      const double r = scan.ranges[k];
      if (r >= cfg.influence_radius) continue;
      const double bearing = scan.BeamAngle(k);
      if (std::abs(bearing) > 0.5 * M_PI + 0.3) continue;
      const double a = p.theta + bearing;
      const double mag = cfg.repulsion_gain *
                         (1.0 / r - 1.0 / cfg.influence_radius) / (r * r) *
                         scan.angle_increment;
      force = force - Vec2{std::cos(a), std::sin(a)} * mag;
    }
    // Look-ahead sidestep: the closest return inside the swept corridor
    // pushes the robot sideways, harder the closer it is.
    const double reach = std::min(cfg.lookahead, to_goal.Norm());
    double nearest_ahead = reach;
    double nearest_side = 0.0;
    for (size_t k = 0; k < scan.ranges.size(); ++k) {
      const double r = scan.ranges[k];
      if (r >= reach) continue;
      const double b = scan.BeamAngle(k);
      const double ahead = r * std::cos(b);
      const double side = r * std::sin(b);
      if (ahead <= 0.0 || std::abs(side) > cfg.corridor_half_width) continue;
      if (ahead < nearest_ahead) {
        nearest_ahead = ahead;
        nearest_side = side;
      }
    }
    if (nearest_ahead < reach) {
      const double dir = nearest_side > 0.0 ? -1.0 : 1.0;
      const Vec2 left{-std::sin(p.theta), std::cos(p.theta)};
      force = force + left * (dir * cfg.sidestep_gain *
                              (1.0 - nearest_ahead / cfg.lookahead));
    }
    const Vec2 g = to_goal * (1.0 / to_goal.Norm());
    const double along = std::max(force.Dot(g), kMinForwardPull);
    const double across = g.Cross(force);
    force = g * along + Vec2{-g.y, g.x} * across;
    const double heading_err =
        NormalizeAngle(std::atan2(force.y, force.x) - p.theta);
    const double goal_err = NormalizeAngle(std::atan2(g.y, g.x) - p.theta);
    const double floor = kMinSpeedFraction * std::min(1.0, to_goal.Norm());
    double v = cfg.cruise_speed * std::max(floor, std::cos(goal_err));
    double w = cfg.heading_gain * heading_err;

    noise_v = decay * noise_v + drive * noise.sigma_v * Gaussian(rng);
    noise_w = decay * noise_w + drive * noise.sigma_omega * Gaussian(rng);
    pipeline.emplace_back(v + noise_v, w + noise_w);
    const auto [cmd_v, cmd_w] = pipeline.front();
    pipeline.pop_front();
    state = StepRobot(state, std::max(0.0, cmd_v), cmd_w, dt, cfg.limits);
    ep.poses.push_back(state.pose);
    const Contact contact =
        FindContact(world, state.pose.position(), cfg.robot_radius, t + dt);
    if (contact.kind == ContactKind::kStatic) {
      ep.crashed = true;
      break;
    }
    if (contact.kind == ContactKind::kAgent) ep.agent_contact = true;
  }
  ep.truncated = !ep.reached_goal;

  for (size_t s = 0; s < frames.size(); ++s) {
    const size_t base = sample_ticks[s];
    const Pose2 origin = ep.poses[base];
    TeleopSample sample;
    sample.frame = std::move(frames[s]);
    sample.pose = origin;
    sample.executed.frame = FrameTag::kEgoStart;
    for (size_t k = 1; k <= cfg.horizon; ++k) {
      const size_t idx = std::min(base + k * wp_ticks, ep.poses.size() - 1);
      sample.executed.waypoints.push_back(ToFrame(ep.poses[idx], origin));
    }
    ep.samples.push_back(std::move(sample));
  }
  return ep;
}

std::vector<double> OracleScores(const CandidateSet& cs, const World& world,
                                 const Pose2& robot_pose, const Vec2& goal_ego,
                                 double t, const OracleConfig& cfg) {
  const ObstacleCloud cloud =
      ScanToPoints(CastScan(world, robot_pose, cfg.lidar, t));
  const Transform2 to_world = Transform2::FromPose(robot_pose);
  const double start_dist = goal_ego.Norm();
  std::vector<double> scores;
  scores.reserve(cs.size());
  for (const Candidate& c : cs.candidates) {
    bool collides = false;
    for (const Vec2& p : Densify(c.trajectory, cfg.interp_step)) {
      if (FindContact(world, to_world.Apply(p), cfg.robot_radius, t).kind !=
          ContactKind::kNone) {
        collides = true;
        break;
      }
    }
    if (collides) {
      scores.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    const double clearance = MinClearance(c.trajectory, cloud, cfg.interp_step,
                                          cfg.lidar.max_range);
    const Vec2 end = c.trajectory.waypoints.back().position();
    const double progress = start_dist - Distance(end, goal_ego);
    scores.push_back(clearance + cfg.progress_weight * progress);
  }
  return scores;
}

double OracleScore(const Trajectory& candidate, const World& world,
                   const Pose2& robot_pose, const Vec2& goal_ego, double t,
                   const OracleConfig& cfg) {
  CandidateSet one;
  one.candidates.push_back({CandidateKind::kDataset, candidate});
  return OracleScores(one, world, robot_pose, goal_ego, t, cfg).front();
}

int PreferFromScores(double score_i, double score_j, size_t i, size_t j) {
  if (score_i > score_j) return 1;
  if (score_i < score_j) return 0;
  return i < j ? 1 : 0;
}

int OraclePrefer(const CandidateSet& cs, size_t i, size_t j,
                 const World& world, const Pose2& robot_pose,
                 const Vec2& goal_ego, double t, const OracleConfig& cfg) {
  if (i >= cs.size() || j >= cs.size())
    throw Error(ErrorCode::kInvalidArgument, "candidate index out of range");
  const std::vector<double> scores =
      OracleScores(cs, world, robot_pose, goal_ego, t, cfg);
  return PreferFromScores(scores[i], scores[j], i, j);
}

}  // namespace cfnav
