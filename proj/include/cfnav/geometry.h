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

#ifndef CFNAV_GEOMETRY_H_
#define CFNAV_GEOMETRY_H_

#include <span>
#include <string_view>
#include <vector>

namespace cfnav {

// Wraps an angle into (-pi, pi]. -pi maps to +pi.
double NormalizeAngle(double angle);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2&) const = default;

  double Norm() const;
  double Dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double Cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

double Distance(const Vec2& a, const Vec2& b);

// Planar pose (x [m], y [m], theta [rad]); theta kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_in, double y_in, double theta_in)
      : x(x_in), y(y_in), theta(NormalizeAngle(theta_in)) {}

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2&) const = default;
};

// Rigid planar transform: p -> R(rotation) * p + translation.
class Transform2 {
 public:
  Transform2() = default;
  Transform2(Vec2 translation, double rotation);
  static Transform2 FromPose(const Pose2& pose);

  Vec2 translation() const { return translation_; }
  double rotation() const { return rotation_; }

  Transform2 Compose(const Transform2& rhs) const;  // this * rhs
  Transform2 Inverse() const;
  Vec2 Apply(const Vec2& p) const;
  Pose2 Apply(const Pose2& p) const;
  Vec2 ApplyRotation(const Vec2& v) const;

 private:
  Vec2 translation_;
  double rotation_ = 0.0;
  double cos_ = 1.0;
  double sin_ = 0.0;
};

enum class FrameTag { kEgoStart, kOdom };

std::string_view FrameTagName(FrameTag tag);
FrameTag ParseFrameTag(std::string_view name);

// Ordered waypoints p_1..p_N. The horizon N is a configuration value, so the
// length invariant is enforced by the producers (generator, policy) rather
// than here.
struct Trajectory {
  std::vector<Pose2> waypoints;
  FrameTag frame = FrameTag::kEgoStart;

  size_t size() const { return waypoints.size(); }
  bool empty() const { return waypoints.empty(); }
  const Pose2& operator[](size_t i) const { return waypoints[i]; }
  Pose2& operator[](size_t i) { return waypoints[i]; }
  bool operator==(const Trajectory&) const = default;

  std::vector<Vec2> Positions() const;
  bool IsFinite() const;
};

// Polyline length over the waypoint positions.
double ArcLength(const Trajectory& traj);
double ArcLength(std::span<const Vec2> points);

// Rotates every waypoint about the ego origin. Throws kInvalidArgument for a
// non-finite angle or a trajectory not in the ego start frame.
Trajectory RotateTrajectory(const Trajectory& traj, double angle);

// Maps the path through the rotation + uniform positive scale about the ego
// origin that takes its final waypoint onto `target`, then resamples it to
// `n` waypoints by arc length. Headings are rebuilt from positions.
Trajectory ReparameterizeToTarget(const Trajectory& traj, Vec2 target,
                                  size_t n);

// Allowed range for the similarity scale in ReparameterizeToTarget.
inline constexpr double kMinTargetScale = 0.1;
inline constexpr double kMaxTargetScale = 10.0;

// Samples n poses at equal arc-length spacing from first to last waypoint.
// A path shorter than 1e-9 yields n copies of its start pose.
Trajectory ResampleArcLength(const Trajectory& traj, size_t n);

// Expresses an odom-frame pose in the frame whose origin is `frame_origin`.
Pose2 ToFrame(const Pose2& pose_in_odom, const Pose2& frame_origin);
// Inverse of ToFrame.
Pose2 FromFrame(const Pose2& pose_in_frame, const Pose2& frame_origin);

// Heading of segment i -> i+1 for each position; the last copies the one
// before it. Segments under 1e-9 inherit the previous heading (0 at start).
std::vector<double> HeadingFromPositions(std::span<const Vec2> positions);

// Builds a trajectory from positions with headings from HeadingFromPositions.
Trajectory TrajectoryFromPositions(std::span<const Vec2> positions,
                                   FrameTag frame = FrameTag::kEgoStart);

}  // namespace cfnav

#endif  // CFNAV_GEOMETRY_H_
