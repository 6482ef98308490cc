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

#include "cfnav/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfnav/error.h"

namespace cfnav {
namespace {

constexpr double kDegenerateLength = 1e-9;

double LerpAngle(double a, double b, double t) {
  return NormalizeAngle(a + t * NormalizeAngle(b - a));
}

}  // namespace

double NormalizeAngle(double angle) {
  if (!std::isfinite(angle)) return angle;
  double a = std::remainder(angle, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

double Vec2::Norm() const { return std::hypot(x, y); }

double Distance(const Vec2& a, const Vec2& b) { return (a - b).Norm(); }

Transform2::Transform2(Vec2 translation, double rotation)
    : translation_(translation),
      rotation_(NormalizeAngle(rotation)),
      cos_(std::cos(rotation)),
      sin_(std::sin(rotation)) {}

Transform2 Transform2::FromPose(const Pose2& pose) {
  return Transform2({pose.x, pose.y}, pose.theta);
}

Transform2 Transform2::Compose(const Transform2& rhs) const {
  return Transform2(Apply(rhs.translation_), rotation_ + rhs.rotation_);
}

Transform2 Transform2::Inverse() const {
  const Vec2 t{-(cos_ * translation_.x + sin_ * translation_.y),
               sin_ * translation_.x - cos_ * translation_.y};
  return Transform2(t, -rotation_);
}

Vec2 Transform2::ApplyRotation(const Vec2& v) const {
  return {cos_ * v.x - sin_ * v.y, sin_ * v.x + cos_ * v.y};
}

Vec2 Transform2::Apply(const Vec2& p) const {
  return ApplyRotation(p) + translation_;
}

Pose2 Transform2::Apply(const Pose2& p) const {
  const Vec2 q = Apply(p.position());
  return Pose2(q.x, q.y, p.theta + rotation_);
}

std::string_view FrameTagName(FrameTag tag) {
  return tag == FrameTag::kEgoStart ? "ego_start" : "odom";
}

FrameTag ParseFrameTag(std::string_view name) {
  if (name == "ego_start") return FrameTag::kEgoStart;
  if (name == "odom") return FrameTag::kOdom;
  throw Error(ErrorCode::kParseError,
              "unknown frame tag '" + std::string(name) + "'");
}

std::vector<Vec2> Trajectory::Positions() const {
  std::vector<Vec2> out;
  out.reserve(waypoints.size());
  for (const Pose2& p : waypoints) out.push_back(p.position());
  return out;
}

bool Trajectory::IsFinite() const {
  for (const Pose2& p : waypoints) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta))
      return false;
  }
  return true;
}

double ArcLength(std::span<const Vec2> points) {
  double total = 0.0;
  for (size_t i = 1; i < points.size(); ++i)
    total += Distance(points[i - 1], points[i]);
  return total;
}

double ArcLength(const Trajectory& traj) {
  const std::vector<Vec2> pts = traj.Positions();
  return ArcLength(pts);
}

Trajectory RotateTrajectory(const Trajectory& traj, double angle) {
  if (!std::isfinite(angle))
    throw Error(ErrorCode::kInvalidArgument, "rotation angle is not finite");
  if (traj.frame != FrameTag::kEgoStart)
    throw Error(ErrorCode::kInvalidArgument,
                "rotation requires an ego_start trajectory");
  const Transform2 rot({0.0, 0.0}, angle);
  Trajectory out;
  out.frame = traj.frame;
  out.waypoints.reserve(traj.size());
  for (const Pose2& p : traj.waypoints) out.waypoints.push_back(rot.Apply(p));
  return out;
}

Trajectory ResampleArcLength(const Trajectory& traj, size_t n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "resample needs n >= 2");
  if (traj.size() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "resample needs at least 2 waypoints");
  const std::vector<Vec2> pts = traj.Positions();
  std::vector<double> cumulative(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i)
    cumulative[i] = cumulative[i - 1] + Distance(pts[i - 1], pts[i]);
  const double total = cumulative.back();

  Trajectory out;
  out.frame = traj.frame;
  if (total < kDegenerateLength) {
    out.waypoints.assign(n, traj.waypoints.front());
    return out;
  }
  out.waypoints.reserve(n);
  out.waypoints.push_back(traj.waypoints.front());
  size_t seg = 0;
  for (size_t k = 1; k + 1 < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < pts.size() && cumulative[seg + 1] < s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double t =
        seg_len > 0.0 ? std::clamp((s - cumulative[seg]) / seg_len, 0.0, 1.0)
                      : 0.0;
    const Vec2 p = pts[seg] + (pts[seg + 1] - pts[seg]) * t;
    out.waypoints.emplace_back(
        p.x, p.y,
        LerpAngle(traj[seg].theta, traj[seg + 1].theta, t));
  }
  out.waypoints.push_back(traj.waypoints.back());
  return out;
}

Trajectory ReparameterizeToTarget(const Trajectory& traj, Vec2 target,
                                  size_t n) {
  if (traj.size() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "reparameterization needs at least 2 waypoints");
  if (!std::isfinite(target.x) || !std::isfinite(target.y))
    throw Error(ErrorCode::kInvalidArgument, "target is not finite");
  const Vec2 end = traj.waypoints.back().position();
  if (end.Norm() < kDegenerateLength || ArcLength(traj) < kDegenerateLength)
    throw Error(ErrorCode::kDegeneratePath,
                "path is degenerate (zero length or ends at the ego origin)");
  if (target.Norm() < kDegenerateLength)
    throw Error(ErrorCode::kDegenerateTarget,
                "target coincides with the ego origin; use the stop request");
  const double scale = target.Norm() / end.Norm();
  if (scale < kMinTargetScale || scale > kMaxTargetScale)
    throw Error(ErrorCode::kInvalidArgument,
                "target requires path scale " + std::to_string(scale) +
                    " outside [0.1, 10]");
  const double angle =
      std::atan2(target.y, target.x) - std::atan2(end.y, end.x);
  const Transform2 rot({0.0, 0.0}, angle);

  std::vector<Vec2> mapped;
  mapped.reserve(traj.size());
  for (const Pose2& p : traj.waypoints)
    mapped.push_back(rot.ApplyRotation(p.position()) * scale);
  mapped.back() = target;

  const Trajectory resampled =
      ResampleArcLength(TrajectoryFromPositions(mapped, traj.frame), n);
  std::vector<Vec2> positions = resampled.Positions();
  positions.back() = target;
  return TrajectoryFromPositions(positions, traj.frame);
}

Pose2 ToFrame(const Pose2& pose_in_odom, const Pose2& frame_origin) {
  return Transform2::FromPose(frame_origin).Inverse().Apply(pose_in_odom);
}

Pose2 FromFrame(const Pose2& pose_in_frame, const Pose2& frame_origin) {
  return Transform2::FromPose(frame_origin).Apply(pose_in_frame);
}

std::vector<double> HeadingFromPositions(std::span<const Vec2> positions) {
  std::vector<double> headings(positions.size(), 0.0);
  double previous = 0.0;
  for (size_t i = 0; i + 1 < positions.size(); ++i) {
    const Vec2 d = positions[i + 1] - positions[i];
    if (d.Norm() >= kDegenerateLength) previous = std::atan2(d.y, d.x);
    headings[i] = NormalizeAngle(previous);
  }
  if (positions.size() >= 2)
    headings.back() = headings[positions.size() - 2];
  return headings;
}

Trajectory TrajectoryFromPositions(std::span<const Vec2> positions,
                                   FrameTag frame) {
  const std::vector<double> headings = HeadingFromPositions(positions);
  Trajectory out;
  out.frame = frame;
  out.waypoints.reserve(positions.size());
  for (size_t i = 0; i < positions.size(); ++i)
    out.waypoints.emplace_back(positions[i].x, positions[i].y, headings[i]);
  return out;
}

}  // namespace cfnav
