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

#ifndef CFNAV_METRICS_H_
#define CFNAV_METRICS_H_

#include <span>
#include <vector>

#include "cfnav/geometry.h"

namespace cfnav {

// Planar range scan in the robot frame. A reading equal to max_range means
// the beam had no return.
struct LaserScan {
  double angle_min = 0.0;
  double angle_increment = 0.0;
  std::vector<double> ranges;
  double max_range = 10.0;

  double BeamAngle(size_t k) const {
    return angle_min + static_cast<double>(k) * angle_increment;
  }
  bool operator==(const LaserScan&) const = default;
};

struct ObstacleCloud {
  std::vector<Vec2> points;
};

struct MetricsConfig {
  double interp_step = 0.05;      // m
  double robot_width = 0.5;       // m
  double empty_clearance = 10.0;  // returned when nothing is visible
};

ObstacleCloud ScanToPoints(const LaserScan& scan);

// Points along the waypoint polyline, spaced at most `step` apart, including
// every waypoint.
std::vector<Vec2> Densify(const Trajectory& traj, double step);

// Smallest distance from the densified trajectory polyline (its segments,
// not just the sample points) to any obstacle point.
double MinClearance(const Trajectory& traj, const ObstacleCloud& cloud,
                    double interp_step, double empty_clearance = 10.0);

// Strict: clearance equal to the robot width is not a near-collision.
bool IsNearCollision(const Trajectory& traj, const ObstacleCloud& cloud,
                     double robot_width, double interp_step = 0.05,
                     double empty_clearance = 10.0);

// Mean index-aligned position distance. Throws kInvalidArgument on length
// mismatch.
double Deviation(const Trajectory& pred, const Trajectory& preferred);

// Collided-and-terminated runs are capped strictly below 1.
double PathCompletion(double executed_arclen, double planned_arclen,
                      bool reached_goal, bool collided_terminated);

inline constexpr double kCollidedCompletionCap = 0.999;

struct OfflineSample {
  Trajectory pred;
  Trajectory preferred;
  ObstacleCloud cloud;
};

struct SampleRow {
  double deviation = 0.0;
  double min_clearance = 0.0;
  bool near_collision = false;
};

struct EpisodeSummary {
  bool success = false;
  double min_clearance = 0.0;
  int collisions = 0;
  double path_completion = 0.0;
};

struct MetricsReport {
  // Offline metrics.
  size_t sample_count = 0;
  size_t near_collision_count = 0;
  double mean_deviation = 0.0;
  double mean_min_clearance = 0.0;
  std::vector<SampleRow> per_sample;
  // Closed-loop metrics.
  size_t episode_count = 0;
  double success_rate = 0.0;
  double mean_episode_clearance = 0.0;
  double mean_collisions = 0.0;
  double mean_path_completion = 0.0;
  std::vector<EpisodeSummary> per_episode;
};

MetricsReport EvaluateBatch(std::span<const OfflineSample> samples,
                            const MetricsConfig& cfg = {});

// Fills the closed-loop section of `report` from episode rows.
void SummarizeEpisodes(std::span<const EpisodeSummary> rows, MetricsReport& report);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<size_t> counts;
};

// Uniform bins over [min, max] of the values; the max lands in the last bin.
Histogram MakeHistogram(std::span<const double> values, size_t bins = 50);

}  // namespace cfnav

#endif  // CFNAV_METRICS_H_
