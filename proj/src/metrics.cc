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

#include "cfnav/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfnav/error.h"

namespace cfnav {

ObstacleCloud ScanToPoints(const LaserScan& scan) {
  ObstacleCloud cloud;
  for (size_t k = 0; k < scan.ranges.size(); ++k) {
    const double r = scan.ranges[k];
    if (!(r < scan.max_range)) continue;
    const double a = scan.BeamAngle(k);
    cloud.points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return cloud;
}

std::vector<Vec2> Densify(const Trajectory& traj, double step) {
  if (!(step > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "interp_step must be positive");
  std::vector<Vec2> out;
  if (traj.empty()) return out;
  out.push_back(traj[0].position());
  for (size_t i = 1; i < traj.size(); ++i) {
    const Vec2 a = traj[i - 1].position();
    const Vec2 b = traj[i].position();
    const double len = Distance(a, b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 1; k <= pieces; ++k)
      out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
  }
  return out;
}

double MinClearance(const Trajectory& traj, const ObstacleCloud& cloud,
                    double interp_step, double empty_clearance) {
  const std::vector<Vec2> dense = Densify(traj, interp_step);
  if (cloud.points.empty() || dense.empty()) return empty_clearance;
  double best_sq = std::numeric_limits<double>::infinity();
  auto visit_segment = [&](const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.Dot(ab);
    for (const Vec2& o : cloud.points) {
      double u = len_sq > 0.0 ? (o - a).Dot(ab) / len_sq : 0.0;
      u = std::clamp(u, 0.0, 1.0);
      const Vec2 d = a + ab * u - o;
      best_sq = std::min(best_sq, d.Dot(d));
    }
  };
  if (dense.size() == 1) visit_segment(dense[0], dense[0]);
  for (size_t i = 1; i < dense.size(); ++i) visit_segment(dense[i - 1], dense[i]);
  return std::sqrt(best_sq);
}

bool IsNearCollision(const Trajectory& traj, const ObstacleCloud& cloud,
                     double robot_width, double interp_step,
                     double empty_clearance) {
  if (!(robot_width > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "robot_width must be positive");
  return MinClearance(traj, cloud, interp_step, empty_clearance) < robot_width;
}

double Deviation(const Trajectory& pred, const Trajectory& preferred) {
  if (pred.size() != preferred.size() || pred.empty())
    throw Error(ErrorCode::kInvalidArgument,
                "deviation needs equal, non-zero trajectory lengths");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i)
    sum += Distance(pred[i].position(), preferred[i].position());
  return sum / static_cast<double>(pred.size());
}

double PathCompletion(double executed_arclen, double planned_arclen,
                      bool reached_goal, bool collided_terminated) {
  if (reached_goal) return 1.0;
  if (planned_arclen <= 0.0) return 0.0;
  const double cap = collided_terminated ? kCollidedCompletionCap : 1.0;
  return std::clamp(executed_arclen / planned_arclen, 0.0, cap);
}

MetricsReport EvaluateBatch(std::span<const OfflineSample> samples,
                            const MetricsConfig& cfg) {
  MetricsReport report;
  if (samples.empty()) return report;
  report.sample_count = samples.size();
  report.per_sample.reserve(samples.size());
  double dev_sum = 0.0, clear_sum = 0.0;
  for (const OfflineSample& s : samples) {
    SampleRow row;
    row.deviation = Deviation(s.pred, s.preferred);
    row.min_clearance =
        MinClearance(s.pred, s.cloud, cfg.interp_step, cfg.empty_clearance);
    row.near_collision = row.min_clearance < cfg.robot_width;
    dev_sum += row.deviation;
    clear_sum += row.min_clearance;
    if (row.near_collision) ++report.near_collision_count;
    report.per_sample.push_back(row);
  }
  const double n = static_cast<double>(samples.size());
  report.mean_deviation = dev_sum / n;
  report.mean_min_clearance = clear_sum / n;
  return report;
}

void SummarizeEpisodes(std::span<const EpisodeSummary> rows,
                       MetricsReport& report) {
  report.episode_count = rows.size();
  report.per_episode.assign(rows.begin(), rows.end());
  if (rows.empty()) return;
  double success = 0.0, clearance = 0.0, collisions = 0.0, completion = 0.0;
  for (const EpisodeSummary& r : rows) {
    success += r.success ? 1.0 : 0.0;
    clearance += r.min_clearance;
    collisions += r.collisions;
    completion += r.path_completion;
  }
  const double n = static_cast<double>(rows.size());
  report.success_rate = success / n;
  report.mean_episode_clearance = clearance / n;
  report.mean_collisions = collisions / n;
  report.mean_path_completion = completion / n;
}

Histogram MakeHistogram(std::span<const double> values, size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty() || bins == 0) return h;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lo = *lo;
  h.hi = *hi;
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : values) {
    size_t b = width > 0.0 ? static_cast<size_t>((v - h.lo) / width) : 0;
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

}  // namespace cfnav
