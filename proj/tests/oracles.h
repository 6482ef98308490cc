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


// Independent reference computations used by the tests. Nothing here calls
// into the library except for plain value types.

#ifndef CFNAV_TESTS_ORACLES_H_
#define CFNAV_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cfnav/error.h"
#include "cfnav/geometry.h"
#include "cfnav/random.h"

namespace cfnav::testing {

using DistanceMatrix = std::vector<std::vector<double>>;

inline DistanceMatrix PairwiseDistances(const Trajectory& t) {
  DistanceMatrix d(t.size(), std::vector<double>(t.size(), 0.0));
  for (size_t a = 0; a < t.size(); ++a) {
    for (size_t b = 0; b < t.size(); ++b) {
      d[a][b] = std::hypot(t[a].x - t[b].x, t[a].y - t[b].y);
    }
  }
  return d;
}

inline double MaxAbsDiff(const DistanceMatrix& a, const DistanceMatrix& b) {
  double worst = 0.0;
  for (size_t r = 0; r < a.size(); ++r) {
    for (size_t c = 0; c < a[r].size(); ++c) {
      worst = std::max(worst, std::abs(a[r][c] - b[r][c]));
    }
  }
  return worst;
}

inline Trajectory RandomTrajectory(Rng& rng, size_t n, double extent = 2.0) {
  Trajectory t;
  for (size_t k = 0; k < n; ++k) {
    t.waypoints.emplace_back(UniformReal(rng, -extent, extent),
                             UniformReal(rng, -extent, extent),
                             UniformReal(rng, -M_PI, M_PI));
  }
  return t;
}

// A forward-moving random walk: steps of 0.1..0.4 m with heading changes up
// to 0.5 rad, starting at the ego origin's first step.
inline Trajectory RandomForwardPath(Rng& rng, size_t n) {
  Trajectory t;
  double x = 0.0, y = 0.0, th = UniformReal(rng, -0.5, 0.5);
  for (size_t k = 0; k < n; ++k) {
    th += UniformReal(rng, -0.5, 0.5);
    const double step = UniformReal(rng, 0.1, 0.4);
    x += step * std::cos(th);
    y += step * std::sin(th);
    t.waypoints.emplace_back(x, y, th);
  }
  return t;
}

inline Trajectory StraightPath(size_t n, double spacing) {
  Trajectory t;
  for (size_t k = 1; k <= n; ++k) t.waypoints.emplace_back(spacing * k, 0, 0);
  return t;
}

// Polyline length by dense numerical integration along each segment.
inline double DenseArcLength(const Trajectory& t, size_t samples = 1000) {
  double total = 0.0;
  for (size_t k = 1; k < t.size(); ++k) {
    double px = t[k - 1].x, py = t[k - 1].y;
    for (size_t s = 1; s <= samples; ++s) {
      const double u = static_cast<double>(s) / samples;
      const double qx = t[k - 1].x + u * (t[k].x - t[k - 1].x);
      const double qy = t[k - 1].y + u * (t[k].y - t[k - 1].y);
      total += std::hypot(qx - px, qy - py);
      px = qx;
      py = qy;
    }
  }
  return total;
}

// Minimum distance from the polyline to the points, sampling the polyline
// every `step` meters.
inline double DenseMinClearance(const Trajectory& t,
                                const std::vector<Vec2>& points,
                                double step) {
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](double x, double y) {
    for (const Vec2& p : points) best = std::min(best, std::hypot(p.x - x, p.y - y));
  };
  visit(t[0].x, t[0].y);
  for (size_t k = 1; k < t.size(); ++k) {
    const double len = std::hypot(t[k].x - t[k - 1].x, t[k].y - t[k - 1].y);
    const size_t pieces = std::max<size_t>(1, static_cast<size_t>(std::ceil(len / step)));
    for (size_t s = 1; s <= pieces; ++s) {
      const double u = static_cast<double>(s) / pieces;
      visit(t[k - 1].x + u * (t[k].x - t[k - 1].x),
            t[k - 1].y + u * (t[k].y - t[k - 1].y));
    }
  }
  return best;
}

// First positive hit distance of a ray from `o` along unit `d` on a circle.
inline std::optional<double> RayCircle(Vec2 o, Vec2 d, Vec2 c, double r) {
  const double fx = o.x - c.x, fy = o.y - c.y;
  const double b = fx * d.x + fy * d.y;
  const double cc = fx * fx + fy * fy - r * r;
  const double disc = b * b - cc;
  if (disc < 0) return std::nullopt;
  const double s = std::sqrt(disc);
  const double t0 = -b - s, t1 = -b + s;
  if (t0 > 0) return t0;
  if (t1 > 0) return t1;
  return std::nullopt;
}

// Pose of `p` (odom) seen from `f` (odom), computed with explicit matrices.
inline Pose2 ExpressIn(const Pose2& p, const Pose2& f) {
  const double c = std::cos(f.theta), s = std::sin(f.theta);
  const double dx = p.x - f.x, dy = p.y - f.y;
  return Pose2(c * dx + s * dy, -s * dx + c * dy, p.theta - f.theta);
}

inline Pose2 Unexpress(const Pose2& q, const Pose2& f) {
  const double c = std::cos(f.theta), s = std::sin(f.theta);
  return Pose2(f.x + c * q.x - s * q.y, f.y + s * q.x + c * q.y,
               q.theta + f.theta);
}

inline double AngleDiff(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * M_PI));
}

inline double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Kendall rank correlation between two score vectors (no ties expected).
inline double KendallTau(const std::vector<double>& a,
                         const std::vector<double>& b) {
  int concordant = 0, discordant = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0) ++concordant;
      if (s < 0) ++discordant;
    }
  }
  const double pairs = a.size() * (a.size() - 1) / 2.0;
  return (concordant - discordant) / pairs;
}

template <typename F>
std::optional<ErrorCode> ErrorOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace cfnav::testing

#endif  // CFNAV_TESTS_ORACLES_H_
