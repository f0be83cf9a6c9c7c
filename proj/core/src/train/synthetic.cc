// Copyright 2026 The Pointsoup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pointsoup/train/synthetic.h"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "pointsoup/base/error.h"
#include "pointsoup/geom/normalize.h"

namespace pointsoup::train {
namespace {

using geom::Vec3;
using Matrix3 = std::array<Vec3, 3>;

// Rotation from a uniformly random unit quaternion.
Matrix3 RandomRotation(Rng& rng) {
  double q[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : q) {
      v = rng.Normal();
      norm += v * v;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& v : q) v /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

Vec3 Apply(const Matrix3& m, const Vec3& p) {
  return {m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2],
          m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2],
          m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2]};
}

void SampleSphere(const SyntheticSpec& s, Rng& rng, std::vector<Vec3>& out) {
  Require(s.radius > 0.0, "synthetic sphere: radius must be positive");
  while (out.size() < s.points) {
    Vec3 d{rng.Normal(), rng.Normal(), rng.Normal()};
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (n < 1e-12) continue;
    out.push_back({s.radius * d[0] / n, s.radius * d[1] / n, s.radius * d[2] / n});
  }
}

void SampleBox(const SyntheticSpec& s, Rng& rng, std::vector<Vec3>& out) {
  const double a = s.extent[0], b = s.extent[1], c = s.extent[2];
  Require(a >= 0.0 && b >= 0.0 && c >= 0.0, "synthetic box: extents must be non-negative");
  const double areas[3] = {b * c, a * c, a * b};  // faces normal to x, y, z
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  Require(total > 0.0, "synthetic box: zero surface area");
  while (out.size() < s.points) {
    double pick = rng.Uniform() * total / 2.0;
    int axis = 0;
    while (axis < 2 && pick >= areas[axis]) pick -= areas[axis++];
    Vec3 p{rng.Uniform() * a, rng.Uniform() * b, rng.Uniform() * c};
    p[axis] = rng.Uniform() < 0.5 ? 0.0 : s.extent[axis];
    out.push_back(p);
  }
}

void SamplePlane(const SyntheticSpec& s, Rng& rng, std::vector<Vec3>& out) {
  Require(s.holes >= 0 && s.hole_radius >= 0.0, "synthetic plane: invalid holes");
  std::vector<std::array<double, 2>> centers(static_cast<size_t>(s.holes));
  for (auto& h : centers) h = {rng.Uniform(0.15, 0.85), rng.Uniform(0.15, 0.85)};
  const double r2 = s.hole_radius * s.hole_radius;
  size_t attempts = 0;
  const size_t max_attempts = 1000 * s.points + 1000;
  while (out.size() < s.points) {
    Require(++attempts < max_attempts, "synthetic plane: holes cover the plane");
    const double x = rng.Uniform(), y = rng.Uniform();
    bool inside_hole = false;
    for (const auto& h : centers) {
      if ((x - h[0]) * (x - h[0]) + (y - h[1]) * (y - h[1]) < r2) inside_hole = true;
    }
    if (!inside_hole) out.push_back({x, y, 0.0});
  }
}

void SampleSwissRoll(const SyntheticSpec& s, Rng& rng, std::vector<Vec3>& out) {
  Require(s.roll_turns > 0.0 && s.roll_width > 0.0,
          "synthetic swiss roll: turns and width must be positive");
  const double t0 = 1.5 * std::numbers::pi;
  const double t1 = t0 + 2.0 * std::numbers::pi * s.roll_turns;
  const double width = s.roll_width * std::numbers::pi;
  while (out.size() < s.points) {
    // Arc length grows roughly linearly in t, so draw t with density ~ t.
    const double t = std::sqrt(t0 * t0 + rng.Uniform() * (t1 * t1 - t0 * t0));
    out.push_back({t * std::cos(t), rng.Uniform() * width, t * std::sin(t)});
  }
}

}  // namespace

const char* ShapeName(Shape shape) {
  switch (shape) {
    case Shape::kSphere: return "sphere";
    case Shape::kBox: return "box";
    case Shape::kPlaneWithHoles: return "plane";
    case Shape::kSwissRoll: return "swiss-roll";
  }
  return "unknown";
}

geom::PointCloud GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed) {
  Require(spec.points >= 1, "synthetic: point count must be positive");
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(spec.points);
  switch (spec.shape) {
    case Shape::kSphere: SampleSphere(spec, rng, pts); break;
    case Shape::kBox: SampleBox(spec, rng, pts); break;
    case Shape::kPlaneWithHoles: SamplePlane(spec, rng, pts); break;
    case Shape::kSwissRoll: SampleSwissRoll(spec, rng, pts); break;
  }
  if (spec.rotate) {
    const Matrix3 rot = RandomRotation(rng);
    for (Vec3& p : pts) p = Apply(rot, p);
  }
  const geom::PointCloud raw(std::move(pts));
  return geom::Normalize(raw, geom::FitNormalization(raw, spec.bit_depth));
}

SyntheticSpec RandomSpec(Rng& rng, size_t min_points, size_t max_points) {
  Require(min_points >= 1 && min_points <= max_points, "synthetic: bad point range");
  SyntheticSpec s;
  s.shape = static_cast<Shape>(rng.UniformInt(4));
  s.points = min_points + rng.UniformInt(max_points - min_points + 1);
  s.radius = 1.0;
  for (double& e : s.extent) e = rng.Uniform(0.3, 1.0);
  s.holes = 1 + static_cast<int>(rng.UniformInt(5));
  s.hole_radius = rng.Uniform(0.05, 0.15);
  s.roll_turns = rng.Uniform(1.0, 2.0);
  s.roll_width = rng.Uniform(1.0, 3.0);
  return s;
}

}  // namespace pointsoup::train
