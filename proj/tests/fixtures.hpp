// Copyright 2026 The dcme Authors
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
//
// Shared scene fixtures for the roundtrip and acceptance suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dcme/encode.hpp"
#include "dcme/grid.hpp"
#include "dcme/synth.hpp"

namespace fixtures {

// The asymmetric comb: five pixels in a column plus one far corner pixel.
// Its bounding-box centroid and center of mass differ, which makes it the
// discriminator fixture between the two encoding anchors.
inline dcme::InstanceRegion comb_region() {
  dcme::InstanceRegion region;
  region.id = 1;
  region.pixels = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {4, 4}};
  return region;
}

inline dcme::LabelMap comb_label_map() {
  dcme::LabelMap lm = dcme::LabelMap::Zero(8, 8);
  for (const dcme::PixelCoord& p : comb_region().pixels) lm(p.y, p.x) = 1;
  return lm;
}

// A square bisected by a full-height bar painted over it: the square keeps
// one id across two disjoint parts. The bar's center of mass sits at mid
// height, the square's well away from it.
inline dcme::SceneSpec split_scene_spec(dcme::GridDims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double h = static_cast<double>(dims.height);
  const double w = static_cast<double>(dims.width);
  std::uniform_real_distribution<double> cx_d(30.0, w - 31.0);
  std::uniform_int_distribution<int> side_d(0, 1);
  std::uniform_real_distribution<double> half_d(7.0, 9.0);
  std::uniform_real_distribution<double> cy_off(0.15 * h, 0.30 * h);

  dcme::SceneSpec spec{dims, {}, seed};
  const double cx = std::floor(cx_d(rng));
  const double mid = (h - 1.0) / 2.0;
  const double cy =
      std::floor(side_d(rng) == 0 ? mid - cy_off(rng) : mid + cy_off(rng));
  const double half = std::floor(half_d(rng));
  // Square first, bar second: painter's order splits the square.
  spec.shapes.push_back({dcme::ShapeKind::kRect, cx, cy, half, half, 1});
  spec.shapes.push_back({dcme::ShapeKind::kRect, cx, mid, 1.0, h, 2});
  // One extra shape far to the side, clear of both.
  const double ex = cx > w / 2.0 ? cx - std::min(cx - 15.0, 60.0) * 0.9 : cx + 50.0;
  const double ey = cy > mid ? 0.25 * h : 0.75 * h;
  spec.shapes.push_back({dcme::ShapeKind::kEllipse, std::floor(ex), std::floor(ey), 6.0, 8.0, 3});
  return spec;
}

struct SceneCheck {
  bool ok{false};
  int instances{0};
  double min_cm_dist{0};
};

// Verifies the roundtrip preconditions: surviving instance sizes inside
// [min_size, max_size] and pairwise center-of-mass distances above min_sep.
inline SceneCheck check_scene(const dcme::LabelMap& labels, double min_size, double max_size,
                              double min_sep, int max_instances) {
  SceneCheck check;
  const std::vector<dcme::InstanceRegion> regions = dcme::extract_regions(labels);
  check.instances = static_cast<int>(regions.size());
  if (regions.empty() || check.instances > max_instances) return check;
  std::vector<dcme::CenterOfMass> cms;
  for (const dcme::InstanceRegion& region : regions) {
    const double size = static_cast<double>(region.pixels.size());
    if (size < min_size || size > max_size) return check;
    cms.push_back(dcme::center_of_mass(region));
  }
  check.min_cm_dist = 1e300;
  for (std::size_t i = 0; i < cms.size(); ++i)
    for (std::size_t j = i + 1; j < cms.size(); ++j)
      check.min_cm_dist = std::min(
          check.min_cm_dist, std::hypot(cms[i].x - cms[j].x, cms[i].y - cms[j].y));
  if (cms.size() > 1 && check.min_cm_dist <= min_sep) return check;
  check.ok = true;
  return check;
}

struct FixtureScene {
  dcme::LabelMap labels;
  std::uint64_t seed{0};
  bool split{false};
};

// Deterministic roundtrip fixture set: n_random filtered separated scenes
// followed by n_split occlusion fixtures. Seeds advance until each scene
// passes check_scene, so the set is stable across runs.
inline std::vector<FixtureScene> roundtrip_scenes(int n_random, int n_split,
                                                  dcme::GridDims dims, double min_sep,
                                                  double min_size = 60.0,
                                                  double max_size = 4000.0,
                                                  std::uint64_t seed0 = 1) {
  std::vector<FixtureScene> scenes;
  std::uint64_t seed = seed0;
  while (static_cast<int>(scenes.size()) < n_random) {
    const int shapes = 6 + static_cast<int>(seed % 9);  // 6..14
    const dcme::SceneSpec spec = dcme::random_separated_scene(
        dims, shapes, {min_size + 40.0, max_size}, seed, min_sep);
    dcme::Scene scene = dcme::generate_scene(spec);
    const SceneCheck check = check_scene(scene.labels, min_size, max_size, min_sep, 20);
    if (check.ok && check.instances >= 3)
      scenes.push_back({std::move(scene.labels), seed, false});
    ++seed;
  }
  seed = seed0 + 100000;
  while (static_cast<int>(scenes.size()) < n_random + n_split) {
    dcme::Scene scene = dcme::generate_scene(split_scene_spec(dims, seed));
    const SceneCheck check = check_scene(scene.labels, min_size, max_size, min_sep, 20);
    if (check.ok) scenes.push_back({std::move(scene.labels), seed, true});
    ++seed;
  }
  return scenes;
}

}  // namespace fixtures
