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
// Synthetic scene generation: rectangles and ellipses rasterized in
// painter's order, so later shapes occlude earlier ones. Instance id equals
// the 1-based position in the shape list; a shape split by a later one keeps
// its single id across the disjoint parts.
//
// Scene specs serialize as line-oriented text:
//   # comment
//   dims <height> <width>
//   seed <uint64>
//   shape <rect|ellipse> <cx> <cy> <half_x> <half_y> <class_id>

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dcme/grid.hpp"
#include "dcme/io.hpp"

namespace dcme {

enum class ShapeKind { kRect, kEllipse };

struct ShapeSpec {
  ShapeKind kind{ShapeKind::kRect};
  double cx{0}, cy{0};          // center, pixels
  double half_x{1}, half_y{1};  // half extents, pixels
  int class_id{1};
};

struct SceneSpec {
  GridDims dims{};
  std::vector<ShapeSpec> shapes;
  std::uint64_t seed{0};
};

struct Scene {
  LabelMap labels;
  LabelMap classes;
  std::vector<LabelId> dropped_ids;  // shapes that rasterized to zero pixels
};

inline Scene generate_scene(const SceneSpec& spec) {
  if (spec.dims.height < 1 || spec.dims.width < 1)
    throw std::invalid_argument("scene dims must be positive");
  if (spec.shapes.size() > kMaxLabelId)
    throw std::invalid_argument("too many shapes for 16-bit ids");
  Scene scene{LabelMap::Zero(spec.dims.height, spec.dims.width),
              LabelMap::Zero(spec.dims.height, spec.dims.width),
              {}};
  const Index h = spec.dims.height, w = spec.dims.width;
  for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
    const ShapeSpec& s = spec.shapes[i];
    if (s.half_x < 1.0 || s.half_y < 1.0)
      throw std::invalid_argument("half extents must be >= 1");
    if (s.class_id < 1 || s.class_id > kMaxLabelId)
      throw std::invalid_argument("class_id out of range");
    const LabelId id = static_cast<LabelId>(i + 1);
    const Index x0 = std::max<Index>(0, static_cast<Index>(std::ceil(s.cx - s.half_x)));
    const Index x1 = std::min<Index>(w - 1, static_cast<Index>(std::floor(s.cx + s.half_x)));
    const Index y0 = std::max<Index>(0, static_cast<Index>(std::ceil(s.cy - s.half_y)));
    const Index y1 = std::min<Index>(h - 1, static_cast<Index>(std::floor(s.cy + s.half_y)));
    for (Index y = y0; y <= y1; ++y) {
      for (Index x = x0; x <= x1; ++x) {
        if (s.kind == ShapeKind::kEllipse) {
          const double ex = (static_cast<double>(x) - s.cx) / s.half_x;
          const double ey = (static_cast<double>(y) - s.cy) / s.half_y;
          if (ex * ex + ey * ey > 1.0) continue;
        }
        scene.labels(y, x) = id;
        scene.classes(y, x) = static_cast<LabelId>(s.class_id);
      }
    }
  }
  std::vector<std::int64_t> counts(spec.shapes.size() + 1, 0);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) ++counts[scene.labels(y, x)];
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] == 0) scene.dropped_ids.push_back(static_cast<LabelId>(i));
  return scene;
}

namespace detail {

inline ShapeSpec draw_shape(std::mt19937_64& rng, GridDims dims,
                            std::pair<double, double> size_range) {
  std::uniform_real_distribution<double> area_d(size_range.first, size_range.second);
  std::uniform_real_distribution<double> ratio_d(0.5, 2.0);
  std::bernoulli_distribution kind_d(0.5);
  std::uniform_int_distribution<int> class_d(1, 8);
  ShapeSpec s;
  s.kind = kind_d(rng) ? ShapeKind::kEllipse : ShapeKind::kRect;
  const double area = area_d(rng);
  const double ratio = ratio_d(rng);
  if (s.kind == ShapeKind::kRect) {
    s.half_x = std::max(1.0, std::sqrt(area * ratio) / 2.0);
    s.half_y = std::max(1.0, std::sqrt(area / ratio) / 2.0);
  } else {
    s.half_x = std::max(1.0, std::sqrt(area * ratio / std::numbers::pi));
    s.half_y = std::max(1.0, std::sqrt(area / (ratio * std::numbers::pi)));
  }
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  const double lo_x = std::min(s.half_x, w - 1.0 - s.half_x);
  const double hi_x = std::max(s.half_x, w - 1.0 - s.half_x);
  const double lo_y = std::min(s.half_y, h - 1.0 - s.half_y);
  const double hi_y = std::max(s.half_y, h - 1.0 - s.half_y);
  s.cx = std::uniform_real_distribution<double>(lo_x, hi_x)(rng);
  s.cy = std::uniform_real_distribution<double>(lo_y, hi_y)(rng);
  s.class_id = class_d(rng);
  return s;
}

}  // namespace detail

/// Seeded uniform draws of kind, size, aspect, center, and class. Centers
/// stay inside the grid by at least the half extents when the shape fits.
inline SceneSpec random_scene(GridDims dims, int n_shapes,
                              std::pair<double, double> size_range, std::uint64_t seed) {
  if (n_shapes < 0) throw std::invalid_argument("n_shapes must be >= 0");
  SceneSpec spec{dims, {}, seed};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_shapes; ++i)
    spec.shapes.push_back(detail::draw_shape(rng, dims, size_range));
  return spec;
}

/// Like random_scene but keeps shapes pairwise separated: a new shape is
/// re-drawn until its bounding circle clears every accepted one by at least
/// min_gap pixels. Shapes that cannot be placed within the retry budget are
/// dropped, so the result may hold fewer than n_shapes. Separated shapes do
/// not occlude each other, which keeps their centers of mass apart; this is
/// the fixture generator for clean roundtrips.
inline SceneSpec random_separated_scene(GridDims dims, int n_shapes,
                                        std::pair<double, double> size_range,
                                        std::uint64_t seed, double min_gap) {
  if (n_shapes < 0) throw std::invalid_argument("n_shapes must be >= 0");
  SceneSpec spec{dims, {}, seed};
  std::mt19937_64 rng(seed);
  std::vector<double> radii;
  for (int i = 0; i < n_shapes; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      ShapeSpec s = detail::draw_shape(rng, dims, size_range);
      const double radius = std::hypot(s.half_x, s.half_y);
      bool clear = true;
      for (std::size_t j = 0; j < spec.shapes.size(); ++j) {
        const double dist =
            std::hypot(s.cx - spec.shapes[j].cx, s.cy - spec.shapes[j].cy);
        if (dist < radius + radii[j] + min_gap) {
          clear = false;
          break;
        }
      }
      if (clear) {
        spec.shapes.push_back(s);
        radii.push_back(radius);
        break;
      }
    }
  }
  return spec;
}

inline void write_scene_spec(std::ostream& os, const SceneSpec& spec) {
  os << "dims " << spec.dims.height << " " << spec.dims.width << "\n";
  os << "seed " << spec.seed << "\n";
  for (const ShapeSpec& s : spec.shapes) {
    os << "shape " << (s.kind == ShapeKind::kRect ? "rect" : "ellipse") << " " << s.cx
       << " " << s.cy << " " << s.half_x << " " << s.half_y << " " << s.class_id << "\n";
  }
}

inline SceneSpec parse_scene_spec(std::istream& is) {
  SceneSpec spec;
  bool have_dims = false;
  std::string line;
  int lineno = 0;
  auto fail = [&lineno](const std::string& why) {
    throw FormatError(FormatError::Kind::kBadSceneSpec,
                      "bad scene spec, line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "dims") {
      if (!(ls >> spec.dims.height >> spec.dims.width) || spec.dims.height < 1 ||
          spec.dims.width < 1)
        fail("expected 'dims <height> <width>'");
      have_dims = true;
    } else if (key == "seed") {
      if (!(ls >> spec.seed)) fail("expected 'seed <uint64>'");
    } else if (key == "shape") {
      ShapeSpec s;
      std::string kind;
      if (!(ls >> kind >> s.cx >> s.cy >> s.half_x >> s.half_y >> s.class_id))
        fail("expected 'shape <kind> <cx> <cy> <half_x> <half_y> <class_id>'");
      if (kind == "rect")
        s.kind = ShapeKind::kRect;
      else if (kind == "ellipse")
        s.kind = ShapeKind::kEllipse;
      else
        fail("unknown shape kind '" + kind + "'");
      if (s.half_x < 1.0 || s.half_y < 1.0) fail("half extents must be >= 1");
      if (s.class_id < 1 || s.class_id > kMaxLabelId) fail("class_id out of range");
      spec.shapes.push_back(s);
    } else {
      fail("unknown key '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
  }
  if (!have_dims) {
    lineno = 0;
    fail("missing dims");
  }
  return spec;
}

}  // namespace dcme
