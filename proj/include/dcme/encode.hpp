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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dcme/grid.hpp"

namespace dcme {

/// All pixels carrying one instance id. Parts may be disjoint (partial
/// occlusion); they still form a single region.
struct InstanceRegion {
  LabelId id{0};
  std::vector<PixelCoord> pixels;
};

struct CenterOfMass {
  double x{0};
  double y{0};
};

/// Regions grouped by id (not connectivity), ascending id, pixels in
/// row-major order.
inline std::vector<InstanceRegion> extract_regions(const LabelMap& lm) {
  std::vector<std::vector<PixelCoord>> by_id(static_cast<std::size_t>(kMaxLabelId) + 1);
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      const LabelId id = lm(r, c);
      if (id != 0) by_id[id].push_back(PixelCoord{c, r});
    }
  }
  std::vector<InstanceRegion> regions;
  for (std::size_t id = 1; id < by_id.size(); ++id) {
    if (!by_id[id].empty())
      regions.push_back(InstanceRegion{static_cast<LabelId>(id), std::move(by_id[id])});
  }
  return regions;
}

/// Mean of the pixel coordinates under unit pixel mass, accumulated in
/// double precision.
inline CenterOfMass center_of_mass(const InstanceRegion& region) {
  if (region.pixels.empty()) throw std::invalid_argument("empty instance");
  double sum_x = 0.0, sum_y = 0.0;
  for (const PixelCoord& p : region.pixels) {
    sum_x += static_cast<double>(p.x);
    sum_y += static_cast<double>(p.y);
  }
  const double n = static_cast<double>(region.pixels.size());
  return CenterOfMass{sum_x / n, sum_y / n};
}

/// Center of the axis-aligned bounding box. More sensitive to outlying
/// pixels than the center of mass.
inline CenterOfMass bbox_centroid(const InstanceRegion& region) {
  if (region.pixels.empty()) throw std::invalid_argument("empty instance");
  Index min_x = region.pixels.front().x, max_x = min_x;
  Index min_y = region.pixels.front().y, max_y = min_y;
  for (const PixelCoord& p : region.pixels) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return CenterOfMass{(static_cast<double>(min_x) + static_cast<double>(max_x)) / 2.0,
                      (static_cast<double>(min_y) + static_cast<double>(max_y)) / 2.0};
}

namespace detail {

struct RegionStats {
  std::int64_t n{0};
  double sum_x{0.0}, sum_y{0.0};
  Index min_x{0}, max_x{0}, min_y{0}, max_y{0};
};

template <typename Scalar, typename AnchorFn>
VectorField<Scalar> encode_impl(const LabelMap& lm, AnchorFn anchor_of,
                                std::vector<LabelId>* degenerate_ids) {
  std::vector<RegionStats> stats(static_cast<std::size_t>(kMaxLabelId) + 1);
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      const LabelId id = lm(r, c);
      if (id == 0) continue;
      RegionStats& s = stats[id];
      if (s.n == 0) {
        s.min_x = s.max_x = c;
        s.min_y = s.max_y = r;
      } else {
        s.min_x = std::min(s.min_x, c);
        s.max_x = std::max(s.max_x, c);
        s.min_y = std::min(s.min_y, r);
        s.max_y = std::max(s.max_y, r);
      }
      ++s.n;
      s.sum_x += static_cast<double>(c);
      s.sum_y += static_cast<double>(r);
    }
  }
  std::vector<CenterOfMass> anchors(stats.size());
  for (std::size_t id = 1; id < stats.size(); ++id) {
    if (stats[id].n == 0) continue;
    anchors[id] = anchor_of(stats[id]);
    // A single pixel is its own anchor: the vector is zero and the pixel is
    // indistinguishable from background for any decoder.
    if (stats[id].n == 1 && degenerate_ids != nullptr)
      degenerate_ids->push_back(static_cast<LabelId>(id));
  }
  VectorField<Scalar> vm = VectorField<Scalar>::Zero(lm.rows(), lm.cols());
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      const LabelId id = lm(r, c);
      if (id == 0) continue;  // background stays exactly (0, 0)
      vm.dx(r, c) = static_cast<Scalar>(anchors[id].x - static_cast<double>(c));
      vm.dy(r, c) = static_cast<Scalar>(anchors[id].y - static_cast<double>(r));
    }
  }
  return vm;
}

}  // namespace detail

/// Encodes a label map into the displacement field pointing at per-instance
/// centers of mass: d = P_cm - P for every instance pixel P. Disjoint parts
/// of one id share a single center. Ids of single-pixel instances are
/// reported through degenerate_ids when given.
template <typename Scalar = double>
VectorField<Scalar> encode(const LabelMap& lm,
                           std::vector<LabelId>* degenerate_ids = nullptr) {
  return detail::encode_impl<Scalar>(
      lm,
      [](const detail::RegionStats& s) {
        const double n = static_cast<double>(s.n);
        return CenterOfMass{s.sum_x / n, s.sum_y / n};
      },
      degenerate_ids);
}

/// Same field but anchored at the bounding-box centroid instead of the
/// center of mass; kept for comparison against the primary anchor.
template <typename Scalar = double>
VectorField<Scalar> encode_bbox_centroid(const LabelMap& lm,
                                         std::vector<LabelId>* degenerate_ids = nullptr) {
  return detail::encode_impl<Scalar>(
      lm,
      [](const detail::RegionStats& s) {
        return CenterOfMass{
            (static_cast<double>(s.min_x) + static_cast<double>(s.max_x)) / 2.0,
            (static_cast<double>(s.min_y) + static_cast<double>(s.max_y)) / 2.0};
      },
      degenerate_ids);
}

}  // namespace dcme
