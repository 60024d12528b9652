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

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dcme {

using Index = Eigen::Index;

/// Dense row-major plane of per-pixel values. Row index is y (growing
/// downward), column index is x, origin at the top-left corner.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Instance identifier. 0 is background, 1..65535 denote instances. An
/// instance's pixels need not be connected: partially occluded objects keep
/// one id across their disjoint parts.
using LabelId = std::uint16_t;
using LabelMap = Plane<LabelId>;

inline constexpr LabelId kMaxLabelId = 65535;

struct GridDims {
  Index height{0};
  Index width{0};

  std::uint64_t pixel_count() const {
    return static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
  }
  bool operator==(const GridDims&) const = default;
};

struct PixelCoord {
  Index x{0};  // column
  Index y{0};  // row
  bool operator==(const PixelCoord&) const = default;
};

template <typename Scalar>
GridDims dims_of(const Plane<Scalar>& plane) {
  return GridDims{plane.rows(), plane.cols()};
}

/// Largest number of instances a grid of this size can carry: every center
/// needs at least one pixel pointing at it, so at most half the resolution.
/// Full HD (1920x1080) gives 1,036,800.
inline std::uint64_t max_instance_bound(GridDims dims) {
  return dims.pixel_count() / 2;
}

/// Per-pixel 2D displacement field stored as two component planes.
/// dx is the horizontal component, dy the vertical one; background pixels of
/// a ground-truth encoding carry exactly (0, 0).
template <typename Scalar>
struct VectorField {
  Plane<Scalar> dx;
  Plane<Scalar> dy;

  Index rows() const { return dx.rows(); }
  Index cols() const { return dx.cols(); }
  GridDims dims() const { return GridDims{dx.rows(), dx.cols()}; }

  static VectorField Zero(Index rows, Index cols) {
    return VectorField{Plane<Scalar>::Zero(rows, cols),
                       Plane<Scalar>::Zero(rows, cols)};
  }

  template <typename To>
  VectorField<To> cast() const {
    return VectorField<To>{dx.template cast<To>(), dy.template cast<To>()};
  }
};

/// The serialized vector-map contract: 32-bit float components. In-memory
/// computation defaults to VectorField<double>.
using VectorMap = VectorField<float>;

template <typename Scalar>
bool all_finite(const VectorField<Scalar>& vm) {
  return vm.dx.isFinite().all() && vm.dy.isFinite().all();
}

/// Per-pixel Euclidean norm of the displacement field. Centers sit at local
/// minima of this surface.
template <typename Scalar>
Plane<Scalar> magnitude_map(const VectorField<Scalar>& vm) {
  return (vm.dx.square() + vm.dy.square()).sqrt();
}

/// Nearest-neighbor subsampling with top-left anchoring: output (r, c) is
/// input (r*factor, c*factor), output dims are the floored quotients. Labels
/// are categorical, so no averaging.
inline LabelMap subsample_nearest(const LabelMap& lm, Index factor) {
  if (factor < 1) throw std::invalid_argument("resample factor must be >= 1");
  if (factor > lm.rows() || factor > lm.cols())
    throw std::invalid_argument("degenerate output");
  const Index out_h = lm.rows() / factor;
  const Index out_w = lm.cols() / factor;
  return lm(Eigen::seqN(0, out_h, factor), Eigen::seqN(0, out_w, factor));
}

/// Subsample, then crop the top-left corner to explicit target dims. Lets a
/// caller reproduce resolutions that a plain floored quotient cannot hit.
inline LabelMap subsample_nearest(const LabelMap& lm, Index factor, GridDims target) {
  LabelMap sampled = subsample_nearest(lm, factor);
  if (target.height < 1 || target.width < 1 || target.height > sampled.rows() ||
      target.width > sampled.cols())
    throw std::invalid_argument("target dims do not fit sampled grid");
  return sampled.topLeftCorner(target.height, target.width);
}

/// Replicates every pixel into a factor x factor block.
inline LabelMap upsample_nearest(const LabelMap& lm, Index factor) {
  if (factor < 1) throw std::invalid_argument("resample factor must be >= 1");
  constexpr Index kMaxIndex = std::numeric_limits<Index>::max();
  if (lm.rows() > kMaxIndex / factor || lm.cols() > kMaxIndex / factor)
    throw std::overflow_error("output dims overflow");
  const Index out_h = lm.rows() * factor;
  const Index out_w = lm.cols() * factor;
  if (out_w > 0 && static_cast<std::uint64_t>(out_h) >
                       std::numeric_limits<std::uint64_t>::max() /
                           static_cast<std::uint64_t>(out_w))
    throw std::overflow_error("output dims overflow");
  std::vector<Index> row_idx(static_cast<std::size_t>(out_h));
  std::vector<Index> col_idx(static_cast<std::size_t>(out_w));
  for (Index r = 0; r < out_h; ++r) row_idx[static_cast<std::size_t>(r)] = r / factor;
  for (Index c = 0; c < out_w; ++c) col_idx[static_cast<std::size_t>(c)] = c / factor;
  return lm(row_idx, col_idx);
}

/// Upsample, then fit to explicit target dims: crop when larger, replicate
/// the last row/column when smaller (nearest semantics at the border).
inline LabelMap upsample_nearest(const LabelMap& lm, Index factor, GridDims target) {
  LabelMap up = upsample_nearest(lm, factor);
  if (target.height < 1 || target.width < 1)
    throw std::invalid_argument("target dims must be positive");
  if (target.height == up.rows() && target.width == up.cols()) return up;
  LabelMap out(target.height, target.width);
  for (Index r = 0; r < target.height; ++r) {
    const Index sr = std::min(r, up.rows() - 1);
    for (Index c = 0; c < target.width; ++c) {
      out(r, c) = up(sr, std::min(c, up.cols() - 1));
    }
  }
  return out;
}

}  // namespace dcme
