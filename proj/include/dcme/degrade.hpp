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
#include <random>
#include <stdexcept>

#include "dcme/grid.hpp"

namespace dcme {

/// Seeded degradation emulating segmentation-network output: Gaussian jitter
/// on the components plus an optional box blur.
struct NoiseSpec {
  double sigma_fg{0.0};
  double sigma_bg{0.0};
  int blur_radius{0};
  std::uint64_t seed{0};
};

using Mask = Plane<bool>;

/// Foreground per the exact-zero background convention of ground-truth
/// encodings.
template <typename Scalar>
Mask nonzero_mask(const VectorField<Scalar>& vm) {
  return vm.dx != Scalar(0) || vm.dy != Scalar(0);
}

/// Adds an independent Gaussian sample to every component, scaled by
/// sigma_fg on mask-true pixels and sigma_bg elsewhere. The stream is
/// consumed in row-major pixel order, x before y, and does not depend on the
/// mask content, so a given seed always yields the same draws.
template <typename Scalar>
VectorField<Scalar> gaussian_perturb(const VectorField<Scalar>& vm, const Mask& fg_mask,
                                     const NoiseSpec& spec) {
  if (fg_mask.rows() != vm.rows() || fg_mask.cols() != vm.cols())
    throw std::invalid_argument("mask dims mismatch");
  if (spec.sigma_fg < 0.0 || spec.sigma_bg < 0.0)
    throw std::invalid_argument("sigma must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  VectorField<Scalar> out = vm;
  for (Index r = 0; r < vm.rows(); ++r) {
    for (Index c = 0; c < vm.cols(); ++c) {
      const double sigma = fg_mask(r, c) ? spec.sigma_fg : spec.sigma_bg;
      const double nx = unit(rng);
      const double ny = unit(rng);
      out.dx(r, c) = static_cast<Scalar>(static_cast<double>(vm.dx(r, c)) + sigma * nx);
      out.dy(r, c) = static_cast<Scalar>(static_cast<double>(vm.dy(r, c)) + sigma * ny);
    }
  }
  return out;
}

namespace detail {

/// Symmetric reflection with the edge sample included: -1 maps to 0, n maps
/// to n-1. Folded so any radius is valid.
inline Index reflect_index(Index i, Index n) {
  if (n == 1) return 0;
  const Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

template <typename Scalar>
Plane<Scalar> box_blur_plane(const Plane<Scalar>& in, Index radius) {
  const Index h = in.rows(), w = in.cols();
  const double window = static_cast<double>(2 * radius + 1);
  Plane<double> horiz(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k)
        acc += static_cast<double>(in(r, reflect_index(c + k, w)));
      horiz(r, c) = acc / window;
    }
  }
  Plane<Scalar> out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (Index k = -radius; k <= radius; ++k)
        acc += horiz(reflect_index(r + k, h), c);
      out(r, c) = static_cast<Scalar>(acc / window);
    }
  }
  return out;
}

}  // namespace detail

/// Separable per-component mean filter over a (2r+1)^2 window with edge
/// reflection.
template <typename Scalar>
VectorField<Scalar> box_blur(const VectorField<Scalar>& vm, int radius) {
  if (radius < 0) throw std::invalid_argument("blur radius must be >= 0");
  if (radius == 0) return vm;
  return VectorField<Scalar>{detail::box_blur_plane(vm.dx, radius),
                             detail::box_blur_plane(vm.dy, radius)};
}

/// Applies the full spec: perturb, then blur.
template <typename Scalar>
VectorField<Scalar> degrade(const VectorField<Scalar>& vm, const Mask& fg_mask,
                            const NoiseSpec& spec) {
  return box_blur(gaussian_perturb(vm, fg_mask, spec), spec.blur_radius);
}

}  // namespace dcme
