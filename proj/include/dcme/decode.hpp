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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "dcme/grid.hpp"

namespace dcme {

/// Decoding thresholds. dt merges nearby center proposals, vt discards
/// weakly supported centers, et bounds the endpoint-to-center distance for
/// pixel assignment. eps_bg separates background from foreground by vector
/// magnitude, and r_cm rescues the near-zero pixel sitting on the center
/// itself.
struct DecodeParams {
  double dt{10.0};
  int vt{50};
  double et{15.0};
  double eps_bg{0.5};
  double r_cm{1.0};
};

using VoteGrid = Plane<std::int32_t>;

struct CenterCandidate {
  double x{0};
  double y{0};
  std::int64_t votes{0};
};

struct DecodedInstance {
  LabelId label{0};
  CenterCandidate center{};
  std::int64_t pixel_count{0};
  double confidence{0.0};  // votes / pixel_count, clipped to [0, 1]
};

struct DecodeResult {
  LabelMap labels;
  std::vector<DecodedInstance> instances;
};

/// Half-up per axis: 0.5 rounds to 1, -0.5 rounds to 0.
inline Index round_half_up(double v) {
  return static_cast<Index>(std::floor(v + 0.5));
}

inline void validate_params(const DecodeParams& p) {
  if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (p.vt < 1) throw std::invalid_argument("vt must be >= 1");
  if (!(p.et > 0.0)) throw std::invalid_argument("et must be > 0");
  if (p.eps_bg < 0.0) throw std::invalid_argument("eps_bg must be >= 0");
  if (p.r_cm < 0.0) throw std::invalid_argument("r_cm must be >= 0");
}

/// Step 1: each pixel with |D| >= eps_bg casts one vote into the cell its
/// endpoint rounds to. Out-of-bounds endpoints are discarded, not clamped.
template <typename Scalar>
VoteGrid vote_accumulate(const VectorField<Scalar>& vm, double eps_bg) {
  const Index h = vm.rows(), w = vm.cols();
  VoteGrid votes = VoteGrid::Zero(h, w);
  const double eps2 = eps_bg * eps_bg;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double dx = static_cast<double>(vm.dx(r, c));
      const double dy = static_cast<double>(vm.dy(r, c));
      if (dx * dx + dy * dy < eps2) continue;
      const Index cx = round_half_up(static_cast<double>(c) + dx);
      const Index cy = round_half_up(static_cast<double>(r) + dy);
      if (cx < 0 || cx >= w || cy < 0 || cy >= h) continue;
      ++votes(cy, cx);
    }
  }
  return votes;
}

/// Step 2: greedy peak absorption. The unclaimed cell with the most votes
/// (ties: smaller row, then smaller column) absorbs every unclaimed cell
/// within dt of it; the cluster becomes one candidate at the vote-weighted
/// mean position. Candidates are returned by votes descending, ties by
/// position row-major.
inline std::vector<CenterCandidate> cluster_candidates(const VoteGrid& votes, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  struct Cell {
    Index x, y;
    std::int32_t votes;
  };
  std::vector<Cell> cells;
  for (Index r = 0; r < votes.rows(); ++r)
    for (Index c = 0; c < votes.cols(); ++c)
      if (votes(r, c) > 0) cells.push_back(Cell{c, r, votes(r, c)});

  // Row-major gather + stable sort keeps the (row, column) tie order.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&cells](std::size_t a, std::size_t b) {
    return cells[a].votes > cells[b].votes;
  });

  const double dt2 = dt * dt;
  std::vector<char> claimed(cells.size(), 0);
  std::vector<CenterCandidate> out;
  for (std::size_t pi : order) {
    if (claimed[pi]) continue;
    const Cell& peak = cells[pi];
    double wx = 0.0, wy = 0.0;
    std::int64_t total = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (claimed[j]) continue;
      const double ddx = static_cast<double>(cells[j].x - peak.x);
      const double ddy = static_cast<double>(cells[j].y - peak.y);
      if (ddx * ddx + ddy * ddy > dt2) continue;
      claimed[j] = 1;
      wx += static_cast<double>(cells[j].x) * cells[j].votes;
      wy += static_cast<double>(cells[j].y) * cells[j].votes;
      total += cells[j].votes;
    }
    out.push_back(CenterCandidate{wx / static_cast<double>(total),
                                  wy / static_cast<double>(total), total});
  }
  std::sort(out.begin(), out.end(), [](const CenterCandidate& a, const CenterCandidate& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return out;
}

/// Step 3: keep candidates with at least vt votes, order preserved.
inline std::vector<CenterCandidate> select_centers(const std::vector<CenterCandidate>& cands,
                                                   int vt) {
  if (vt < 1) throw std::invalid_argument("vt must be >= 1");
  std::vector<CenterCandidate> out;
  std::copy_if(cands.begin(), cands.end(), std::back_inserter(out),
               [vt](const CenterCandidate& c) { return c.votes >= vt; });
  return out;
}

/// Step 4: a foreground pixel joins the nearest center (ties: lower index)
/// if its endpoint lands within et of it, otherwise background. A pixel
/// whose own vector is below eps_bg is rescued as the center pixel itself
/// when it sits strictly within r_cm of a center. On a clean decoding,
/// candidates land on integer cells: the center pixel is at distance 0 and
/// genuine background at distance >= 1, so the strict comparison separates
/// them. Labels are 1..K in center order.
template <typename Scalar>
LabelMap assign_pixels(const VectorField<Scalar>& vm,
                       const std::vector<CenterCandidate>& centers,
                       const DecodeParams& params) {
  if (centers.size() > static_cast<std::size_t>(kMaxLabelId))
    throw std::invalid_argument("too many centers for 16-bit labels");
  const Index h = vm.rows(), w = vm.cols();
  LabelMap labels = LabelMap::Zero(h, w);
  if (centers.empty()) return labels;
  const double eps2 = params.eps_bg * params.eps_bg;
  const double et2 = params.et * params.et;
  const double rcm2 = params.r_cm * params.r_cm;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double dx = static_cast<double>(vm.dx(r, c));
      const double dy = static_cast<double>(vm.dy(r, c));
      const bool foreground = dx * dx + dy * dy >= eps2;
      const double px = static_cast<double>(c) + (foreground ? dx : 0.0);
      const double py = static_cast<double>(r) + (foreground ? dy : 0.0);
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double ddx = px - centers[k].x;
        const double ddy = py - centers[k].y;
        const double d2 = ddx * ddx + ddy * ddy;
        if (d2 < best) {
          best = d2;
          best_k = k;
        }
      }
      if (foreground ? best <= et2 : best < rcm2)
        labels(r, c) = static_cast<LabelId>(best_k + 1);
    }
  }
  return labels;
}

namespace detail {

/// Drops centers that claimed no pixels, compacts labels to 1..N, and
/// attaches per-instance confidences.
inline DecodeResult finalize_instances(LabelMap raw,
                                       const std::vector<CenterCandidate>& centers) {
  std::vector<std::int64_t> counts(centers.size() + 1, 0);
  for (Index r = 0; r < raw.rows(); ++r)
    for (Index c = 0; c < raw.cols(); ++c) ++counts[raw(r, c)];
  std::vector<LabelId> remap(centers.size() + 1, 0);
  std::vector<DecodedInstance> instances;
  LabelId next = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    remap[i] = ++next;
    const CenterCandidate& cand = centers[i - 1];
    DecodedInstance inst;
    inst.label = next;
    inst.center = cand;
    inst.pixel_count = counts[i];
    inst.confidence =
        std::min(1.0, static_cast<double>(cand.votes) / static_cast<double>(counts[i]));
    instances.push_back(inst);
  }
  if (static_cast<std::size_t>(next) != centers.size()) {
    for (Index r = 0; r < raw.rows(); ++r)
      for (Index c = 0; c < raw.cols(); ++c) raw(r, c) = remap[raw(r, c)];
  }
  return DecodeResult{std::move(raw), std::move(instances)};
}

template <typename Scalar>
std::vector<CenterCandidate> selected_centers(const VectorField<Scalar>& vm,
                                              const DecodeParams& params) {
  validate_params(params);
  VoteGrid votes = vote_accumulate(vm, params.eps_bg);
  std::vector<CenterCandidate> centers =
      select_centers(cluster_candidates(votes, params.dt), params.vt);
  // The 16-bit id space caps the output; candidates are votes-descending so
  // truncation keeps the strongest.
  if (centers.size() > static_cast<std::size_t>(kMaxLabelId))
    centers.resize(static_cast<std::size_t>(kMaxLabelId));
  return centers;
}

}  // namespace detail

/// Full four-step decoding: vote, cluster, select, assign. Centers whose
/// instance ends up empty are dropped and labels compacted.
template <typename Scalar>
DecodeResult decode(const VectorField<Scalar>& vm, const DecodeParams& params) {
  std::vector<CenterCandidate> centers = detail::selected_centers(vm, params);
  LabelMap raw = assign_pixels(vm, centers, params);
  return detail::finalize_instances(std::move(raw), centers);
}

/// Variant with step 4 replaced by marker-based priority flood on the
/// magnitude surface. Markers are the selected centers rounded half-up and
/// clamped in-bounds; only foreground pixels (|D| >= eps_bg) are flooded, in
/// ascending magnitude order with ties broken by row-major pixel order,
/// 4-connectivity. A marker that falls on a sub-epsilon cell is not labeled
/// itself but still seeds its foreground neighbors. Foreground pixels
/// unreachable from every marker stay background.
template <typename Scalar>
DecodeResult decode_watershed(const VectorField<Scalar>& vm, const DecodeParams& params) {
  std::vector<CenterCandidate> centers = detail::selected_centers(vm, params);
  const Index h = vm.rows(), w = vm.cols();
  LabelMap raw = LabelMap::Zero(h, w);
  if (centers.empty()) return detail::finalize_instances(std::move(raw), centers);

  // Squared magnitude orders identically to magnitude and stays exact.
  Plane<double> sqmag =
      vm.dx.template cast<double>().square() + vm.dy.template cast<double>().square();
  const double eps2 = params.eps_bg * params.eps_bg;

  struct Entry {
    double key;
    std::int64_t rm;
    std::int64_t seq;
    LabelId label;
  };
  struct PopsLater {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.key != b.key) return a.key > b.key;
      if (a.rm != b.rm) return a.rm > b.rm;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, PopsLater> frontier;
  std::int64_t seq = 0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const Index cx = std::clamp<Index>(round_half_up(centers[k].x), 0, w - 1);
    const Index cy = std::clamp<Index>(round_half_up(centers[k].y), 0, h - 1);
    frontier.push(Entry{sqmag(cy, cx), cy * w + cx, seq++, static_cast<LabelId>(k + 1)});
  }
  constexpr Index kDr[4] = {-1, 0, 0, 1};
  constexpr Index kDc[4] = {0, -1, 1, 0};
  while (!frontier.empty()) {
    const Entry e = frontier.top();
    frontier.pop();
    const Index r = static_cast<Index>(e.rm / w);
    const Index c = static_cast<Index>(e.rm % w);
    if (raw(r, c) != 0) continue;
    if (sqmag(r, c) >= eps2) raw(r, c) = e.label;
    for (int i = 0; i < 4; ++i) {
      const Index nr = r + kDr[i];
      const Index nc = c + kDc[i];
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      if (raw(nr, nc) != 0 || sqmag(nr, nc) < eps2) continue;
      frontier.push(Entry{sqmag(nr, nc), nr * w + nc, seq++, e.label});
    }
  }
  return detail::finalize_instances(std::move(raw), centers);
}

}  // namespace dcme
