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
// Instance-level evaluation: mask IoU, greedy confidence-ranked matching,
// and Average Precision over a sweep of IoU thresholds with all-point
// interpolation of the precision envelope.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dcme/grid.hpp"

namespace dcme {

/// One instance mask as sorted row-major linear pixel indices.
struct EvalInstance {
  std::vector<std::int64_t> pixels;
  int class_id{1};
  double confidence{1.0};
  int source_label{0};  // label value in the originating map, 0 if n/a
};

inline double iou(const EvalInstance& a, const EvalInstance& b) {
  if (a.pixels.empty() || b.pixels.empty())
    throw std::invalid_argument("iou of empty mask");
  std::size_t i = 0, j = 0;
  std::int64_t inter = 0;
  while (i < a.pixels.size() && j < b.pixels.size()) {
    if (a.pixels[i] == b.pixels[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a.pixels[i] < b.pixels[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::int64_t uni =
      static_cast<std::int64_t>(a.pixels.size() + b.pixels.size()) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Processing order for predictions: confidence descending, ties by larger
/// mask, then input order.
inline std::vector<std::size_t> ranked_order(const std::vector<EvalInstance>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&preds](std::size_t a, std::size_t b) {
    if (preds[a].confidence != preds[b].confidence)
      return preds[a].confidence > preds[b].confidence;
    return preds[a].pixels.size() > preds[b].pixels.size();
  });
  return order;
}

struct MatchStats {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (pred, gt) indices
  int tp{0};
  int fp{0};
  int fn{0};
};

/// Greedy matching: each prediction, in ranked order, takes the unmatched
/// same-class ground truth of highest IoU when that IoU reaches thr (ties:
/// lowest gt index). Each ground truth matches at most once.
inline MatchStats match_instances(const std::vector<EvalInstance>& preds,
                                  const std::vector<EvalInstance>& gts, double thr) {
  if (!(thr > 0.0) || thr > 1.0) throw std::invalid_argument("thr must be in (0, 1]");
  MatchStats stats;
  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t pi : ranked_order(preds)) {
    double best = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi] || gts[gi].class_id != preds[pi].class_id) continue;
      const double v = iou(preds[pi], gts[gi]);
      if (v >= thr && v > best) {
        best = v;
        best_gt = gi;
      }
    }
    if (best_gt < gts.size()) {
      gt_taken[best_gt] = true;
      stats.matches.emplace_back(pi, best_gt);
    }
  }
  stats.tp = static_cast<int>(stats.matches.size());
  stats.fp = static_cast<int>(preds.size()) - stats.tp;
  stats.fn = static_cast<int>(gts.size()) - stats.tp;
  return stats;
}

inline std::vector<double> default_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

struct ClassAp {
  double ap{0.0};
  double ap50{0.0};
};

struct ApReport {
  double ap{0.0};
  double ap50{0.0};
  std::map<int, ClassAp> per_class;
};

namespace detail {

/// AP for one class at one threshold: walk the ranked predictions, take the
/// precision envelope from the right, and sum it over the true-positive
/// ranks (each contributes a 1/n_gt recall step).
inline double ap_single(const std::vector<EvalInstance>& preds,
                        const std::vector<EvalInstance>& gts, double thr) {
  if (gts.empty()) return 0.0;
  const MatchStats stats = match_instances(preds, gts, thr);
  std::vector<bool> is_tp_by_pred(preds.size(), false);
  for (const auto& [pi, gi] : stats.matches) is_tp_by_pred[pi] = true;
  const std::vector<std::size_t> order = ranked_order(preds);
  const std::size_t n = order.size();
  std::vector<double> precision(n);
  std::vector<bool> is_tp(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    is_tp[k] = is_tp_by_pred[order[k]];
    if (is_tp[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  double envelope = 0.0;
  std::vector<double> env(n);
  for (std::size_t k = n; k-- > 0;) {
    envelope = std::max(envelope, precision[k]);
    env[k] = envelope;
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (is_tp[k]) ap += env[k];
  return ap / static_cast<double>(gts.size());
}

}  // namespace detail

/// Per-class AP averaged over the threshold sweep; the report AP averages
/// over the classes present in ground truth. ap50 is always evaluated at
/// threshold 0.50 regardless of the sweep.
inline ApReport average_precision(const std::vector<EvalInstance>& preds,
                                  const std::vector<EvalInstance>& gts,
                                  const std::vector<double>& thresholds) {
  if (gts.empty()) throw std::invalid_argument("nothing to evaluate");
  if (thresholds.empty()) throw std::invalid_argument("thresholds must be non-empty");
  std::vector<int> classes;
  for (const EvalInstance& g : gts) classes.push_back(g.class_id);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  ApReport report;
  for (int cls : classes) {
    std::vector<EvalInstance> p_cls, g_cls;
    for (const EvalInstance& p : preds)
      if (p.class_id == cls) p_cls.push_back(p);
    for (const EvalInstance& g : gts)
      if (g.class_id == cls) g_cls.push_back(g);
    double sum = 0.0;
    for (double thr : thresholds) sum += detail::ap_single(p_cls, g_cls, thr);
    ClassAp entry;
    entry.ap = sum / static_cast<double>(thresholds.size());
    entry.ap50 = detail::ap_single(p_cls, g_cls, 0.50);
    report.per_class[cls] = entry;
    report.ap += entry.ap;
    report.ap50 += entry.ap50;
  }
  report.ap /= static_cast<double>(classes.size());
  report.ap50 /= static_cast<double>(classes.size());
  return report;
}

inline ApReport average_precision(const std::vector<EvalInstance>& preds,
                                  const std::vector<EvalInstance>& gts) {
  return average_precision(preds, gts, default_iou_thresholds());
}

/// Extracts instances from a label map, ascending label order. Classes come
/// from the majority vote over the aligned class map (ties: smaller class);
/// without a class map everything is class 1.
inline std::vector<EvalInstance> instances_from_label_map(const LabelMap& lm,
                                                          const LabelMap* class_map = nullptr,
                                                          double confidence = 1.0) {
  if (class_map != nullptr &&
      (class_map->rows() != lm.rows() || class_map->cols() != lm.cols()))
    throw std::invalid_argument("class map dims mismatch");
  std::map<LabelId, EvalInstance> by_label;
  std::map<LabelId, std::map<int, std::int64_t>> class_votes;
  for (Index r = 0; r < lm.rows(); ++r) {
    for (Index c = 0; c < lm.cols(); ++c) {
      const LabelId id = lm(r, c);
      if (id == 0) continue;
      by_label[id].pixels.push_back(r * lm.cols() + c);
      if (class_map != nullptr) ++class_votes[id][(*class_map)(r, c)];
    }
  }
  std::vector<EvalInstance> out;
  for (auto& [id, inst] : by_label) {
    inst.confidence = confidence;
    inst.source_label = id;
    if (class_map != nullptr) {
      std::int64_t best = -1;
      for (const auto& [cls, n] : class_votes[id])
        if (n > best) {
          best = n;
          inst.class_id = cls;
        }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

/// Fraction of pixels that agree under the matched-instance correspondence:
/// background must stay background, and an instance pixel must carry the
/// label matched (at IoU 0.5) to its ground-truth instance.
inline double pixel_accuracy(const LabelMap& pred, const LabelMap& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("dims mismatch");
  const std::vector<EvalInstance> p = instances_from_label_map(pred);
  const std::vector<EvalInstance> g = instances_from_label_map(gt);
  std::unordered_map<int, int> gt_to_pred;
  if (!p.empty() && !g.empty()) {
    for (const auto& [pi, gi] : match_instances(p, g, 0.5).matches)
      gt_to_pred[g[gi].source_label] = p[pi].source_label;
  }
  std::int64_t good = 0;
  for (Index r = 0; r < gt.rows(); ++r) {
    for (Index c = 0; c < gt.cols(); ++c) {
      const LabelId gv = gt(r, c);
      const LabelId pv = pred(r, c);
      if (gv == 0) {
        if (pv == 0) ++good;
      } else {
        auto it = gt_to_pred.find(gv);
        if (it != gt_to_pred.end() && pv == it->second) ++good;
      }
    }
  }
  return static_cast<double>(good) / static_cast<double>(gt.size());
}

}  // namespace dcme
