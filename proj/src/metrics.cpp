/*
 * Copyright 2026 The lesiondet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lesiondet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lesiondet/error.hpp"
#include "lesiondet/rng.hpp"
#include "parallel.hpp"

namespace lesiondet {

std::vector<GtLesion> LabelComponents(const Volume& mask, Connectivity c) {
  const Geometry& g = mask.geometry();
  const auto offsets = NeighborOffsets(c);
  const int64_t n = mask.size();
  std::vector<uint8_t> seen(static_cast<std::size_t>(n), 0);
  std::vector<GtLesion> out;
  std::vector<int64_t> stack;
  for (int64_t start = 0; start < n; ++start) {
    if (seen[start] || mask.At(start) == 0.0) continue;
    GtLesion lesion;
    lesion.lesion_id = static_cast<int>(out.size());
    seen[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int64_t cur = stack.back();
      stack.pop_back();
      lesion.voxels.push_back(cur);
      const Index3 p = g.Unlinear(cur);
      for (const Index3& d : offsets) {
        const Index3 q{p[0] + d[0], p[1] + d[1], p[2] + d[2]};
        if (!g.Contains(q)) continue;
        const int64_t li = g.Linear(q);
        if (seen[li] || mask.At(li) == 0.0) continue;
        seen[li] = 1;
        stack.push_back(li);
      }
    }
    std::sort(lesion.voxels.begin(), lesion.voxels.end());
    out.push_back(std::move(lesion));
  }
  return out;
}

std::vector<CandidateMatch> MatchCandidates(std::span<const Candidate> cands,
                                            std::span<const GtLesion> lesions,
                                            double min_iou) {
  std::unordered_map<int64_t, std::size_t> owner;
  for (std::size_t l = 0; l < lesions.size(); ++l) {
    for (int64_t v : lesions[l].voxels) owner.emplace(v, l);
  }
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cands[a].confidence != cands[b].confidence) {
      return cands[a].confidence > cands[b].confidence;
    }
    return cands[a].rank < cands[b].rank;
  });

  std::vector<CandidateMatch> out(cands.size());
  std::vector<bool> taken(lesions.size(), false);
  std::vector<int64_t> overlap(lesions.size(), 0);
  for (std::size_t ci : order) {
    const Candidate& c = cands[ci];
    CandidateMatch& m = out[ci];
    m.rank = c.rank;
    m.confidence = c.confidence;
    std::fill(overlap.begin(), overlap.end(), 0);
    for (int64_t v : c.voxels) {
      if (auto it = owner.find(v); it != owner.end()) ++overlap[it->second];
    }
    double best = -1.0;
    std::size_t best_l = 0;
    for (std::size_t l = 0; l < lesions.size(); ++l) {
      if (taken[l] || overlap[l] == 0) continue;
      const double uni = static_cast<double>(c.voxels.size() + lesions[l].voxels.size()) -
                         static_cast<double>(overlap[l]);
      const double iou = static_cast<double>(overlap[l]) / uni;
      if (iou > best) {
        best = iou;
        best_l = l;
      }
    }
    if (best >= min_iou && best > 0.0) {
      taken[best_l] = true;
      m.lesion_id = lesions[best_l].lesion_id;
      m.iou = best;
    }
  }
  return out;
}

double Auroc(std::span<const double> positives, std::span<const double> negatives) {
  if (positives.empty() || negatives.empty()) {
    Fail(ErrorCode::kUndefinedMetric, "undefined AUROC: a class has no cases");
  }
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(positives.size() + negatives.size());
  for (double s : positives) items.push_back({s, true});
  for (double s : negatives) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score < b.score; });
  // Sum of midranks of the positives (ranks start at 1).
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    int64_t pos_in_group = 0;
    while (j < items.size() && items[j].score == items[i].score) {
      pos_in_group += items[j].positive;
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double Auroc(std::span<const CaseEval> cases) {
  std::vector<double> pos, neg;
  for (const CaseEval& c : cases) {
    (c.label == CaseLabel::kPositive ? pos : neg).push_back(c.patient_score);
  }
  return Auroc(pos, neg);
}

double AveragePrecision(std::span<const ScoredDetection> detections,
                        int64_t total_gt_lesions) {
  if (total_gt_lesions <= 0) {
    Fail(ErrorCode::kUndefinedMetric, "undefined AP: no ground-truth lesions");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = detections[a];
    const auto& y = detections[b];
    if (x.confidence != y.confidence) return x.confidence > y.confidence;
    if (x.case_id != y.case_id) return x.case_id < y.case_id;
    return x.rank < y.rank;
  });
  const double total = static_cast<double>(total_gt_lesions);
  double ap = 0.0;
  double prev_recall = 0.0;
  int64_t tp = 0;
  for (std::size_t n = 0; n < order.size(); ++n) {
    if (!detections[order[n]].true_positive) continue;
    ++tp;
    const double recall = static_cast<double>(tp) / total;
    const double precision = static_cast<double>(tp) / static_cast<double>(n + 1);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double AveragePrecision(std::span<const CaseEval> cases) {
  std::vector<ScoredDetection> dets;
  int64_t lesions = 0;
  for (const CaseEval& c : cases) {
    lesions += c.num_gt_lesions;
    for (const CandidateMatch& m : c.matches) {
      dets.push_back({c.case_id, m.rank, m.confidence, m.lesion_id.has_value()});
    }
  }
  return AveragePrecision(dets, lesions);
}

namespace {

bool MetricDefined(std::span<const CaseEval> cases, Metric metric) {
  if (metric == Metric::kAuroc) {
    bool pos = false, neg = false;
    for (const CaseEval& c : cases) {
      (c.label == CaseLabel::kPositive ? pos : neg) = true;
    }
    return pos && neg;
  }
  for (const CaseEval& c : cases) {
    if (c.num_gt_lesions > 0) return true;
  }
  return false;
}

double ComputeMetric(std::span<const CaseEval> cases, Metric metric) {
  return metric == Metric::kAuroc ? Auroc(cases) : AveragePrecision(cases);
}

double NearestRank(const std::vector<double>& sorted, double fraction) {
  // ceil(fraction * m) - 1, with slack for binary representation of fraction.
  const double m = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(fraction * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

Interval BootstrapCi(std::span<const CaseEval> cases, Metric metric,
                     const BootstrapOptions& options) {
  if (cases.empty()) Fail(ErrorCode::kEmpty, "bootstrap over an empty case list");
  if (options.n_resamples < 1) Fail(ErrorCode::kInvalidArgument, "n_resamples must be >= 1");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "confidence level must be in (0,1)");
  }
  if (!MetricDefined(cases, metric)) {
    Fail(ErrorCode::kUndefinedMetric, "metric undefined on the original sample");
  }
  const std::size_t n = cases.size();
  const std::size_t wanted = static_cast<std::size_t>(options.n_resamples);
  const std::size_t max_attempts = 10 * wanted;

  std::vector<double> accepted;
  accepted.reserve(wanted);
  std::size_t attempt = 0;
  while (accepted.size() < wanted && attempt < max_attempts) {
    const std::size_t batch = std::min(wanted - accepted.size(), max_attempts - attempt);
    std::vector<std::optional<double>> values(batch);
    internal::ParallelFor(batch, options.threads, [&](std::size_t i) {
      auto rng = SplitMix64::Stream(options.seed, attempt + i);
      std::vector<CaseEval> sample;
      sample.reserve(n);
      for (std::size_t d = 0; d < n; ++d) sample.push_back(cases[rng.Below(n)]);
      if (MetricDefined(sample, metric)) values[i] = ComputeMetric(sample, metric);
    });
    for (const auto& v : values) {
      if (v && accepted.size() < wanted) accepted.push_back(*v);
    }
    attempt += batch;
  }
  if (accepted.empty()) {
    Fail(ErrorCode::kUndefinedMetric, "no bootstrap resample had a defined metric");
  }
  std::sort(accepted.begin(), accepted.end());
  const double tail = (1.0 - options.level) / 2.0;
  return {NearestRank(accepted, tail), NearestRank(accepted, 1.0 - tail)};
}

}  // namespace lesiondet
