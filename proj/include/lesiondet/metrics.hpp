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

#ifndef LESIONDET_METRICS_HPP_
#define LESIONDET_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesiondet/candidates.hpp"
#include "lesiondet/neighborhood.hpp"
#include "lesiondet/splits.hpp"
#include "lesiondet/volume.hpp"

namespace lesiondet {

// One connected component of a ground-truth mask.
struct GtLesion {
  int lesion_id = 0;
  std::vector<int64_t> voxels;  // linear indices, ascending
};

// Connected components of voxels with value != 0. Ids follow the order of
// each component's smallest linear index.
std::vector<GtLesion> LabelComponents(const Volume& mask, Connectivity c);

struct CandidateMatch {
  int rank = 0;
  double confidence = 0.0;
  std::optional<int> lesion_id;  // empty for a false positive
  double iou = 0.0;              // IoU with the matched lesion
};

inline constexpr double kDefaultMinIou = 0.10;

// Greedy matching: candidates in descending confidence (ties by rank) take the
// unmatched lesion with the largest IoU (ties by lesion id) when that IoU is
// at least `min_iou`. Result is indexed like `cands`.
std::vector<CandidateMatch> MatchCandidates(std::span<const Candidate> cands,
                                            std::span<const GtLesion> lesions,
                                            double min_iou = kDefaultMinIou);

struct CaseEval {
  std::string case_id;
  CaseLabel label = CaseLabel::kNegative;
  double patient_score = 0.0;
  std::vector<CandidateMatch> matches;
  int num_gt_lesions = 0;
};

// Mann-Whitney AUROC with ties counted as one half. Throws kUndefinedMetric
// when either list is empty.
double Auroc(std::span<const double> positives, std::span<const double> negatives);
double Auroc(std::span<const CaseEval> cases);

struct ScoredDetection {
  std::string case_id;
  int rank = 0;
  double confidence = 0.0;
  bool true_positive = false;
};

// All-points AP over detections pooled across cases, ranked by confidence
// (ties by case_id, then rank, then input order). Recall is relative to
// `total_gt_lesions`; throws kUndefinedMetric when it is 0.
double AveragePrecision(std::span<const ScoredDetection> detections,
                        int64_t total_gt_lesions);
double AveragePrecision(std::span<const CaseEval> cases);

enum class Metric { kAuroc, kAveragePrecision };

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapOptions {
  int n_resamples = 1000;
  uint64_t seed = 42;
  double level = 0.95;
  int threads = 1;
};

// Case-level percentile bootstrap. Attempt a draws its cases from
// SplitMix64::Stream(seed, a); attempts whose metric is undefined are skipped,
// up to 10 * n_resamples attempts in total. Bounds are nearest-rank
// percentiles of the accepted resamples. Results do not depend on `threads`.
Interval BootstrapCi(std::span<const CaseEval> cases, Metric metric,
                     const BootstrapOptions& options);

}  // namespace lesiondet

#endif  // LESIONDET_METRICS_HPP_
