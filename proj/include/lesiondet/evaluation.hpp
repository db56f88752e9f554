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

#ifndef LESIONDET_EVALUATION_HPP_
#define LESIONDET_EVALUATION_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesiondet/candidates.hpp"
#include "lesiondet/metrics.hpp"

namespace lesiondet {

// One entry of an evaluation manifest. Paths are resolved against the
// manifest's directory.
struct ManifestEntry {
  std::string case_id;
  CaseLabel label = CaseLabel::kNegative;
  std::optional<std::string> detection;
  std::optional<std::string> probability;
  std::optional<std::string> gt;
};

// [{"case_id", "label": "PDAC"|"non-PDAC", "detection"|"probability", "gt"}]
std::vector<ManifestEntry> ParseManifest(const std::string& text,
                                         const std::string& base_dir);
std::vector<ManifestEntry> ReadManifest(const std::string& path);

// Candidates stored in a detection map: 26-connected regions of one constant
// non-zero value, ranked by value (descending) then smallest linear index.
std::vector<Candidate> CandidatesFromDetectionMap(const Volume& det);

// Ground-truth lesions of `gt` (26-connectivity), or none without a mask.
std::vector<GtLesion> GroundTruthLesions(const std::optional<Volume>& gt,
                                         const Geometry& expected);

CaseEval EvaluateCase(const std::string& case_id, CaseLabel label,
                      std::span<const Candidate> candidates,
                      double patient_score,
                      std::span<const GtLesion> lesions, double min_iou);

struct EvalOptions {
  double min_iou = kDefaultMinIou;
  int bootstrap = 1000;  // 0 disables intervals
  uint64_t seed = 42;
  double level = 0.95;
  ExtractionParams extraction;  // for entries with a probability map
  int threads = 1;
};

struct EvalReport {
  double auroc = 0.0;
  double ap = 0.0;
  std::optional<Interval> auroc_ci;
  std::optional<Interval> ap_ci;
  int n_cases = 0;
  int n_lesions = 0;
  std::vector<CaseEval> per_case;
};

// Metrics and bootstrap intervals over already matched cases.
EvalReport Summarize(std::vector<CaseEval> cases, const EvalOptions& options);

// Loads, extracts when needed, matches and summarizes every manifest entry.
EvalReport EvaluateManifest(std::span<const ManifestEntry> entries,
                            const EvalOptions& options);

std::string ReportToJson(const EvalReport& report, const EvalOptions& options);
// case_id,label,patient_score,num_gt_lesions,num_candidates,num_tp,num_fp
std::string ReportToCsv(const EvalReport& report);

}  // namespace lesiondet

#endif  // LESIONDET_EVALUATION_HPP_
