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

#include "lesiondet/candidates.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "lesiondet/error.hpp"

namespace lesiondet {

void ExtractionParams::Validate() const {
  if (mode == ThresholdMode::kAdaptive && !(alpha > 0.0 && alpha <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "alpha must be in (0,1]");
  }
  if (mode == ThresholdMode::kFixed && !(tau > 0.0 && tau <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "tau must be in (0,1]");
  }
  if (max_candidates < 1) {
    Fail(ErrorCode::kInvalidArgument, "max_candidates must be >= 1");
  }
  if (!(min_seed_prob >= 0.0 && min_seed_prob <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "min_seed_prob must be in [0,1]");
  }
  if (min_voxels < 0) {
    Fail(ErrorCode::kInvalidArgument, "min_voxels must be >= 0");
  }
}

int IterationCap(const ExtractionParams& params) {
  return std::max(32, 4 * params.max_candidates);
}

namespace {

// Flood fill from `seed` through voxels with work >= threshold. `mark` holds
// the round stamp of voxels already in the region.
std::vector<int64_t> GrowRegion(const Geometry& g, std::span<const float> work,
                                int64_t seed, double threshold,
                                const std::vector<Index3>& offsets,
                                std::vector<uint32_t>& mark, uint32_t stamp) {
  std::vector<int64_t> region{seed};
  std::vector<int64_t> stack{seed};
  mark[seed] = stamp;
  while (!stack.empty()) {
    const int64_t cur = stack.back();
    stack.pop_back();
    const Index3 c = g.Unlinear(cur);
    for (const Index3& d : offsets) {
      const Index3 n{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
      if (!g.Contains(n)) continue;
      const int64_t li = g.Linear(n);
      if (mark[li] == stamp) continue;
      if (!(static_cast<double>(work[li]) >= threshold)) continue;
      mark[li] = stamp;
      region.push_back(li);
      stack.push_back(li);
    }
  }
  std::sort(region.begin(), region.end());
  return region;
}

}  // namespace

DetectionResult ExtractCandidates(const ProbabilityMap& p,
                                  const ExtractionParams& params) {
  params.Validate();
  const Geometry& g = p.geometry();
  const auto original = p.values();
  std::vector<float> work(original.begin(), original.end());
  std::vector<uint32_t> mark(work.size(), 0);
  const auto offsets = NeighborOffsets(params.connectivity);
  const int cap = IterationCap(params);

  DetectionResult result;
  for (int round = 0;
       round < cap &&
       static_cast<int>(result.candidates.size()) < params.max_candidates;
       ++round) {
    const auto best = std::max_element(work.begin(), work.end());
    const int64_t seed = best - work.begin();
    const double seed_prob = *best;
    if (seed_prob < params.min_seed_prob || seed_prob <= 0.0) break;
    const double threshold = params.mode == ThresholdMode::kAdaptive
                                 ? params.alpha * seed_prob
                                 : params.tau;
    auto region = GrowRegion(g, work, seed, threshold, offsets, mark,
                             static_cast<uint32_t>(round + 1));
    double sum = 0.0;
    for (int64_t li : region) {
      sum += work[li];
      work[li] = 0.0f;
    }
    if (static_cast<int64_t>(region.size()) < params.min_voxels) continue;

    Candidate c;
    c.rank = static_cast<int>(result.candidates.size());
    c.seed = g.Unlinear(seed);
    c.seed_prob = seed_prob;
    c.threshold = threshold;
    c.confidence = params.confidence == ConfidenceMode::kSeed
                       ? seed_prob
                       : sum / static_cast<double>(region.size());
    c.voxels = std::move(region);
    result.candidates.push_back(std::move(c));
  }

  std::vector<float> det(work.size(), 0.0f);
  for (const Candidate& c : result.candidates) {
    const float value = static_cast<float>(c.confidence);
    for (int64_t li : c.voxels) det[li] = value;
  }
  result.detection_map = Volume(g, std::move(det));
  return result;
}

double PatientScore(const DetectionResult& d) {
  if (d.candidates.empty()) return 0.0;
  return MaxValue(d.detection_map);
}

std::string CandidatesToJson(const std::string& case_id,
                             const ExtractionParams& params,
                             const DetectionResult& d) {
  using nlohmann::ordered_json;
  ordered_json jp;
  if (params.mode == ThresholdMode::kAdaptive) {
    jp["mode"] = "adaptive";
    jp["alpha"] = params.alpha;
  } else {
    jp["mode"] = "fixed";
    jp["tau"] = params.tau;
  }
  jp["max_candidates"] = params.max_candidates;
  jp["min_seed_prob"] = params.min_seed_prob;
  jp["min_voxels"] = params.min_voxels;
  jp["connectivity"] = static_cast<int>(params.connectivity);
  jp["confidence"] =
      params.confidence == ConfidenceMode::kSeed ? "seed" : "mean";

  ordered_json cands = ordered_json::array();
  for (const Candidate& c : d.candidates) {
    ordered_json jc;
    jc["rank"] = c.rank;
    jc["seed"] = {c.seed[0], c.seed[1], c.seed[2]};
    jc["seed_prob"] = c.seed_prob;
    jc["num_voxels"] = c.voxels.size();
    jc["confidence"] = c.confidence;
    cands.push_back(std::move(jc));
  }
  ordered_json doc;
  doc["case_id"] = case_id;
  doc["params"] = std::move(jp);
  doc["candidates"] = std::move(cands);
  doc["patient_score"] = PatientScore(d);
  return doc.dump(2) + "\n";
}

}  // namespace lesiondet
