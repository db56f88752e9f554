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

#ifndef LESIONDET_CANDIDATES_HPP_
#define LESIONDET_CANDIDATES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lesiondet/neighborhood.hpp"
#include "lesiondet/volume.hpp"

namespace lesiondet {

enum class ThresholdMode {
  kAdaptive,  // growth threshold = alpha * seed probability
  kFixed,     // growth threshold = tau
};

enum class ConfidenceMode {
  kSeed,  // seed probability
  kMean,  // mean probability over the region
};

struct ExtractionParams {
  ThresholdMode mode = ThresholdMode::kAdaptive;
  double alpha = 1.0 / 15.0;
  double tau = 0.4;
  int max_candidates = 5;
  double min_seed_prob = 1e-6;
  int64_t min_voxels = 10;
  Connectivity connectivity = Connectivity::k26;
  ConfidenceMode confidence = ConfidenceMode::kSeed;

  static ExtractionParams Adaptive(double alpha) {
    ExtractionParams p;
    p.mode = ThresholdMode::kAdaptive;
    p.alpha = alpha;
    return p;
  }
  static ExtractionParams Fixed(double tau) {
    ExtractionParams p;
    p.mode = ThresholdMode::kFixed;
    p.tau = tau;
    return p;
  }

  // Throws kInvalidArgument when alpha/tau are outside (0,1], max_candidates
  // < 1, min_seed_prob outside [0,1] or min_voxels < 0.
  void Validate() const;
};

struct Candidate {
  int rank = 0;
  Index3 seed{0, 0, 0};
  double seed_prob = 0.0;
  double threshold = 0.0;
  // Linear voxel indices, ascending.
  std::vector<int64_t> voxels;
  double confidence = 0.0;
};

struct DetectionResult {
  std::vector<Candidate> candidates;
  // Float-32; each candidate's voxels hold its confidence, 0 elsewhere.
  Volume detection_map;
};

// Iterative seed-and-grow extraction. Each round picks the highest remaining
// voxel (smallest linear index on ties), grows the connected region of voxels
// at or above the round's threshold, removes it from the working map and emits
// it when it has at least min_voxels voxels. Stops after max_candidates
// emissions, when the remaining maximum drops below min_seed_prob or reaches
// zero, or after max(32, 4 * max_candidates) rounds.
DetectionResult ExtractCandidates(const ProbabilityMap& p,
                                  const ExtractionParams& params);

// Largest value of the detection map; 0 without candidates.
double PatientScore(const DetectionResult& d);

// Rounds performed at most by ExtractCandidates.
int IterationCap(const ExtractionParams& params);

// Candidate list document:
// {"case_id", "params", "candidates": [{"rank","seed","seed_prob",
//  "num_voxels","confidence"}], "patient_score"}.
std::string CandidatesToJson(const std::string& case_id,
                             const ExtractionParams& params,
                             const DetectionResult& d);

}  // namespace lesiondet

#endif  // LESIONDET_CANDIDATES_HPP_
