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

#ifndef LESIONDET_SWEEP_HPP_
#define LESIONDET_SWEEP_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lesiondet/candidates.hpp"
#include "lesiondet/evaluation.hpp"

namespace lesiondet {

struct SweepConfig {
  std::vector<double> inverse_alphas{2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};
  std::optional<double> fixed_tau = 0.4;
  std::map<int, std::string> folds;  // fold index -> manifest path
  double min_iou = kDefaultMinIou;

  // Throws kInvalidArgument for non-positive or duplicate 1/alpha values,
  // 1/alpha < 1, a tau outside (0,1] or no folds.
  void Validate() const;
};

// {"inverse_alphas": [...], "include_fixed_tau": 0.4 | null,
//  "folds": {"0": "fold0.json", ...}, "min_iou": 0.1,
//  "extraction": {"max_candidates", "min_voxels", "min_seed_prob",
//                 "connectivity", "confidence"}}
// Manifest paths resolve against `base_dir`. Extraction keys override
// `defaults`.
SweepConfig ParseSweepConfig(const std::string& text, const std::string& base_dir,
                             ExtractionParams* defaults);

struct SweepSetting {
  std::optional<double> inverse_alpha;  // empty: fixed-tau baseline
  double tau = 0.0;
  std::string Descriptor() const;
};

struct SweepRow {
  int fold = 0;
  SweepSetting setting;
  std::optional<double> auroc;  // empty when undefined on the fold
  std::optional<double> ap;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Settings in output order: 1/alpha ascending, then the fixed-tau baseline.
std::vector<SweepSetting> SweepSettings(const SweepConfig& cfg);

// Re-extracts every case of every fold at every setting and records AUROC and
// AP. Probability maps and ground-truth components are loaded once per fold.
SweepResult RunSweep(const SweepConfig& cfg, const ExtractionParams& defaults,
                     int threads = 1);

// fold,setting,inverse_alpha,auroc,ap with 6 significant digits.
std::string SweepToCsv(const SweepResult& r);
// Two panels (AUROC, AP) against 1/alpha, one polyline per fold per metric.
std::string SweepToSvg(const SweepResult& r);

}  // namespace lesiondet

#endif  // LESIONDET_SWEEP_HPP_
