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

#ifndef LESIONDET_SPLITS_HPP_
#define LESIONDET_SPLITS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lesiondet {

enum class CaseLabel { kPositive, kNegative };

struct CaseRecord {
  std::string case_id;
  CaseLabel label = CaseLabel::kNegative;
  std::optional<double> lesion_size_mm;
  std::optional<double> age;
  std::optional<char> sex;  // 'M' or 'F'
};

// Quartile cut points and per-input bin index (0..3).
struct QuartileBins {
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  std::vector<int> bin_of;
};

// Nearest-rank quartiles (percentile p -> sorted[ceil(p/100 * n) - 1]).
// Bins are [min,q25], (q25,q50], (q50,q75], (q75,max].
QuartileBins ComputeQuartileBins(std::span<const double> sizes);

struct FoldAssignment {
  int num_folds = 0;
  uint64_t seed = 0;
  std::map<std::string, int> fold_of;

  std::vector<std::vector<std::string>> Folds() const;
};

// Size-stratified, class-balanced K-fold split. Positives are binned by lesion
// size quartile; each bin (sorted by case_id, then shuffled with stream
// (seed, bin)) is dealt round-robin over the folds, continuing from the fold
// where the previous bin stopped. Negatives (shuffled with stream
// (seed, kNegativeStreamTag)) continue the same deal. Per-bin, per-class
// and per-fold totals therefore differ by at most one across folds.
// `warnings` collects non-fatal notes (e.g. fewer positives than folds).
FoldAssignment StratifiedKFold(std::span<const CaseRecord> cases, int k,
                               uint64_t seed,
                               std::vector<std::string>* warnings = nullptr);

inline constexpr uint64_t kNegativeStreamTag = 0x6E6567;  // "neg"

struct FoldStats {
  int positives = 0;
  int negatives = 0;
  std::array<int, 4> per_bin{0, 0, 0, 0};
  double positive_ratio = 0.0;
  std::optional<double> mean_age;
  int male = 0;
  int female = 0;
};

struct SplitReport {
  QuartileBins bins;
  std::vector<FoldStats> folds;
  std::vector<std::string> violations;
};

// Per-fold counts and balance check: flags any bin, positive or negative
// count that differs by more than one between two folds. Throws
// kValidation for unassigned, unknown or out-of-range entries.
SplitReport ValidateSplit(std::span<const CaseRecord> cases,
                          const FoldAssignment& fa);

// CSV with header `case_id,label,lesion_size_mm,age,sex`, label PDAC or
// non-PDAC.
std::vector<CaseRecord> ParseCasesCsv(const std::string& text);

// {"num_folds", "seed", "folds": {"0": [...]}, "report": {...}}
std::string SplitToJson(const FoldAssignment& fa, const SplitReport& report);

}  // namespace lesiondet

#endif  // LESIONDET_SPLITS_HPP_
