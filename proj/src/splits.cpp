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

#include "lesiondet/splits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "io_util.hpp"
#include "json.hpp"
#include "lesiondet/error.hpp"
#include "lesiondet/rng.hpp"

namespace lesiondet {

namespace {

std::size_t NearestRankIndex(int percent, std::size_t n) {
  // ceil(percent * n / 100) - 1 in integer arithmetic.
  const std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  return rank == 0 ? 0 : rank - 1;
}

template <typename T>
void Shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.Below(i);
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<CaseRecord> SortedById(std::span<const CaseRecord> cases) {
  std::vector<CaseRecord> sorted(cases.begin(), cases.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CaseRecord& a, const CaseRecord& b) { return a.case_id < b.case_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].case_id == sorted[i - 1].case_id) {
      Fail(ErrorCode::kValidation, "duplicate case_id '" + sorted[i].case_id + "'");
    }
  }
  for (const CaseRecord& c : sorted) {
    if (c.label == CaseLabel::kPositive &&
        !(c.lesion_size_mm.has_value() && *c.lesion_size_mm > 0.0)) {
      Fail(ErrorCode::kValidation,
           "positive case '" + c.case_id + "' needs a lesion size > 0");
    }
  }
  return sorted;
}

std::vector<double> PositiveSizes(const std::vector<CaseRecord>& sorted) {
  std::vector<double> sizes;
  for (const CaseRecord& c : sorted) {
    if (c.label == CaseLabel::kPositive) sizes.push_back(*c.lesion_size_mm);
  }
  return sizes;
}

}  // namespace

QuartileBins ComputeQuartileBins(std::span<const double> sizes) {
  if (sizes.empty()) Fail(ErrorCode::kEmpty, "quartile bins of an empty list");
  for (double s : sizes) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      Fail(ErrorCode::kValidation, "lesion sizes must be finite and > 0");
    }
  }
  std::vector<double> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  QuartileBins out;
  out.q25 = sorted[NearestRankIndex(25, sorted.size())];
  out.q50 = sorted[NearestRankIndex(50, sorted.size())];
  out.q75 = sorted[NearestRankIndex(75, sorted.size())];
  out.bin_of.reserve(sizes.size());
  for (double s : sizes) {
    out.bin_of.push_back(s <= out.q25 ? 0 : s <= out.q50 ? 1 : s <= out.q75 ? 2 : 3);
  }
  return out;
}

std::vector<std::vector<std::string>> FoldAssignment::Folds() const {
  std::vector<std::vector<std::string>> folds(static_cast<std::size_t>(num_folds));
  for (const auto& [id, f] : fold_of) folds[static_cast<std::size_t>(f)].push_back(id);
  return folds;
}

FoldAssignment StratifiedKFold(std::span<const CaseRecord> cases, int k,
                               uint64_t seed, std::vector<std::string>* warnings) {
  if (k < 2) Fail(ErrorCode::kInvalidArgument, "number of folds must be >= 2");
  const auto sorted = SortedById(cases);

  std::array<std::vector<std::string>, 4> bins;
  std::vector<std::string> negatives;
  const auto sizes = PositiveSizes(sorted);
  if (!sizes.empty()) {
    const auto q = ComputeQuartileBins(sizes);
    std::size_t i = 0;
    for (const CaseRecord& c : sorted) {
      if (c.label == CaseLabel::kPositive) bins[q.bin_of[i++]].push_back(c.case_id);
    }
  }
  for (const CaseRecord& c : sorted) {
    if (c.label == CaseLabel::kNegative) negatives.push_back(c.case_id);
  }
  if (warnings) {
    if (static_cast<int>(sizes.size()) < k) {
      warnings->push_back("only " + std::to_string(sizes.size()) +
                          " positive cases for " + std::to_string(k) + " folds");
    }
    if (static_cast<int>(negatives.size()) < k) {
      warnings->push_back("only " + std::to_string(negatives.size()) +
                          " negative cases for " + std::to_string(k) + " folds");
    }
  }

  FoldAssignment fa;
  fa.num_folds = k;
  fa.seed = seed;
  int next_fold = 0;
  const auto deal = [&](std::vector<std::string>& ids, uint64_t tag) {
    auto rng = SplitMix64::Stream(seed, tag);
    Shuffle(ids, rng);
    for (const std::string& id : ids) {
      fa.fold_of[id] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  };
  for (uint64_t b = 0; b < 4; ++b) deal(bins[b], b);
  deal(negatives, kNegativeStreamTag);
  return fa;
}

SplitReport ValidateSplit(std::span<const CaseRecord> cases,
                          const FoldAssignment& fa) {
  if (fa.num_folds < 2) Fail(ErrorCode::kValidation, "assignment has fewer than 2 folds");
  const auto sorted = SortedById(cases);
  std::set<std::string> known;
  for (const CaseRecord& c : sorted) known.insert(c.case_id);
  for (const auto& [id, f] : fa.fold_of) {
    if (!known.count(id)) Fail(ErrorCode::kValidation, "unknown case_id '" + id + "' in assignment");
    if (f < 0 || f >= fa.num_folds) Fail(ErrorCode::kValidation, "fold index out of range for '" + id + "'");
  }

  SplitReport report;
  report.folds.resize(static_cast<std::size_t>(fa.num_folds));
  const auto sizes = PositiveSizes(sorted);
  if (!sizes.empty()) report.bins = ComputeQuartileBins(sizes);

  std::vector<double> age_sum(report.folds.size(), 0.0);
  std::vector<int> age_n(report.folds.size(), 0);
  std::size_t pos_index = 0;
  for (const CaseRecord& c : sorted) {
    auto it = fa.fold_of.find(c.case_id);
    if (it == fa.fold_of.end()) {
      Fail(ErrorCode::kValidation, "case '" + c.case_id + "' is not assigned");
    }
    const auto f = static_cast<std::size_t>(it->second);
    FoldStats& s = report.folds[f];
    if (c.label == CaseLabel::kPositive) {
      ++s.positives;
      ++s.per_bin[static_cast<std::size_t>(report.bins.bin_of[pos_index++])];
    } else {
      ++s.negatives;
    }
    if (c.age) {
      age_sum[f] += *c.age;
      ++age_n[f];
    }
    if (c.sex == 'M') ++s.male;
    if (c.sex == 'F') ++s.female;
  }
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    FoldStats& s = report.folds[f];
    const int total = s.positives + s.negatives;
    s.positive_ratio = total > 0 ? static_cast<double>(s.positives) / total : 0.0;
    if (age_n[f] > 0) s.mean_age = age_sum[f] / age_n[f];
  }

  const auto check = [&](const std::string& what, auto get) {
    int lo = get(report.folds.front());
    int hi = lo;
    for (const FoldStats& s : report.folds) {
      lo = std::min(lo, get(s));
      hi = std::max(hi, get(s));
    }
    if (hi - lo > 1) {
      report.violations.push_back(what + " counts range from " +
                                  std::to_string(lo) + " to " + std::to_string(hi));
    }
  };
  for (std::size_t b = 0; b < 4; ++b) {
    check("bin " + std::to_string(b), [b](const FoldStats& s) { return s.per_bin[b]; });
  }
  check("positive", [](const FoldStats& s) { return s.positives; });
  check("negative", [](const FoldStats& s) { return s.negatives; });
  return report;
}

std::vector<CaseRecord> ParseCasesCsv(const std::string& text) {
  std::vector<CaseRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view raw : io::Split(text, '\n')) {
    ++line_no;
    std::string_view line = io::Trim(raw);
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (line.empty()) continue;
    const auto cols = io::Split(line, ',');
    const auto where = "cases CSV line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      const std::vector<std::string_view> expected{"case_id", "label", "lesion_size_mm", "age", "sex"};
      bool ok = cols.size() == expected.size();
      for (std::size_t i = 0; ok && i < cols.size(); ++i) ok = io::Trim(cols[i]) == expected[i];
      if (!ok) Fail(ErrorCode::kMalformed, where + "expected header case_id,label,lesion_size_mm,age,sex");
      header_seen = true;
      continue;
    }
    if (cols.size() != 5) Fail(ErrorCode::kMalformed, where + "expected 5 columns");
    CaseRecord c;
    c.case_id = std::string(io::Trim(cols[0]));
    if (c.case_id.empty()) Fail(ErrorCode::kMalformed, where + "empty case_id");
    const auto label = io::Trim(cols[1]);
    if (label == "PDAC") {
      c.label = CaseLabel::kPositive;
    } else if (label == "non-PDAC") {
      c.label = CaseLabel::kNegative;
    } else {
      Fail(ErrorCode::kMalformed, where + "label must be PDAC or non-PDAC");
    }
    double d = 0.0;
    if (const auto size = io::Trim(cols[2]); !size.empty()) {
      if (!io::ParseDouble(size, &d)) Fail(ErrorCode::kMalformed, where + "bad lesion_size_mm");
      c.lesion_size_mm = d;
    }
    if (c.label == CaseLabel::kPositive && !(c.lesion_size_mm && *c.lesion_size_mm > 0.0)) {
      Fail(ErrorCode::kValidation, where + "PDAC case needs lesion_size_mm > 0");
    }
    if (const auto age = io::Trim(cols[3]); !age.empty()) {
      if (!io::ParseDouble(age, &d)) Fail(ErrorCode::kMalformed, where + "bad age");
      c.age = d;
    }
    if (const auto sex = io::Trim(cols[4]); !sex.empty()) {
      if (sex != "M" && sex != "F") Fail(ErrorCode::kMalformed, where + "sex must be M, F or empty");
      c.sex = sex.front();
    }
    out.push_back(std::move(c));
  }
  if (!header_seen) Fail(ErrorCode::kMalformed, "cases CSV is empty");
  return out;
}

std::string SplitToJson(const FoldAssignment& fa, const SplitReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["num_folds"] = fa.num_folds;
  doc["seed"] = fa.seed;
  ordered_json folds = ordered_json::object();
  const auto lists = fa.Folds();
  for (std::size_t f = 0; f < lists.size(); ++f) folds[std::to_string(f)] = lists[f];
  doc["folds"] = std::move(folds);

  ordered_json r;
  r["quartiles"] = {{"q25", report.bins.q25}, {"q50", report.bins.q50}, {"q75", report.bins.q75}};
  ordered_json per_fold = ordered_json::array();
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldStats& s = report.folds[f];
    ordered_json jf;
    jf["fold"] = f;
    jf["positives"] = s.positives;
    jf["negatives"] = s.negatives;
    jf["per_bin"] = s.per_bin;
    jf["positive_ratio"] = s.positive_ratio;
    jf["mean_age"] = s.mean_age ? ordered_json(*s.mean_age) : ordered_json(nullptr);
    jf["male"] = s.male;
    jf["female"] = s.female;
    per_fold.push_back(std::move(jf));
  }
  r["folds"] = std::move(per_fold);
  r["violations"] = report.violations;
  doc["report"] = std::move(r);
  return doc.dump(2) + "\n";
}

}  // namespace lesiondet
