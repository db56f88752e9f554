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

#include "lesiondet/evaluation.hpp"

#include <algorithm>
#include <filesystem>

#include "io_util.hpp"
#include "json.hpp"
#include "lesiondet/error.hpp"
#include "parallel.hpp"

namespace lesiondet {

namespace {

std::string Resolve(const std::string& base_dir, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (std::filesystem::path(base_dir) / path).string();
}

std::optional<std::string> OptionalPath(const nlohmann::json& j, const char* key,
                                        const std::string& base_dir) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Resolve(base_dir, j.at(key).get<std::string>());
}

nlohmann::ordered_json IntervalJson(const std::optional<Interval>& ci) {
  if (!ci) return nullptr;
  return {ci->lower, ci->upper};
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(const std::string& text,
                                         const std::string& base_dir) {
  std::vector<ManifestEntry> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_array()) Fail(ErrorCode::kMalformed, "manifest must be a JSON array");
    for (const auto& j : doc) {
      ManifestEntry e;
      e.case_id = j.at("case_id").get<std::string>();
      const auto label = j.at("label").get<std::string>();
      if (label == "PDAC") {
        e.label = CaseLabel::kPositive;
      } else if (label == "non-PDAC") {
        e.label = CaseLabel::kNegative;
      } else {
        Fail(ErrorCode::kMalformed, "manifest label must be PDAC or non-PDAC");
      }
      e.detection = OptionalPath(j, "detection", base_dir);
      e.probability = OptionalPath(j, "probability", base_dir);
      e.gt = OptionalPath(j, "gt", base_dir);
      if (e.detection.has_value() == e.probability.has_value()) {
        Fail(ErrorCode::kMalformed, "manifest entry '" + e.case_id +
                                        "' needs exactly one of detection or probability");
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformed, std::string("manifest JSON: ") + e.what());
  }
  std::vector<std::string> ids;
  for (const auto& e : out) ids.push_back(e.case_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    Fail(ErrorCode::kValidation, "manifest has duplicate case_id");
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  return ParseManifest(io::ReadFileText(path),
                       std::filesystem::path(path).parent_path().string());
}

std::vector<Candidate> CandidatesFromDetectionMap(const Volume& det) {
  const Geometry& g = det.geometry();
  const auto offsets = NeighborOffsets(Connectivity::k26);
  const int64_t n = det.size();
  std::vector<uint8_t> seen(static_cast<std::size_t>(n), 0);
  std::vector<Candidate> out;
  std::vector<int64_t> stack;
  for (int64_t start = 0; start < n; ++start) {
    const double value = det.At(start);
    if (seen[start] || value == 0.0) continue;
    Candidate c;
    c.seed = g.Unlinear(start);
    c.seed_prob = value;
    c.confidence = value;
    seen[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int64_t cur = stack.back();
      stack.pop_back();
      c.voxels.push_back(cur);
      const Index3 p = g.Unlinear(cur);
      for (const Index3& d : offsets) {
        const Index3 q{p[0] + d[0], p[1] + d[1], p[2] + d[2]};
        if (!g.Contains(q)) continue;
        const int64_t li = g.Linear(q);
        if (seen[li] || det.At(li) != value) continue;
        seen[li] = 1;
        stack.push_back(li);
      }
    }
    std::sort(c.voxels.begin(), c.voxels.end());
    out.push_back(std::move(c));
  }
  // Discovery order is by smallest linear index already.
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.confidence > b.confidence;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i);
  return out;
}

std::vector<GtLesion> GroundTruthLesions(const std::optional<Volume>& gt,
                                         const Geometry& expected) {
  if (!gt) return {};
  if (!Compatible(gt->geometry(), expected)) {
    Fail(ErrorCode::kGeometryMismatch, "ground truth and detection geometries differ");
  }
  return LabelComponents(*gt, Connectivity::k26);
}

CaseEval EvaluateCase(const std::string& case_id, CaseLabel label,
                      std::span<const Candidate> candidates, double patient_score,
                      std::span<const GtLesion> lesions, double min_iou) {
  if (label == CaseLabel::kNegative && !lesions.empty()) {
    Fail(ErrorCode::kValidation, "negative case '" + case_id + "' has ground-truth lesions");
  }
  CaseEval ce;
  ce.case_id = case_id;
  ce.label = label;
  ce.patient_score = patient_score;
  ce.num_gt_lesions = static_cast<int>(lesions.size());
  ce.matches = MatchCandidates(candidates, lesions, min_iou);
  return ce;
}

EvalReport Summarize(std::vector<CaseEval> cases, const EvalOptions& options) {
  EvalReport r;
  r.n_cases = static_cast<int>(cases.size());
  for (const CaseEval& c : cases) r.n_lesions += c.num_gt_lesions;
  r.auroc = Auroc(cases);
  r.ap = AveragePrecision(cases);
  if (options.bootstrap > 0) {
    BootstrapOptions b;
    b.n_resamples = options.bootstrap;
    b.seed = options.seed;
    b.level = options.level;
    b.threads = options.threads;
    r.auroc_ci = BootstrapCi(cases, Metric::kAuroc, b);
    r.ap_ci = BootstrapCi(cases, Metric::kAveragePrecision, b);
  }
  r.per_case = std::move(cases);
  return r;
}

EvalReport EvaluateManifest(std::span<const ManifestEntry> entries,
                            const EvalOptions& options) {
  if (entries.empty()) Fail(ErrorCode::kEmpty, "manifest has no cases");
  options.extraction.Validate();
  std::vector<CaseEval> cases(entries.size());
  internal::ParallelFor(entries.size(), options.threads, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    try {
      if (e.label == CaseLabel::kPositive && !e.gt) {
        Fail(ErrorCode::kValidation, "PDAC case needs a ground-truth mask");
      }
      std::optional<Volume> gt;
      if (e.gt) gt = ReadMha(*e.gt);
      if (e.probability) {
        const ProbabilityMap p(ReadMha(*e.probability));
        const DetectionResult d = ExtractCandidates(p, options.extraction);
        const auto lesions = GroundTruthLesions(gt, p.geometry());
        cases[i] = EvaluateCase(e.case_id, e.label, d.candidates, PatientScore(d),
                                lesions, options.min_iou);
      } else {
        const ProbabilityMap det(ReadMha(*e.detection));
        const auto cands = CandidatesFromDetectionMap(det.volume());
        const auto lesions = GroundTruthLesions(gt, det.geometry());
        cases[i] = EvaluateCase(e.case_id, e.label, cands, MaxValue(det.volume()),
                                lesions, options.min_iou);
      }
    } catch (const Error& err) {
      throw Error(err.code(), "case '" + e.case_id + "': " + err.what());
    }
  });
  return Summarize(std::move(cases), options);
}

std::string ReportToJson(const EvalReport& report, const EvalOptions& options) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["auroc"] = report.auroc;
  doc["auroc_ci"] = IntervalJson(report.auroc_ci);
  doc["ap"] = report.ap;
  doc["ap_ci"] = IntervalJson(report.ap_ci);
  doc["n_cases"] = report.n_cases;
  doc["n_lesions"] = report.n_lesions;
  doc["min_iou"] = options.min_iou;
  doc["bootstrap"] = {{"n_resamples", options.bootstrap},
                      {"seed", options.seed},
                      {"level", options.level}};
  ordered_json per_case = ordered_json::array();
  for (const CaseEval& c : report.per_case) {
    ordered_json jc;
    jc["case_id"] = c.case_id;
    jc["label"] = c.label == CaseLabel::kPositive ? "PDAC" : "non-PDAC";
    jc["patient_score"] = c.patient_score;
    jc["num_gt_lesions"] = c.num_gt_lesions;
    ordered_json ms = ordered_json::array();
    for (const CandidateMatch& m : c.matches) {
      ordered_json jm;
      jm["rank"] = m.rank;
      jm["confidence"] = m.confidence;
      jm["lesion_id"] = m.lesion_id ? ordered_json(*m.lesion_id) : ordered_json(nullptr);
      jm["iou"] = m.iou;
      ms.push_back(std::move(jm));
    }
    jc["candidates"] = std::move(ms);
    per_case.push_back(std::move(jc));
  }
  doc["per_case"] = std::move(per_case);
  return doc.dump(2) + "\n";
}

std::string ReportToCsv(const EvalReport& report) {
  std::string out = "case_id,label,patient_score,num_gt_lesions,num_candidates,num_tp,num_fp\n";
  for (const CaseEval& c : report.per_case) {
    int tp = 0;
    for (const CandidateMatch& m : c.matches) tp += m.lesion_id.has_value();
    const int total = static_cast<int>(c.matches.size());
    out += c.case_id + "," + (c.label == CaseLabel::kPositive ? "PDAC" : "non-PDAC") + "," +
           io::FormatGeneral(c.patient_score, 9) + "," + std::to_string(c.num_gt_lesions) +
           "," + std::to_string(total) + "," + std::to_string(tp) + "," +
           std::to_string(total - tp) + "\n";
  }
  return out;
}

}  // namespace lesiondet
