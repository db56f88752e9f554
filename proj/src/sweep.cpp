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

#include "lesiondet/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "io_util.hpp"
#include "json.hpp"
#include "lesiondet/error.hpp"
#include "parallel.hpp"

namespace lesiondet {

void SweepConfig::Validate() const {
  std::set<double> seen;
  for (double v : inverse_alphas) {
    if (!std::isfinite(v) || !(v >= 1.0)) {
      Fail(ErrorCode::kInvalidArgument, "1/alpha values must be finite and >= 1");
    }
    if (!seen.insert(v).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate 1/alpha value " + io::FormatGeneral(v, 6));
    }
  }
  if (fixed_tau && !(*fixed_tau > 0.0 && *fixed_tau <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "fixed tau must be in (0,1]");
  }
  if (inverse_alphas.empty() && !fixed_tau) {
    Fail(ErrorCode::kInvalidArgument, "sweep has no settings");
  }
  if (folds.empty()) Fail(ErrorCode::kInvalidArgument, "sweep has no folds");
}

SweepConfig ParseSweepConfig(const std::string& text, const std::string& base_dir,
                             ExtractionParams* defaults) {
  SweepConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("inverse_alphas")) {
      cfg.inverse_alphas = j.at("inverse_alphas").get<std::vector<double>>();
    }
    if (j.contains("include_fixed_tau")) {
      const auto& t = j.at("include_fixed_tau");
      cfg.fixed_tau = t.is_null() ? std::nullopt : std::optional<double>(t.get<double>());
    }
    if (j.contains("min_iou")) cfg.min_iou = j.at("min_iou").get<double>();
    for (const auto& [key, value] : j.at("folds").items()) {
      long long fold = 0;
      if (!io::ParseInt64(key, &fold) || fold < 0) {
        Fail(ErrorCode::kMalformed, "fold keys must be non-negative integers");
      }
      std::filesystem::path p(value.get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      cfg.folds[static_cast<int>(fold)] = p.string();
    }
    if (defaults && j.contains("extraction")) {
      const auto& e = j.at("extraction");
      if (e.contains("max_candidates")) defaults->max_candidates = e.at("max_candidates").get<int>();
      if (e.contains("min_voxels")) defaults->min_voxels = e.at("min_voxels").get<int64_t>();
      if (e.contains("min_seed_prob")) defaults->min_seed_prob = e.at("min_seed_prob").get<double>();
      if (e.contains("connectivity")) {
        defaults->connectivity = ConnectivityFromInt(e.at("connectivity").get<int>());
      }
      if (e.contains("confidence")) {
        const auto c = e.at("confidence").get<std::string>();
        if (c != "seed" && c != "mean") Fail(ErrorCode::kMalformed, "confidence must be seed or mean");
        defaults->confidence = c == "seed" ? ConfidenceMode::kSeed : ConfidenceMode::kMean;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformed, std::string("sweep config JSON: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string SweepSetting::Descriptor() const {
  if (inverse_alpha) return "inv_alpha=" + io::FormatGeneral(*inverse_alpha, 6);
  return "tau=" + io::FormatGeneral(tau, 6);
}

std::vector<SweepSetting> SweepSettings(const SweepConfig& cfg) {
  std::vector<double> inv = cfg.inverse_alphas;
  std::sort(inv.begin(), inv.end());
  std::vector<SweepSetting> out;
  for (double v : inv) out.push_back({v, 0.0});
  if (cfg.fixed_tau) out.push_back({std::nullopt, *cfg.fixed_tau});
  return out;
}

namespace {

struct LoadedCase {
  ManifestEntry entry;
  std::optional<ProbabilityMap> prob;
  std::vector<GtLesion> lesions;
};

template <typename Fn>
std::optional<double> IfDefined(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUndefinedMetric) return std::nullopt;
    throw;
  }
}

}  // namespace

SweepResult RunSweep(const SweepConfig& cfg, const ExtractionParams& defaults,
                     int threads) {
  cfg.Validate();
  const auto settings = SweepSettings(cfg);
  SweepResult result;
  for (const auto& [fold, manifest_path] : cfg.folds) {
    const auto entries = ReadManifest(manifest_path);
    if (entries.empty()) Fail(ErrorCode::kEmpty, "fold " + std::to_string(fold) + " has no cases");
    std::vector<LoadedCase> cases(entries.size());
    internal::ParallelFor(entries.size(), threads, [&](std::size_t i) {
      const ManifestEntry& e = entries[i];
      if (!e.probability) {
        Fail(ErrorCode::kValidation, "case '" + e.case_id +
                                         "': sweep needs probability maps, not detection maps");
      }
      if (e.label == CaseLabel::kPositive && !e.gt) {
        Fail(ErrorCode::kValidation, "case '" + e.case_id + "': PDAC case needs a ground-truth mask");
      }
      LoadedCase& c = cases[i];
      c.entry = e;
      c.prob.emplace(ReadMha(*e.probability));
      std::optional<Volume> gt;
      if (e.gt) gt = ReadMha(*e.gt);
      c.lesions = GroundTruthLesions(gt, c.prob->geometry());
    });

    for (const SweepSetting& s : settings) {
      ExtractionParams params = defaults;
      if (s.inverse_alpha) {
        params.mode = ThresholdMode::kAdaptive;
        params.alpha = 1.0 / *s.inverse_alpha;
      } else {
        params.mode = ThresholdMode::kFixed;
        params.tau = s.tau;
      }
      params.Validate();
      std::vector<CaseEval> evals(cases.size());
      internal::ParallelFor(cases.size(), threads, [&](std::size_t i) {
        const LoadedCase& c = cases[i];
        const DetectionResult d = ExtractCandidates(*c.prob, params);
        evals[i] = EvaluateCase(c.entry.case_id, c.entry.label, d.candidates,
                                PatientScore(d), c.lesions, cfg.min_iou);
      });
      SweepRow row;
      row.fold = fold;
      row.setting = s;
      row.auroc = IfDefined([&] { return Auroc(evals); });
      row.ap = IfDefined([&] { return AveragePrecision(evals); });
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string SweepToCsv(const SweepResult& r) {
  if (r.rows.empty()) Fail(ErrorCode::kEmpty, "empty sweep result");
  const auto num = [](const std::optional<double>& v) {
    return v ? io::FormatGeneral(*v, 6) : std::string();
  };
  std::string out = "fold,setting,inverse_alpha,auroc,ap\n";
  for (const SweepRow& row : r.rows) {
    out += std::to_string(row.fold) + "," + row.setting.Descriptor() + "," +
           num(row.setting.inverse_alpha) + "," + num(row.auroc) + "," + num(row.ap) + "\n";
  }
  return out;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string F2(double v) { return io::FormatFixed(v, 2); }

}  // namespace

std::string SweepToSvg(const SweepResult& r) {
  if (r.rows.empty()) Fail(ErrorCode::kEmpty, "empty sweep result");
  constexpr double kPanelW = 360.0, kPanelH = 260.0;
  constexpr double kLeft = 60.0, kTop = 40.0, kGap = 90.0;
  constexpr double kWidth = kLeft + 2 * kPanelW + kGap + 140.0;
  constexpr double kHeight = kTop + kPanelH + 60.0;

  std::set<int> folds;
  double xmin = 0.0, xmax = 0.0;
  bool any_x = false;
  for (const SweepRow& row : r.rows) {
    folds.insert(row.fold);
    if (!row.setting.inverse_alpha) continue;
    const double x = *row.setting.inverse_alpha;
    xmin = any_x ? std::min(xmin, x) : x;
    xmax = any_x ? std::max(xmax, x) : x;
    any_x = true;
  }
  if (!any_x) {
    xmin = 0.0;
    xmax = 1.0;
  } else if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + F2(kWidth) + "\" height=\"" +
         F2(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const char* titles[2] = {"AUROC", "AP"};
  for (int panel = 0; panel < 2; ++panel) {
    const double x0 = kLeft + panel * (kPanelW + kGap);
    const auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * kPanelW; };
    const auto py = [&](double y) { return kTop + (1.0 - y) * kPanelH; };

    svg += "<g class=\"panel\" id=\"" + std::string(titles[panel]) + "\">\n";
    svg += "<rect x=\"" + F2(x0) + "\" y=\"" + F2(kTop) + "\" width=\"" + F2(kPanelW) +
           "\" height=\"" + F2(kPanelH) + "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + F2(x0 + kPanelW / 2) + "\" y=\"" + F2(kTop - 12) +
           "\" text-anchor=\"middle\">" + titles[panel] + "</text>\n";
    svg += "<text x=\"" + F2(x0 + kPanelW / 2) + "\" y=\"" + F2(kTop + kPanelH + 40) +
           "\" text-anchor=\"middle\">1/alpha</text>\n";
    for (int t = 0; t <= 4; ++t) {
      const double y = t / 4.0;
      svg += "<text x=\"" + F2(x0 - 6) + "\" y=\"" + F2(py(y) + 4) +
             "\" text-anchor=\"end\">" + F2(y) + "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
      const double x = xmin + (xmax - xmin) * t / 4.0;
      svg += "<text x=\"" + F2(px(x)) + "\" y=\"" + F2(kTop + kPanelH + 18) +
             "\" text-anchor=\"middle\">" + io::FormatGeneral(x, 4) + "</text>\n";
    }

    for (int fold : folds) {
      const std::string color = kPalette[static_cast<std::size_t>(fold) % std::size(kPalette)];
      std::string points;
      std::optional<double> baseline;
      for (const SweepRow& row : r.rows) {
        if (row.fold != fold) continue;
        const auto& value = panel == 0 ? row.auroc : row.ap;
        if (!value) continue;
        if (!row.setting.inverse_alpha) {
          baseline = *value;
          continue;
        }
        if (!points.empty()) points += " ";
        points += F2(px(*row.setting.inverse_alpha)) + "," + F2(py(*value));
      }
      if (!points.empty()) {
        svg += "<polyline class=\"fold-" + std::to_string(fold) + "\" points=\"" + points +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      }
      if (baseline) {
        svg += "<line class=\"baseline\" x1=\"" + F2(x0) + "\" y1=\"" + F2(py(*baseline)) +
               "\" x2=\"" + F2(x0 + kPanelW) + "\" y2=\"" + F2(py(*baseline)) +
               "\" stroke=\"" + color + "\" stroke-dasharray=\"4 3\"/>\n";
      }
    }
    svg += "</g>\n";
  }

  const double lx = kLeft + 2 * kPanelW + kGap + 20.0;
  int line = 0;
  for (int fold : folds) {
    const std::string color = kPalette[static_cast<std::size_t>(fold) % std::size(kPalette)];
    const double y = kTop + 10.0 + 18.0 * line++;
    svg += "<line x1=\"" + F2(lx) + "\" y1=\"" + F2(y) + "\" x2=\"" + F2(lx + 20) +
           "\" y2=\"" + F2(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + F2(lx + 26) + "\" y=\"" + F2(y + 4) + "\">fold " +
           std::to_string(fold) + "</text>\n";
  }
  const bool has_baseline = std::any_of(r.rows.begin(), r.rows.end(), [](const SweepRow& row) {
    return !row.setting.inverse_alpha;
  });
  if (has_baseline) {
    const double y = kTop + 10.0 + 18.0 * line;
    svg += "<line x1=\"" + F2(lx) + "\" y1=\"" + F2(y) + "\" x2=\"" + F2(lx + 20) + "\" y2=\"" +
           F2(y) + "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
    svg += "<text x=\"" + F2(lx + 26) + "\" y=\"" + F2(y + 4) + "\">fixed tau</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace lesiondet
