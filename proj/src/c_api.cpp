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

#include "lesiondet/lesiondet.h"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <mutex>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include "io_util.hpp"
#include "lesiondet/candidates.hpp"
#include "lesiondet/error.hpp"
#include "lesiondet/evaluation.hpp"
#include "lesiondet/roi.hpp"
#include "lesiondet/splits.hpp"
#include "lesiondet/sweep.hpp"
#include "lesiondet/volume.hpp"

struct ld_volume {
  lesiondet::Volume value;
};

struct ld_detection {
  lesiondet::DetectionResult result;
  lesiondet::ExtractionParams params;
};

namespace {

using lesiondet::Error;
using lesiondet::ErrorCode;

thread_local std::string g_last_error;

std::mutex g_log_mu;
ld_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void Log(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_log_mu);
  if (g_log_fn) g_log_fn(message.c_str(), g_log_user);
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
ld_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return LD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ld_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return LD_ERR_INTERNAL;
}

void Require(bool ok, const char* what) {
  if (!ok) lesiondet::Fail(ErrorCode::kInvalidArgument, what);
}

int Threads(int32_t requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

lesiondet::ExtractionParams ToParams(const ld_extraction_params& p) {
  lesiondet::ExtractionParams out;
  Require(p.mode == LD_ADAPTIVE || p.mode == LD_FIXED, "unknown threshold mode");
  Require(p.confidence == LD_CONF_SEED || p.confidence == LD_CONF_MEAN,
          "unknown confidence mode");
  out.mode = p.mode == LD_ADAPTIVE ? lesiondet::ThresholdMode::kAdaptive
                                   : lesiondet::ThresholdMode::kFixed;
  out.alpha = p.alpha;
  out.tau = p.tau;
  out.max_candidates = p.max_candidates;
  out.min_seed_prob = p.min_seed_prob;
  out.min_voxels = p.min_voxels;
  out.connectivity = lesiondet::ConnectivityFromInt(p.connectivity);
  out.confidence = p.confidence == LD_CONF_SEED ? lesiondet::ConfidenceMode::kSeed
                                                : lesiondet::ConfidenceMode::kMean;
  out.Validate();
  return out;
}

lesiondet::CropBox ToBox(const ld_crop_box& b) {
  lesiondet::CropBox box;
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = b.lo[a];
    box.hi[a] = b.hi[a];
    box.reference.dims[a] = b.ref_dims[a];
    box.reference.spacing[a] = b.ref_spacing[a];
    box.reference.origin[a] = b.ref_origin[a];
  }
  box.Validate();
  return box;
}

ld_crop_box FromBox(const lesiondet::CropBox& box) {
  ld_crop_box b;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = box.lo[a];
    b.hi[a] = box.hi[a];
    b.ref_dims[a] = box.reference.dims[a];
    b.ref_spacing[a] = box.reference.spacing[a];
    b.ref_origin[a] = box.reference.origin[a];
  }
  return b;
}

ld_volume* NewVolume(lesiondet::Volume v) { return new ld_volume{std::move(v)}; }

}  // namespace

extern "C" {

const char* ld_last_error(void) { return g_last_error.c_str(); }

const char* ld_status_name(ld_status status) {
  switch (status) {
    case LD_OK: return "ok";
    case LD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LD_ERR_IO: return "i/o error";
    case LD_ERR_MALFORMED: return "malformed input";
    case LD_ERR_UNSUPPORTED: return "unsupported input";
    case LD_ERR_PAYLOAD_MISMATCH: return "payload mismatch";
    case LD_ERR_VALIDATION: return "validation error";
    case LD_ERR_GEOMETRY_MISMATCH: return "geometry mismatch";
    case LD_ERR_EMPTY: return "empty input";
    case LD_ERR_UNDEFINED_METRIC: return "undefined metric";
    case LD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ld_version(void) { return "0.1.0"; }

void ld_set_log_handler(ld_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mu);
  g_log_fn = fn;
  g_log_user = user;
}

ld_status ld_volume_read_mha(const char* path, ld_volume** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = NewVolume(lesiondet::ReadMha(path));
  });
}

ld_status ld_volume_write_mha(const ld_volume* v, const char* path) {
  return Guard([&] {
    Require(v && path, "null argument");
    lesiondet::WriteMha(v->value, path);
  });
}

void ld_volume_free(ld_volume* v) { delete v; }

ld_status ld_volume_geometry(const ld_volume* v, int64_t dims[3], double spacing[3],
                             double origin[3]) {
  return Guard([&] {
    Require(v, "null volume");
    const auto& g = v->value.geometry();
    for (int a = 0; a < 3; ++a) {
      if (dims) dims[a] = g.dims[a];
      if (spacing) spacing[a] = g.spacing[a];
      if (origin) origin[a] = g.origin[a];
    }
  });
}

ld_status ld_volume_kind(const ld_volume* v, ld_element_kind* out) {
  return Guard([&] {
    Require(v && out, "null argument");
    *out = static_cast<ld_element_kind>(v->value.kind());
  });
}

ld_status ld_volume_max(const ld_volume* v, double* out) {
  return Guard([&] {
    Require(v && out, "null argument");
    *out = lesiondet::MaxValue(v->value);
  });
}

ld_status ld_ensemble_mean(const ld_volume* const* maps, size_t count, ld_volume** out) {
  return Guard([&] {
    Require(out && (maps || count == 0), "null argument");
    std::vector<lesiondet::ProbabilityMap> probs;
    probs.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      Require(maps[i], "null volume");
      probs.emplace_back(maps[i]->value);
    }
    *out = NewVolume(lesiondet::MeanVolumes(probs).volume());
  });
}

void ld_extraction_params_default(ld_extraction_params* params) {
  if (!params) return;
  const lesiondet::ExtractionParams d;
  params->mode = LD_ADAPTIVE;
  params->alpha = d.alpha;
  params->tau = d.tau;
  params->max_candidates = d.max_candidates;
  params->min_seed_prob = d.min_seed_prob;
  params->min_voxels = d.min_voxels;
  params->connectivity = static_cast<int32_t>(d.connectivity);
  params->confidence = LD_CONF_SEED;
}

ld_status ld_extraction_params_validate(const ld_extraction_params* params) {
  return Guard([&] {
    Require(params, "null params");
    ToParams(*params);
  });
}

ld_status ld_extract(const ld_volume* probability, const ld_extraction_params* params,
                     ld_detection** out) {
  return Guard([&] {
    Require(probability && params && out, "null argument");
    const auto p = ToParams(*params);
    const lesiondet::ProbabilityMap map(probability->value);
    *out = new ld_detection{lesiondet::ExtractCandidates(map, p), p};
  });
}

void ld_detection_free(ld_detection* d) { delete d; }

size_t ld_detection_count(const ld_detection* d) {
  return d ? d->result.candidates.size() : 0;
}

ld_status ld_detection_candidate(const ld_detection* d, size_t index, ld_candidate_info* out) {
  return Guard([&] {
    Require(d && out, "null argument");
    Require(index < d->result.candidates.size(), "candidate index out of range");
    const auto& c = d->result.candidates[index];
    out->rank = c.rank;
    for (int a = 0; a < 3; ++a) out->seed[a] = c.seed[a];
    out->seed_prob = c.seed_prob;
    out->confidence = c.confidence;
    out->num_voxels = static_cast<int64_t>(c.voxels.size());
  });
}

double ld_detection_patient_score(const ld_detection* d) {
  return d ? lesiondet::PatientScore(d->result) : 0.0;
}

ld_status ld_detection_map(const ld_detection* d, ld_volume** out) {
  return Guard([&] {
    Require(d && out, "null argument");
    *out = NewVolume(d->result.detection_map);
  });
}

ld_status ld_detection_write_json(const ld_detection* d, const char* case_id,
                                  const char* path) {
  return Guard([&] {
    Require(d && case_id && path, "null argument");
    lesiondet::io::WriteFileAtomic(
        path, lesiondet::CandidatesToJson(case_id, d->params, d->result));
  });
}

ld_status ld_patient_score(const ld_volume* detection_map, double* out) {
  return Guard([&] {
    Require(detection_map && out, "null argument");
    const lesiondet::ProbabilityMap map(detection_map->value);
    *out = lesiondet::MaxValue(map.volume());
  });
}

ld_status ld_roi_box(const ld_volume* mask, const ld_volume* image, const double margin_mm[3],
                     ld_crop_box* out) {
  return Guard([&] {
    Require(mask && image && margin_mm && out, "null argument");
    const auto phys = lesiondet::MaskBoundingBox(mask->value);
    const lesiondet::MarginMm margin{margin_mm[0], margin_mm[1], margin_mm[2]};
    *out = FromBox(lesiondet::ComputeCropBox(phys, image->value.geometry(), margin));
  });
}

ld_status ld_roi_crop(const ld_volume* image, const ld_crop_box* box, ld_volume** out) {
  return Guard([&] {
    Require(image && box && out, "null argument");
    *out = NewVolume(lesiondet::Crop(image->value, ToBox(*box)));
  });
}

ld_status ld_roi_uncrop(const ld_volume* det, const ld_crop_box* box, ld_volume** out) {
  return Guard([&] {
    Require(det && box && out, "null argument");
    *out = NewVolume(lesiondet::Uncrop(det->value, ToBox(*box)));
  });
}

ld_status ld_crop_box_write_json(const ld_crop_box* box, const char* path) {
  return Guard([&] {
    Require(box && path, "null argument");
    lesiondet::io::WriteFileAtomic(path, lesiondet::CropBoxToJson(ToBox(*box)));
  });
}

ld_status ld_crop_box_read_json(const char* path, ld_crop_box* out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = FromBox(lesiondet::CropBoxFromJson(lesiondet::io::ReadFileText(path)));
  });
}

ld_status ld_split_run(const char* cases_csv, int32_t folds, uint64_t seed,
                       const char* out_json, ld_split_summary* summary) {
  return Guard([&] {
    Require(cases_csv && out_json, "null argument");
    const auto cases = lesiondet::ParseCasesCsv(lesiondet::io::ReadFileText(cases_csv));
    std::vector<std::string> warnings;
    const auto fa = lesiondet::StratifiedKFold(cases, folds, seed, &warnings);
    const auto report = lesiondet::ValidateSplit(cases, fa);
    for (const auto& w : warnings) Log(w);
    for (const auto& v : report.violations) Log("balance violation: " + v);
    lesiondet::io::WriteFileAtomic(out_json, lesiondet::SplitToJson(fa, report));
    if (summary) {
      summary->num_cases = static_cast<int32_t>(cases.size());
      summary->num_positive = static_cast<int32_t>(std::count_if(
          cases.begin(), cases.end(),
          [](const auto& c) { return c.label == lesiondet::CaseLabel::kPositive; }));
      summary->num_violations = static_cast<int32_t>(report.violations.size());
    }
  });
}

void ld_eval_options_default(ld_eval_options* options) {
  if (!options) return;
  const lesiondet::EvalOptions d;
  options->min_iou = d.min_iou;
  options->bootstrap = d.bootstrap;
  options->seed = d.seed;
  options->level = d.level;
  ld_extraction_params_default(&options->extraction);
  options->threads = 0;
}

ld_status ld_eval_run(const char* manifest, const ld_eval_options* options,
                      const char* out_json, const char* out_csv, ld_eval_summary* summary) {
  return Guard([&] {
    Require(manifest && options && out_json, "null argument");
    Require(options->min_iou >= 0.0 && options->min_iou <= 1.0, "min_iou must be in [0,1]");
    Require(options->bootstrap >= 0, "bootstrap resamples must be >= 0");
    lesiondet::EvalOptions opts;
    opts.min_iou = options->min_iou;
    opts.bootstrap = options->bootstrap;
    opts.seed = options->seed;
    opts.level = options->level;
    opts.extraction = ToParams(options->extraction);
    opts.threads = Threads(options->threads);
    const auto entries = lesiondet::ReadManifest(manifest);
    const auto report = lesiondet::EvaluateManifest(entries, opts);
    const std::string json = lesiondet::ReportToJson(report, opts);
    const std::string csv = out_csv ? lesiondet::ReportToCsv(report) : std::string();
    lesiondet::io::WriteFileAtomic(out_json, json);
    if (out_csv) lesiondet::io::WriteFileAtomic(out_csv, csv);
    if (summary) {
      summary->auroc = report.auroc;
      summary->ap = report.ap;
      summary->has_ci = report.auroc_ci.has_value();
      summary->auroc_ci[0] = report.auroc_ci ? report.auroc_ci->lower : 0.0;
      summary->auroc_ci[1] = report.auroc_ci ? report.auroc_ci->upper : 0.0;
      summary->ap_ci[0] = report.ap_ci ? report.ap_ci->lower : 0.0;
      summary->ap_ci[1] = report.ap_ci ? report.ap_ci->upper : 0.0;
      summary->n_cases = report.n_cases;
      summary->n_lesions = report.n_lesions;
    }
  });
}

ld_status ld_sweep_run(const char* config, const ld_extraction_params* defaults,
                       int32_t threads, const char* out_csv, const char* out_svg,
                       size_t* num_rows) {
  return Guard([&] {
    Require(config && out_csv, "null argument");
    lesiondet::ExtractionParams params;
    if (defaults) params = ToParams(*defaults);
    const auto cfg = lesiondet::ParseSweepConfig(
        lesiondet::io::ReadFileText(config),
        std::filesystem::path(config).parent_path().string(), &params);
    params.Validate();
    const auto result = lesiondet::RunSweep(cfg, params, Threads(threads));
    const std::string csv = lesiondet::SweepToCsv(result);
    const std::string svg = out_svg ? lesiondet::SweepToSvg(result) : std::string();
    lesiondet::io::WriteFileAtomic(out_csv, csv);
    if (out_svg) lesiondet::io::WriteFileAtomic(out_svg, svg);
    if (num_rows) *num_rows = result.rows.size();
  });
}

}  // extern "C"
