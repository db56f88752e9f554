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

/* C interface to lesiondet. Every function returns an ld_status; on failure
 * ld_last_error() describes the problem (thread-local, valid until the next
 * call on the same thread). Handles are opaque and owned by the caller, who
 * releases them with the matching *_free function. All output files are
 * written atomically. */

#ifndef LESIONDET_H_
#define LESIONDET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LESIONDET_BUILDING)
#    define LD_API __declspec(dllexport)
#  else
#    define LD_API __declspec(dllimport)
#  endif
#else
#  define LD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ld_status {
  LD_OK = 0,
  LD_ERR_INVALID_ARGUMENT = 1,
  LD_ERR_IO = 2,
  LD_ERR_MALFORMED = 3,
  LD_ERR_UNSUPPORTED = 4,
  LD_ERR_PAYLOAD_MISMATCH = 5,
  LD_ERR_VALIDATION = 6,
  LD_ERR_GEOMETRY_MISMATCH = 7,
  LD_ERR_EMPTY = 8,
  LD_ERR_UNDEFINED_METRIC = 9,
  LD_ERR_INTERNAL = 100
} ld_status;

typedef enum ld_element_kind {
  LD_UINT8 = 0,
  LD_INT16 = 1,
  LD_UINT16 = 2,
  LD_FLOAT32 = 3
} ld_element_kind;

typedef struct ld_volume ld_volume;
typedef struct ld_detection ld_detection;

LD_API const char* ld_last_error(void);
LD_API const char* ld_status_name(ld_status status);
LD_API const char* ld_version(void);

/* Warnings (e.g. unbalanced splits) go to this handler; NULL silences them. */
typedef void (*ld_log_fn)(const char* message, void* user);
LD_API void ld_set_log_handler(ld_log_fn fn, void* user);

/* ---- volumes ---- */

LD_API ld_status ld_volume_read_mha(const char* path, ld_volume** out);
LD_API ld_status ld_volume_write_mha(const ld_volume* v, const char* path);
LD_API void ld_volume_free(ld_volume* v);
LD_API ld_status ld_volume_geometry(const ld_volume* v, int64_t dims[3],
                                    double spacing[3], double origin[3]);
LD_API ld_status ld_volume_kind(const ld_volume* v, ld_element_kind* out);
LD_API ld_status ld_volume_max(const ld_volume* v, double* out);
/* Voxelwise mean of float-32 probability maps with compatible geometry. */
LD_API ld_status ld_ensemble_mean(const ld_volume* const* maps, size_t count,
                                  ld_volume** out);

/* ---- candidate extraction ---- */

typedef enum ld_threshold_mode { LD_ADAPTIVE = 0, LD_FIXED = 1 } ld_threshold_mode;
typedef enum ld_confidence_mode { LD_CONF_SEED = 0, LD_CONF_MEAN = 1 } ld_confidence_mode;

typedef struct ld_extraction_params {
  ld_threshold_mode mode;
  double alpha;
  double tau;
  int32_t max_candidates;
  double min_seed_prob;
  int64_t min_voxels;
  int32_t connectivity; /* 6, 18 or 26 */
  ld_confidence_mode confidence;
} ld_extraction_params;

typedef struct ld_candidate_info {
  int32_t rank;
  int64_t seed[3];
  double seed_prob;
  double confidence;
  int64_t num_voxels;
} ld_candidate_info;

/* alpha = 1/15, tau = 0.4, 5 candidates, min_seed_prob 1e-6, 10 voxels, 26. */
LD_API void ld_extraction_params_default(ld_extraction_params* params);
LD_API ld_status ld_extraction_params_validate(const ld_extraction_params* params);
LD_API ld_status ld_extract(const ld_volume* probability,
                            const ld_extraction_params* params, ld_detection** out);
LD_API void ld_detection_free(ld_detection* d);
LD_API size_t ld_detection_count(const ld_detection* d);
LD_API ld_status ld_detection_candidate(const ld_detection* d, size_t index,
                                        ld_candidate_info* out);
LD_API double ld_detection_patient_score(const ld_detection* d);
/* New handle holding a copy of the detection map. */
LD_API ld_status ld_detection_map(const ld_detection* d, ld_volume** out);
LD_API ld_status ld_detection_write_json(const ld_detection* d, const char* case_id,
                                         const char* path);

/* Maximum of a detection map (0 for an all-zero map). */
LD_API ld_status ld_patient_score(const ld_volume* detection_map, double* out);

/* ---- region of interest ---- */

typedef struct ld_crop_box {
  int64_t lo[3];
  int64_t hi[3];
  int64_t ref_dims[3];
  double ref_spacing[3];
  double ref_origin[3];
} ld_crop_box;

/* Box around the mask foreground, expanded by margin_mm per side, in the
 * image's voxel grid. */
LD_API ld_status ld_roi_box(const ld_volume* mask, const ld_volume* image,
                            const double margin_mm[3], ld_crop_box* out);
LD_API ld_status ld_roi_crop(const ld_volume* image, const ld_crop_box* box,
                             ld_volume** out);
LD_API ld_status ld_roi_uncrop(const ld_volume* det, const ld_crop_box* box,
                               ld_volume** out);
LD_API ld_status ld_crop_box_write_json(const ld_crop_box* box, const char* path);
LD_API ld_status ld_crop_box_read_json(const char* path, ld_crop_box* out);

/* ---- batch jobs ---- */

typedef struct ld_split_summary {
  int32_t num_cases;
  int32_t num_positive;
  int32_t num_violations;
} ld_split_summary;

/* Reads the cases CSV, assigns folds and writes the split JSON. */
LD_API ld_status ld_split_run(const char* cases_csv, int32_t folds, uint64_t seed,
                              const char* out_json, ld_split_summary* summary);

typedef struct ld_eval_options {
  double min_iou;
  int32_t bootstrap; /* resamples; 0 disables intervals */
  uint64_t seed;
  double level;
  ld_extraction_params extraction;
  int32_t threads;
} ld_eval_options;

typedef struct ld_eval_summary {
  double auroc;
  double ap;
  double auroc_ci[2];
  double ap_ci[2];
  int32_t has_ci;
  int32_t n_cases;
  int32_t n_lesions;
} ld_eval_summary;

LD_API void ld_eval_options_default(ld_eval_options* options);
/* out_csv may be NULL. */
LD_API ld_status ld_eval_run(const char* manifest, const ld_eval_options* options,
                             const char* out_json, const char* out_csv,
                             ld_eval_summary* summary);

/* out_svg may be NULL. `defaults` seeds the extraction parameters that the
 * config's "extraction" object may override. */
LD_API ld_status ld_sweep_run(const char* config, const ld_extraction_params* defaults,
                              int32_t threads, const char* out_csv, const char* out_svg,
                              size_t* num_rows);

#ifdef __cplusplus
}
#endif

#endif /* LESIONDET_H_ */
