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

// Command-line front end. Each subcommand wraps one library stage; all work is
// done through the C API in lesiondet.h.

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lesiondet/lesiondet.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct VolumeDeleter {
  void operator()(ld_volume* v) const { ld_volume_free(v); }
};
struct DetectionDeleter {
  void operator()(ld_detection* d) const { ld_detection_free(d); }
};
using VolumePtr = std::unique_ptr<ld_volume, VolumeDeleter>;
using DetectionPtr = std::unique_ptr<ld_detection, DetectionDeleter>;

// Thrown to unwind with a data-error exit code after the message is printed.
struct DataError {};
struct UsageError {
  std::string message;
};

void Check(ld_status status) {
  if (status == LD_OK) return;
  std::cerr << "error: " << ld_status_name(status) << ": " << ld_last_error() << "\n";
  if (status == LD_ERR_INVALID_ARGUMENT) throw UsageError{};
  throw DataError{};
}

VolumePtr Load(const std::string& path) {
  ld_volume* v = nullptr;
  Check(ld_volume_read_mha(path.c_str(), &v));
  return VolumePtr(v);
}

std::string FormatScore(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

struct ExtractionFlags {
  std::optional<double> alpha;
  std::optional<double> tau;
  int max_candidates = 5;
  int64_t min_voxels = 10;
  double min_seed_prob = 1e-6;
  int connectivity = 26;
  std::string confidence = "seed";

  void Register(CLI::App* cmd, bool threshold_flags) {
    if (threshold_flags) {
      auto* a = cmd->add_option("--alpha", alpha, "adaptive threshold factor in (0,1]");
      auto* t = cmd->add_option("--tau", tau, "fixed threshold in (0,1]");
      a->excludes(t);
    }
    cmd->add_option("--max-candidates", max_candidates, "candidates to emit")
        ->capture_default_str();
    cmd->add_option("--min-voxels", min_voxels, "smallest emitted region")
        ->capture_default_str();
    cmd->add_option("--min-seed-prob", min_seed_prob, "stop below this seed value")
        ->capture_default_str();
    cmd->add_option("--connectivity", connectivity, "6, 18 or 26")
        ->check(CLI::IsMember({6, 18, 26}))
        ->capture_default_str();
    cmd->add_option("--confidence", confidence, "seed or mean")
        ->check(CLI::IsMember({"seed", "mean"}))
        ->capture_default_str();
  }

  ld_extraction_params Params() const {
    ld_extraction_params p;
    ld_extraction_params_default(&p);
    if (tau) {
      p.mode = LD_FIXED;
      p.tau = *tau;
    } else if (alpha) {
      p.mode = LD_ADAPTIVE;
      p.alpha = *alpha;
    }
    p.max_candidates = max_candidates;
    p.min_voxels = min_voxels;
    p.min_seed_prob = min_seed_prob;
    p.connectivity = connectivity;
    p.confidence = confidence == "mean" ? LD_CONF_MEAN : LD_CONF_SEED;
    if (ld_extraction_params_validate(&p) != LD_OK) throw UsageError{ld_last_error()};
    return p;
  }
};

std::array<double, 3> ParseMargin(const std::string& text) {
  std::array<double, 3> m{};
  std::size_t start = 0;
  for (int a = 0; a < 3; ++a) {
    const std::size_t comma = text.find(',', start);
    if ((a < 2) == (comma == std::string::npos)) {
      throw UsageError{"--margin expects X,Y,Z in mm"};
    }
    const std::string part = text.substr(start, a < 2 ? comma - start : std::string::npos);
    auto res = std::from_chars(part.data(), part.data() + part.size(), m[a]);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size() || !(m[a] >= 0.0)) {
      throw UsageError{"--margin expects three non-negative numbers X,Y,Z"};
    }
    start = comma + 1;
  }
  return m;
}

void LogToStderr(const char* message, void*) { std::cerr << "warning: " << message << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lesion candidate extraction, ROI cropping, fold splitting and detection "
               "evaluation on 3D probability volumes."};
  app.name("lesiondet");
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "worker threads (default: all cores)");
  app.add_flag("--quiet", quiet, "suppress warnings");

  // extract
  auto* extract = app.add_subcommand("extract", "extract lesion candidates from a probability map");
  std::string prob_path, det_out, json_out, case_id;
  ExtractionFlags ex_flags;
  extract->add_option("--prob", prob_path, "probability map (.mha)")->required();
  extract->add_option("--out-det", det_out, "detection map output (.mha)")->required();
  extract->add_option("--out-json", json_out, "candidate list output (.json)");
  extract->add_option("--case-id", case_id, "case id for the JSON (default: file stem)");
  ex_flags.Register(extract, true);

  // score
  auto* score = app.add_subcommand("score", "print the patient score of a detection map");
  std::string score_det;
  score->add_option("--det", score_det, "detection map (.mha)")->required();

  // ensemble
  auto* ensemble = app.add_subcommand("ensemble", "voxelwise mean of probability maps");
  std::string ens_out;
  std::vector<std::string> ens_inputs;
  ensemble->add_option("--out", ens_out, "output (.mha)")->required();
  ensemble->add_option("inputs", ens_inputs, "probability maps (.mha)")->required();

  // crop
  auto* crop = app.add_subcommand("crop", "crop an image around a mask with a physical margin");
  std::string crop_mask, crop_image, crop_out, crop_box_out, margin_text = "100,50,15";
  crop->add_option("--mask", crop_mask, "coarse mask (.mha)")->required();
  crop->add_option("--image", crop_image, "volume to crop (.mha)")->required();
  crop->add_option("--margin", margin_text, "margin per side in mm, X,Y,Z")->capture_default_str();
  crop->add_option("--out", crop_out, "cropped volume (.mha)")->required();
  crop->add_option("--out-box", crop_box_out, "crop box (.json)")->required();

  // uncrop
  auto* uncrop = app.add_subcommand("uncrop", "paste a cropped volume back into full size");
  std::string uncrop_det, uncrop_box, uncrop_out;
  uncrop->add_option("--det", uncrop_det, "cropped volume (.mha)")->required();
  uncrop->add_option("--box", uncrop_box, "crop box (.json)")->required();
  uncrop->add_option("--out", uncrop_out, "full-size output (.mha)")->required();

  // split
  auto* split = app.add_subcommand("split", "size-stratified K-fold assignment");
  std::string split_cases, split_out;
  int split_folds = 5;
  uint64_t split_seed = 42;
  split->add_option("--cases", split_cases, "cases CSV")->required();
  split->add_option("--folds", split_folds, "number of folds")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  split->add_option("--seed", split_seed, "shuffle seed")->capture_default_str();
  split->add_option("--out", split_out, "split JSON")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "lesion-level AP and patient-level AUROC");
  std::string eval_manifest, eval_out, eval_csv;
  double min_iou = 0.10;
  int bootstrap = 1000;
  uint64_t eval_seed = 42;
  double level = 0.95;
  ExtractionFlags eval_flags;
  eval->add_option("--manifest", eval_manifest, "evaluation manifest (.json)")->required();
  eval->add_option("--min-iou", min_iou, "IoU needed for a hit")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--bootstrap", bootstrap, "bootstrap resamples (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "bootstrap seed")->capture_default_str();
  eval->add_option("--level", level, "confidence level")
      ->check(CLI::Range(0.5, 0.999999))
      ->capture_default_str();
  eval->add_option("--out", eval_out, "report (.json)")->required();
  eval->add_option("--per-case", eval_csv, "per-case table (.csv)");
  eval_flags.Register(eval, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "AP/AUROC over a grid of 1/alpha values");
  std::string sweep_config, sweep_csv, sweep_svg;
  ExtractionFlags sweep_flags;
  sweep->add_option("--config", sweep_config, "sweep config (.json)")->required();
  sweep->add_option("--out-csv", sweep_csv, "results (.csv)")->required();
  sweep->add_option("--out-svg", sweep_svg, "plot (.svg)");
  sweep_flags.Register(sweep, false);

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (threads < 0) {
    std::cerr << "error: --threads must be >= 0\n";
    return kExitUsage;
  }
  ld_set_log_handler(quiet ? nullptr : LogToStderr, nullptr);

  try {
    if (extract->parsed()) {
      if (!ex_flags.alpha && !ex_flags.tau) throw UsageError{"extract needs --alpha or --tau"};
      const auto params = ex_flags.Params();
      auto prob = Load(prob_path);
      ld_detection* raw = nullptr;
      Check(ld_extract(prob.get(), &params, &raw));
      DetectionPtr det(raw);
      ld_volume* map = nullptr;
      Check(ld_detection_map(det.get(), &map));
      VolumePtr map_ptr(map);
      Check(ld_volume_write_mha(map, det_out.c_str()));
      if (!json_out.empty()) {
        const std::string id =
            case_id.empty() ? std::filesystem::path(prob_path).stem().string() : case_id;
        Check(ld_detection_write_json(det.get(), id.c_str(), json_out.c_str()));
      }
    } else if (score->parsed()) {
      auto det = Load(score_det);
      double s = 0.0;
      Check(ld_patient_score(det.get(), &s));
      std::cout << FormatScore(s) << "\n";
    } else if (ensemble->parsed()) {
      std::vector<VolumePtr> owned;
      std::vector<const ld_volume*> maps;
      for (const auto& p : ens_inputs) {
        owned.push_back(Load(p));
        maps.push_back(owned.back().get());
      }
      ld_volume* mean = nullptr;
      Check(ld_ensemble_mean(maps.data(), maps.size(), &mean));
      VolumePtr mean_ptr(mean);
      Check(ld_volume_write_mha(mean, ens_out.c_str()));
    } else if (crop->parsed()) {
      const auto margin = ParseMargin(margin_text);
      auto mask = Load(crop_mask);
      auto image = Load(crop_image);
      ld_crop_box box;
      Check(ld_roi_box(mask.get(), image.get(), margin.data(), &box));
      ld_volume* out = nullptr;
      Check(ld_roi_crop(image.get(), &box, &out));
      VolumePtr out_ptr(out);
      Check(ld_volume_write_mha(out, crop_out.c_str()));
      Check(ld_crop_box_write_json(&box, crop_box_out.c_str()));
    } else if (uncrop->parsed()) {
      ld_crop_box box;
      Check(ld_crop_box_read_json(uncrop_box.c_str(), &box));
      auto det = Load(uncrop_det);
      ld_volume* out = nullptr;
      Check(ld_roi_uncrop(det.get(), &box, &out));
      VolumePtr out_ptr(out);
      Check(ld_volume_write_mha(out, uncrop_out.c_str()));
    } else if (split->parsed()) {
      ld_split_summary summary;
      Check(ld_split_run(split_cases.c_str(), split_folds, split_seed, split_out.c_str(),
                         &summary));
    } else if (eval->parsed()) {
      ld_eval_options opts;
      ld_eval_options_default(&opts);
      opts.min_iou = min_iou;
      opts.bootstrap = bootstrap;
      opts.seed = eval_seed;
      opts.level = level;
      opts.extraction = eval_flags.Params();
      opts.threads = threads;
      ld_eval_summary summary;
      Check(ld_eval_run(eval_manifest.c_str(), &opts, eval_out.c_str(),
                        eval_csv.empty() ? nullptr : eval_csv.c_str(), &summary));
      if (!quiet) {
        std::cerr << "AUROC " << FormatScore(summary.auroc) << "  AP " << FormatScore(summary.ap)
                  << "  (" << summary.n_cases << " cases, " << summary.n_lesions
                  << " lesions)\n";
      }
    } else if (sweep->parsed()) {
      const auto defaults = sweep_flags.Params();
      size_t rows = 0;
      Check(ld_sweep_run(sweep_config.c_str(), &defaults, threads, sweep_csv.c_str(),
                         sweep_svg.empty() ? nullptr : sweep_svg.c_str(), &rows));
    }
  } catch (const UsageError& e) {
    if (!e.message.empty()) std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const DataError&) {
    return kExitData;
  }
  return kExitOk;
}
