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

#ifndef LESIONDET_TESTS_SUPPORT_HPP_
#define LESIONDET_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lesiondet/candidates.hpp"
#include "lesiondet/rng.hpp"
#include "lesiondet/volume.hpp"
#include "oracles/oracles.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("lesiondet_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void Spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline lesiondet::Geometry Cube(int64_t n) {
  lesiondet::Geometry g;
  g.dims = {n, n, n};
  return g;
}

// Probability values with plenty of exact ties and zeros: quantized to
// multiples of 1/levels, zero with probability `zero_fraction`.
inline std::vector<float> RandomQuantized(lesiondet::SplitMix64& rng, int64_t n, int levels,
                                          double zero_fraction) {
  std::vector<float> v(static_cast<std::size_t>(n));
  for (auto& x : v) {
    if (rng.Uniform() < zero_fraction) {
      x = 0.0f;
    } else {
      x = static_cast<float>(static_cast<double>(1 + rng.Below(levels)) / levels);
    }
  }
  return v;
}

// Smooth map: a few Gaussian blobs with random peaks on a weak noise floor.
inline std::vector<float> RandomBlobs(lesiondet::SplitMix64& rng, const lesiondet::Geometry& g,
                                      int blobs) {
  std::vector<float> v(static_cast<std::size_t>(g.NumVoxels()));
  for (auto& x : v) x = static_cast<float>(0.05 * rng.Uniform());
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.Uniform() * g.dims[0], cy = rng.Uniform() * g.dims[1],
                 cz = rng.Uniform() * g.dims[2];
    const double sigma = 0.8 + 2.5 * rng.Uniform();
    const double peak = 0.2 + 0.8 * rng.Uniform();
    for (int64_t i = 0; i < g.NumVoxels(); ++i) {
      const auto c = g.Unlinear(i);
      const double d2 = (c[0] - cx) * (c[0] - cx) + (c[1] - cy) * (c[1] - cy) +
                        (c[2] - cz) * (c[2] - cz);
      const double p = peak * std::exp(-d2 / (2 * sigma * sigma));
      v[i] = std::max(v[i], static_cast<float>(p));
    }
  }
  return v;
}

inline oracle::Dims DimsOf(const lesiondet::Geometry& g) {
  return {g.dims[0], g.dims[1], g.dims[2]};
}

inline oracle::ExtractParams ToOracle(const lesiondet::ExtractionParams& p) {
  oracle::ExtractParams o;
  o.adaptive = p.mode == lesiondet::ThresholdMode::kAdaptive;
  o.alpha = p.alpha;
  o.tau = p.tau;
  o.max_candidates = p.max_candidates;
  o.min_seed_prob = p.min_seed_prob;
  o.min_voxels = p.min_voxels;
  o.connectivity = static_cast<int>(p.connectivity);
  o.mean_confidence = p.confidence == lesiondet::ConfidenceMode::kMean;
  return o;
}

// Same candidate count, order, seeds, voxel sets and confidences.
inline bool SameAsOracle(const lesiondet::DetectionResult& got,
                         const std::vector<oracle::ExtractedRegion>& want,
                         const lesiondet::Geometry& g, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (got.candidates.size() != want.size()) {
    return fail("count " + std::to_string(got.candidates.size()) + " vs " +
                std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& c = got.candidates[i];
    if (c.rank != static_cast<int>(i)) return fail("rank");
    if (g.Linear(c.seed) != want[i].seed) return fail("seed of candidate " + std::to_string(i));
    if (c.seed_prob != want[i].seed_prob) return fail("seed_prob");
    if (c.confidence != want[i].confidence) return fail("confidence");
    if (std::vector<int64_t>(want[i].voxels.begin(), want[i].voxels.end()) != c.voxels) {
      return fail("voxels of candidate " + std::to_string(i));
    }
  }
  return true;
}

inline lesiondet::ExtractionParams RandomParams(lesiondet::SplitMix64& rng) {
  lesiondet::ExtractionParams p;
  if (rng.Below(2) == 0) {
    p.mode = lesiondet::ThresholdMode::kAdaptive;
    p.alpha = 0.02 + 0.98 * rng.Uniform();
  } else {
    p.mode = lesiondet::ThresholdMode::kFixed;
    p.tau = static_cast<double>(1 + rng.Below(10)) / 10.0;
  }
  p.max_candidates = 1 + static_cast<int>(rng.Below(8));
  const double seeds[] = {0.0, 1e-6, 0.3};
  p.min_seed_prob = seeds[rng.Below(3)];
  p.min_voxels = static_cast<int64_t>(rng.Below(15));
  const int conn[] = {6, 18, 26};
  p.connectivity = lesiondet::ConnectivityFromInt(conn[rng.Below(3)]);
  p.confidence = rng.Below(4) == 0 ? lesiondet::ConfidenceMode::kMean
                                   : lesiondet::ConfidenceMode::kSeed;
  return p;
}

}  // namespace testing

#endif  // LESIONDET_TESTS_SUPPORT_HPP_
