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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "json.hpp"
#include "lesiondet/candidates.hpp"
#include "lesiondet/error.hpp"
#include "support.hpp"

using namespace lesiondet;

namespace {

ProbabilityMap Line(std::vector<float> values) {
  Geometry g;
  g.dims = {static_cast<int64_t>(values.size()), 1, 1};
  return ProbabilityMap(Volume(g, std::move(values)));
}

ExtractionParams Loose(ExtractionParams p) {
  p.min_voxels = 1;
  return p;
}

}  // namespace

TEST_CASE("all-zero map yields nothing") {
  const ProbabilityMap p(Volume(testing::Cube(4), ElementKind::kFloat32));
  const auto d = ExtractCandidates(p, ExtractionParams{});
  CHECK(d.candidates.empty());
  CHECK(MaxValue(d.detection_map) == 0.0);
  CHECK(PatientScore(d) == 0.0);
}

TEST_CASE("isolated seed becomes a one-voxel candidate") {
  std::vector<float> v(27, 0.0f);
  v[13] = 0.9f;
  const ProbabilityMap p(Volume(testing::Cube(3), v));
  const auto d = ExtractCandidates(p, Loose(ExtractionParams::Adaptive(1.0 / 15.0)));
  REQUIRE(d.candidates.size() == 1);
  CHECK(d.candidates[0].voxels == std::vector<int64_t>{13});
  CHECK(d.candidates[0].seed == Index3{1, 1, 1});
  CHECK(d.candidates[0].confidence == doctest::Approx(0.9));
  CHECK(PatientScore(d) == doctest::Approx(0.9));
}

TEST_CASE("fixed threshold on a 4-voxel line") {
  ExtractionParams params = Loose(ExtractionParams::Fixed(0.4));
  params.connectivity = Connectivity::k6;
  params.max_candidates = 5;
  const auto p = Line({0.9f, 0.5f, 0.3f, 0.6f});
  const auto d = ExtractCandidates(p, params);
  REQUIRE(d.candidates.size() >= 2);
  CHECK(d.candidates[0].voxels == std::vector<int64_t>{0, 1});
  CHECK(d.candidates[0].confidence == static_cast<double>(0.9f));
  CHECK(d.candidates[1].voxels == std::vector<int64_t>{3});
  CHECK(d.candidates[1].confidence == static_cast<double>(0.6f));
  // The 0.3 voxel is left over; it is below tau, so it seeds a region of
  // just itself.
  REQUIRE(d.candidates.size() == 3);
  CHECK(d.candidates[2].voxels == std::vector<int64_t>{2});

  const auto want = oracle::Extract({0.9f, 0.5f, 0.3f, 0.6f}, {4, 1, 1}, testing::ToOracle(params));
  CHECK(testing::SameAsOracle(d, want, p.geometry()));
}

TEST_CASE("matches the brute-force oracle on random maps") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Geometry g = testing::Cube(8);
    const auto values = trial % 2 == 0 ? testing::RandomQuantized(rng, g.NumVoxels(), 8, 0.4)
                                       : testing::RandomBlobs(rng, g, 3);
    const ExtractionParams params = testing::RandomParams(rng);
    const auto d = ExtractCandidates(ProbabilityMap(Volume(g, values)), params);
    const auto want = oracle::Extract(values, testing::DimsOf(g), testing::ToOracle(params));
    std::string why;
    INFO("trial " << trial);
    REQUIRE_MESSAGE(testing::SameAsOracle(d, want, g, &why), why);
  }
}

TEST_CASE("extraction invariants") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const Geometry g = testing::Cube(7);
    const auto values = testing::RandomQuantized(rng, g.NumVoxels(), 5, 0.3);
    ExtractionParams params = testing::RandomParams(rng);
    params.confidence = ConfidenceMode::kSeed;
    const ProbabilityMap p(Volume(g, values));
    const auto d = ExtractCandidates(p, params);
    const auto det = d.detection_map.values<float>();

    std::set<int64_t> support;
    for (std::size_t k = 0; k < d.candidates.size(); ++k) {
      const Candidate& c = d.candidates[k];
      if (k > 0) CHECK(c.confidence <= d.candidates[k - 1].confidence);
      CHECK(c.seed_prob >= params.min_seed_prob);
      CHECK(static_cast<int64_t>(c.voxels.size()) >= params.min_voxels);
      CHECK(std::binary_search(c.voxels.begin(), c.voxels.end(), g.Linear(c.seed)));
      for (int64_t v : c.voxels) {
        REQUIRE(support.insert(v).second);  // disjoint
        CHECK(det[v] == static_cast<float>(c.confidence));
        if (v != g.Linear(c.seed)) CHECK(static_cast<double>(values[v]) >= c.threshold);
      }
    }
    for (int64_t i = 0; i < g.NumVoxels(); ++i) {
      if (!support.count(i)) REQUIRE(det[i] == 0.0f);
    }
    CHECK(static_cast<int>(d.candidates.size()) <= params.max_candidates);
  }
}

TEST_CASE("patient score") {
  DetectionResult none;
  none.detection_map = Volume(testing::Cube(2), ElementKind::kFloat32);
  CHECK(PatientScore(none) == 0.0);

  const auto d = ExtractCandidates(Line({0.9f, 0.0f, 0.6f}), Loose(ExtractionParams::Fixed(0.4)));
  REQUIRE(d.candidates.size() == 2);
  CHECK(PatientScore(d) == static_cast<double>(0.9f));

  SplitMix64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Geometry g = testing::Cube(6);
    const auto values = testing::RandomQuantized(rng, g.NumVoxels(), 100, 0.5);
    ExtractionParams params = testing::RandomParams(rng);
    params.min_voxels = 1;
    params.min_seed_prob = 0.0;
    params.confidence = ConfidenceMode::kSeed;
    const auto result = ExtractCandidates(ProbabilityMap(Volume(g, values)), params);
    CHECK(PatientScore(result) == static_cast<double>(*std::max_element(values.begin(), values.end())));
  }
}

TEST_CASE("undersized regions are removed but not emitted") {
  // Two blobs: a single bright voxel and a dimmer 3-voxel run.
  const auto p = Line({0.95f, 0.0f, 0.5f, 0.5f, 0.5f});
  ExtractionParams params = ExtractionParams::Fixed(0.4);
  params.min_voxels = 2;
  const auto d = ExtractCandidates(p, params);
  REQUIRE(d.candidates.size() == 1);
  CHECK(d.candidates[0].voxels == std::vector<int64_t>{2, 3, 4});
  CHECK(d.candidates[0].rank == 0);
  CHECK(PatientScore(d) == static_cast<double>(0.5f));
}

TEST_CASE("extraction stops at max_candidates and at the iteration cap") {
  // Checkerboard under 6-connectivity: every positive voxel is isolated.
  const Geometry g = testing::Cube(6);
  std::vector<float> v(static_cast<std::size_t>(g.NumVoxels()));
  for (int64_t i = 0; i < g.NumVoxels(); ++i) {
    const auto c = g.Unlinear(i);
    v[i] = (c[0] + c[1] + c[2]) % 2 == 0 ? 0.7f : 0.0f;
  }
  const ProbabilityMap p(Volume(g, v));
  ExtractionParams params = ExtractionParams::Adaptive(0.5);
  params.connectivity = Connectivity::k6;
  params.min_voxels = 1;
  params.max_candidates = 3;
  auto d = ExtractCandidates(p, params);
  REQUIRE(d.candidates.size() == 3);
  CHECK(d.candidates[0].voxels == std::vector<int64_t>{0});
  CHECK(d.candidates[1].voxels == std::vector<int64_t>{2});

  params.min_voxels = 2;  // nothing qualifies; runs out the cap
  d = ExtractCandidates(p, params);
  CHECK(d.candidates.empty());
  CHECK(IterationCap(params) == 32);

  // Under 18-connectivity the checkerboard is one region.
  params.connectivity = Connectivity::k18;
  d = ExtractCandidates(p, params);
  REQUIRE(d.candidates.size() == 1);
  CHECK(d.candidates[0].voxels.size() == 108);
}

TEST_CASE("alpha = 1 grows exactly the plateau of the maximum") {
  const auto p = Line({0.2f, 0.8f, 0.8f, 0.79f, 0.8f});
  const auto d = ExtractCandidates(p, Loose(ExtractionParams::Adaptive(1.0)));
  REQUIRE(!d.candidates.empty());
  CHECK(d.candidates[0].voxels == std::vector<int64_t>{1, 2});
  CHECK(d.candidates[0].seed == Index3{1, 0, 0});  // smallest index wins ties
}

TEST_CASE("adaptive alpha = 0.4 / peak reproduces the fixed 0.4 region") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Geometry g = testing::Cube(7);
    auto values = testing::RandomBlobs(rng, g, 2);
    values[rng.Below(values.size())] = 0.95f;  // peak >= 0.4 so alpha <= 1
    const ProbabilityMap p(Volume(g, values));
    const double peak = *std::max_element(values.begin(), values.end());
    ExtractionParams fixed = Loose(ExtractionParams::Fixed(0.4));
    ExtractionParams adaptive = Loose(ExtractionParams::Adaptive(0.4 / peak));
    const auto a = ExtractCandidates(p, fixed);
    const auto b = ExtractCandidates(p, adaptive);
    REQUIRE(!a.candidates.empty());
    REQUIRE(!b.candidates.empty());
    // alpha * peak can differ from 0.4 in the last bit; compare regions.
    CHECK(a.candidates[0].voxels == b.candidates[0].voxels);
  }
}

TEST_CASE("mean confidence mode") {
  const auto p = Line({0.9f, 0.5f, 0.0f, 0.6f});
  ExtractionParams params = Loose(ExtractionParams::Fixed(0.4));
  params.confidence = ConfidenceMode::kMean;
  const auto d = ExtractCandidates(p, params);
  REQUIRE(d.candidates.size() == 2);
  CHECK(d.candidates[0].confidence == doctest::Approx((0.9 + 0.5) / 2));
  CHECK(d.candidates[0].seed_prob == static_cast<double>(0.9f));
  CHECK(d.detection_map.values<float>()[1] == static_cast<float>(d.candidates[0].confidence));
}

TEST_CASE("parameter validation") {
  const auto p = Line({0.5f});
  CHECK_THROWS_AS(ExtractCandidates(p, ExtractionParams::Adaptive(0.0)), Error);
  CHECK_THROWS_AS(ExtractCandidates(p, ExtractionParams::Adaptive(1.5)), Error);
  CHECK_THROWS_AS(ExtractCandidates(p, ExtractionParams::Fixed(0.0)), Error);
  ExtractionParams bad;
  bad.max_candidates = 0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = ExtractionParams{};
  bad.min_seed_prob = -0.1;
  CHECK_THROWS_AS(bad.Validate(), Error);
  CHECK_THROWS_AS(ConnectivityFromInt(8), Error);
  CHECK(NeighborOffsets(Connectivity::k6).size() == 6);
  CHECK(NeighborOffsets(Connectivity::k18).size() == 18);
  CHECK(NeighborOffsets(Connectivity::k26).size() == 26);
}

TEST_CASE("candidate JSON document") {
  const auto p = Line({0.9f, 0.5f, 0.0f, 0.6f});
  const ExtractionParams params = Loose(ExtractionParams::Fixed(0.4));
  const auto d = ExtractCandidates(p, params);
  const auto j = nlohmann::json::parse(CandidatesToJson("case_7", params, d));
  CHECK(j["case_id"] == "case_7");
  CHECK(j["params"]["mode"] == "fixed");
  CHECK(j["params"]["tau"] == 0.4);
  CHECK(j["params"]["connectivity"] == 26);
  REQUIRE(j["candidates"].size() == 2);
  CHECK(j["candidates"][0]["rank"] == 0);
  CHECK(j["candidates"][0]["seed"] == nlohmann::json::array({0, 0, 0}));
  CHECK(j["candidates"][0]["num_voxels"] == 2);
  CHECK(j["candidates"][1]["seed"] == nlohmann::json::array({3, 0, 0}));
  CHECK(j["candidates"][1]["confidence"].get<double>() == static_cast<double>(0.6f));
  CHECK(j["patient_score"].get<double>() == static_cast<double>(0.9f));
}

TEST_CASE("extraction is deterministic") {
  SplitMix64 rng(8);
  const Geometry g = testing::Cube(10);
  const ProbabilityMap p(Volume(g, testing::RandomBlobs(rng, g, 4)));
  const auto a = ExtractCandidates(p, ExtractionParams{});
  const auto b = ExtractCandidates(p, ExtractionParams{});
  CHECK(a.detection_map == b.detection_map);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].voxels == b.candidates[i].voxels);
  }
}
