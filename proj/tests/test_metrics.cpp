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

#include <cmath>
#include <set>

#include "lesiondet/error.hpp"
#include "lesiondet/metrics.hpp"
#include "support.hpp"

using namespace lesiondet;

namespace {

Candidate Cand(int rank, double conf, std::vector<int64_t> voxels) {
  Candidate c;
  c.rank = rank;
  c.confidence = conf;
  c.seed_prob = conf;
  c.voxels = std::move(voxels);
  return c;
}

GtLesion Lesion(int id, std::vector<int64_t> voxels) { return GtLesion{id, std::move(voxels)}; }

CaseEval Case(const std::string& id, CaseLabel label, double score,
              std::vector<std::pair<double, bool>> dets, int lesions) {
  CaseEval c;
  c.case_id = id;
  c.label = label;
  c.patient_score = score;
  c.num_gt_lesions = lesions;
  int rank = 0;
  int next_lesion = 0;
  for (const auto& [conf, tp] : dets) {
    CandidateMatch m;
    m.rank = rank++;
    m.confidence = conf;
    if (tp) m.lesion_id = next_lesion++;
    c.matches.push_back(m);
  }
  return c;
}

}  // namespace

TEST_CASE("component labeling") {
  const Geometry g = testing::Cube(3);
  CHECK(LabelComponents(Volume(g, ElementKind::kUInt8), Connectivity::k26).empty());

  std::vector<uint8_t> m(27, 0);
  m[g.Linear({0, 0, 1})] = 1;
  m[g.Linear({1, 1, 1})] = 1;  // in-plane diagonal
  CHECK(LabelComponents(Volume(g, m), Connectivity::k26).size() == 1);
  CHECK(LabelComponents(Volume(g, m), Connectivity::k18).size() == 1);
  CHECK(LabelComponents(Volume(g, m), Connectivity::k6).size() == 2);
  m[g.Linear({1, 1, 1})] = 0;
  m[g.Linear({1, 1, 2})] = 1;  // corner diagonal
  CHECK(LabelComponents(Volume(g, m), Connectivity::k26).size() == 1);
  CHECK(LabelComponents(Volume(g, m), Connectivity::k18).size() == 2);
}

TEST_CASE("component labeling matches union-find on random masks") {
  SplitMix64 rng(4);
  for (int trial = 0; trial < 150; ++trial) {
    Geometry g;
    g.dims = {1 + static_cast<int64_t>(rng.Below(9)), 1 + static_cast<int64_t>(rng.Below(9)),
              1 + static_cast<int64_t>(rng.Below(9))};
    std::vector<double> mask(static_cast<std::size_t>(g.NumVoxels()));
    const double density = 0.1 + 0.5 * rng.Uniform();
    for (auto& x : mask) x = rng.Uniform() < density ? 1.0 + static_cast<double>(rng.Below(3)) : 0.0;
    std::vector<uint16_t> stored(mask.begin(), mask.end());
    const int conn[] = {6, 18, 26};
    const int c = conn[trial % 3];
    const auto got = LabelComponents(Volume(g, stored), ConnectivityFromInt(c));
    const auto want = oracle::Components(mask, testing::DimsOf(g), c);
    REQUIRE(got.size() == want.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].lesion_id == static_cast<int>(i));
      REQUIRE(got[i].voxels == want[i]);
      total += got[i].voxels.size();
    }
    CHECK(total == static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                          [](double x) { return x != 0.0; })));
  }
}

TEST_CASE("candidate matching") {
  const std::vector<GtLesion> one{Lesion(0, {1, 2, 3})};
  SUBCASE("identical region") {
    const std::vector<Candidate> c{Cand(0, 0.9, {1, 2, 3})};
    const auto m = MatchCandidates(c, one);
    REQUIRE(m[0].lesion_id);
    CHECK(*m[0].lesion_id == 0);
    CHECK(m[0].iou == 1.0);
  }
  SUBCASE("disjoint region") {
    const std::vector<Candidate> c{Cand(0, 0.9, {7, 8})};
    CHECK_FALSE(MatchCandidates(c, one)[0].lesion_id);
  }
  SUBCASE("two candidates on one lesion") {
    // Rank 1 has the higher confidence and the smaller overlap; it still wins.
    const std::vector<Candidate> c{Cand(0, 0.5, {1, 2, 3}), Cand(1, 0.8, {3})};
    const auto m = MatchCandidates(c, one);
    CHECK_FALSE(m[0].lesion_id);
    REQUIRE(m[1].lesion_id);
    CHECK(m[1].iou == doctest::Approx(1.0 / 3.0));
    const auto want = oracle::GreedyMatch({{0.5, {1, 2, 3}}, {0.8, {3}}}, {{1, 2, 3}}, 0.10);
    CHECK_FALSE(want[0].has_value());
    CHECK(want[1] == std::optional<int>(0));
  }
  SUBCASE("IoU threshold") {
    const std::vector<GtLesion> big{Lesion(0, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10})};
    const std::vector<Candidate> c{Cand(0, 0.9, {0})};
    CHECK_FALSE(MatchCandidates(c, big, 0.10)[0].lesion_id);  // 1/11 < 0.1
    CHECK(MatchCandidates(c, big, 0.09)[0].lesion_id);
  }
}

TEST_CASE("matching agrees with the set-algebra oracle") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_les = static_cast<int>(rng.Below(5));
    const int n_cand = static_cast<int>(rng.Below(6));
    std::vector<GtLesion> lesions;
    std::vector<std::set<int64_t>> lesion_sets;
    int64_t base = 0;
    for (int l = 0; l < n_les; ++l) {
      std::vector<int64_t> v;
      const int64_t len = 1 + static_cast<int64_t>(rng.Below(8));
      for (int64_t i = 0; i < len; ++i) v.push_back(base + i);
      base += len + static_cast<int64_t>(rng.Below(3));
      lesion_sets.emplace_back(v.begin(), v.end());
      lesions.push_back(Lesion(l, std::move(v)));
    }
    std::vector<Candidate> cands;
    std::vector<std::pair<double, std::set<int64_t>>> oracle_cands;
    std::set<int64_t> used;
    for (int c = 0; c < n_cand; ++c) {
      std::vector<int64_t> v;
      const int64_t start = static_cast<int64_t>(rng.Below(static_cast<uint64_t>(base + 5)));
      const int64_t len = 1 + static_cast<int64_t>(rng.Below(6));
      for (int64_t i = start; i < start + len; ++i) {
        if (used.insert(i).second) v.push_back(i);
      }
      if (v.empty()) continue;
      const double conf = static_cast<double>(1 + rng.Below(4)) / 4.0;
      oracle_cands.push_back({conf, std::set<int64_t>(v.begin(), v.end())});
      cands.push_back(Cand(static_cast<int>(cands.size()), conf, std::move(v)));
    }
    const double min_iou = 0.05 + 0.3 * rng.Uniform();
    const auto got = MatchCandidates(cands, lesions, min_iou);
    const auto want = oracle::GreedyMatch(oracle_cands, lesion_sets, min_iou);
    std::set<int> matched;
    for (std::size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].lesion_id == want[i]);
      if (got[i].lesion_id) CHECK(matched.insert(*got[i].lesion_id).second);
    }
    CHECK(matched.size() <= std::min(cands.size(), lesions.size()));
  }
}

TEST_CASE("AUROC") {
  CHECK(Auroc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.2}) == 1.0);
  CHECK(Auroc(std::vector<double>{0.5}, std::vector<double>{0.5}) == 0.5);
  CHECK(Auroc(std::vector<double>{0.1}, std::vector<double>{0.9}) == 0.0);
  CHECK_THROWS_AS(Auroc(std::vector<double>{}, std::vector<double>{0.5}), Error);
  CHECK_THROWS_AS(Auroc(std::vector<double>{0.5}, std::vector<double>{}), Error);

  SplitMix64 rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> pos(1 + rng.Below(100)), neg(1 + rng.Below(100));
    const int levels = 2 + static_cast<int>(rng.Below(20));
    // Integer scores keep ties exact under the transform below.
    for (auto& x : pos) x = static_cast<double>(rng.Below(levels) + rng.Below(2));
    for (auto& x : neg) x = static_cast<double>(rng.Below(levels));
    const double got = Auroc(pos, neg);
    REQUIRE(std::abs(got - oracle::PairwiseAuroc(pos, neg)) <= 1e-12);
    // Strictly increasing transform leaves it unchanged.
    std::vector<double> tp(pos), tn(neg);
    for (auto& x : tp) x = std::exp(0.3 * x) - 7.0;
    for (auto& x : tn) x = std::exp(0.3 * x) - 7.0;
    REQUIRE(std::abs(Auroc(tp, tn) - got) <= 1e-12);
  }
  // Tie-free label swap.
  std::vector<double> pos, neg;
  for (int i = 0; i < 40; ++i) (i % 3 ? pos : neg).push_back(rng.Uniform());
  CHECK(std::abs(Auroc(pos, neg) + Auroc(neg, pos) - 1.0) <= 1e-12);
}

TEST_CASE("average precision") {
  const std::vector<ScoredDetection> hit{{"a", 0, 0.9, true}};
  CHECK(AveragePrecision(hit, 1) == 1.0);
  const std::vector<ScoredDetection> tp_first{{"a", 0, 0.9, true}, {"a", 1, 0.8, false}};
  CHECK(AveragePrecision(tp_first, 1) == 1.0);
  const std::vector<ScoredDetection> fp_first{{"a", 0, 0.9, false}, {"a", 1, 0.8, true}};
  CHECK(AveragePrecision(fp_first, 1) == 0.5);
  const std::vector<ScoredDetection> missed{{"a", 0, 0.9, true}};
  CHECK(AveragePrecision(missed, 2) == 0.5);
  CHECK(AveragePrecision(std::vector<ScoredDetection>{}, 3) == 0.0);
  CHECK_THROWS_AS(AveragePrecision(hit, 0), Error);

  // Equal confidences rank by case id, then rank.
  const std::vector<ScoredDetection> tied{{"b", 0, 0.5, true}, {"a", 0, 0.5, false}};
  CHECK(AveragePrecision(tied, 1) == 0.5);

  SplitMix64 rng(66);
  for (int trial = 0; trial < 500; ++trial) {
    const int64_t lesions = 1 + static_cast<int64_t>(rng.Below(8));
    std::vector<ScoredDetection> dets;
    std::vector<oracle::RankedHit> hits;
    int64_t tps = 0;
    const int n = static_cast<int>(rng.Below(21));
    for (int i = 0; i < n; ++i) {
      const bool tp = tps < lesions && rng.Below(2) == 0;
      tps += tp;
      const std::string id = "c" + std::to_string(rng.Below(4));
      const double conf = static_cast<double>(rng.Below(6)) / 5.0;
      dets.push_back({id, i, conf, tp});
      hits.push_back({id, i, conf, tp});
    }
    const double ap = AveragePrecision(dets, lesions);
    REQUIRE(std::abs(ap - oracle::ExhaustiveAp(hits, lesions)) <= 1e-12);
    CHECK(ap <= 1.0 + 1e-15);
    for (auto& d : dets) d.confidence = std::sqrt(d.confidence) * 10.0 + 1.0;
    REQUIRE(std::abs(AveragePrecision(dets, lesions) - ap) <= 1e-12);
  }
}

TEST_CASE("metrics over case evaluations") {
  const std::vector<CaseEval> cases{
      Case("p1", CaseLabel::kPositive, 0.9, {{0.9, true}, {0.3, false}}, 1),
      Case("p2", CaseLabel::kPositive, 0.4, {{0.4, false}}, 1),
      Case("n1", CaseLabel::kNegative, 0.5, {{0.5, false}}, 0),
  };
  CHECK(Auroc(cases) == 0.5);
  // Sweep: 0.9 TP (P=1, R=.5) -> AP = 0.5.
  CHECK(AveragePrecision(cases) == 0.5);
}

TEST_CASE("bootstrap interval") {
  SplitMix64 rng(9);
  std::vector<CaseEval> cases;
  for (int i = 0; i < 60; ++i) {
    const bool pos = i % 3 == 0;
    const double score = rng.Uniform() + (pos ? 0.3 : 0.0);
    cases.push_back(Case("c" + std::to_string(i), pos ? CaseLabel::kPositive : CaseLabel::kNegative,
                         score, {{score, pos && rng.Below(3) != 0}}, pos ? 1 : 0));
  }
  BootstrapOptions opt;
  opt.n_resamples = 300;
  opt.seed = 5;
  const Interval a = BootstrapCi(cases, Metric::kAuroc, opt);
  const Interval b = BootstrapCi(cases, Metric::kAuroc, opt);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.lower <= a.upper);
  CHECK(a.lower <= Auroc(cases));
  CHECK(a.upper >= Auroc(cases));

  opt.threads = 4;
  const Interval c = BootstrapCi(cases, Metric::kAveragePrecision, opt);
  opt.threads = 1;
  const Interval d = BootstrapCi(cases, Metric::kAveragePrecision, opt);
  CHECK(c.lower == d.lower);
  CHECK(c.upper == d.upper);

  opt.seed = 6;
  const Interval e = BootstrapCi(cases, Metric::kAuroc, opt);
  CHECK((e.lower != a.lower || e.upper != a.upper));
}

TEST_CASE("bootstrap of a single configuration collapses to the point estimate") {
  std::vector<CaseEval> cases(5, Case("x", CaseLabel::kPositive, 0.7, {{0.7, true}}, 1));
  const Interval ci = BootstrapCi(cases, Metric::kAveragePrecision, BootstrapOptions{});
  CHECK(ci.lower == 1.0);
  CHECK(ci.upper == 1.0);
}

TEST_CASE("bootstrap errors and redraws") {
  const std::vector<CaseEval> only_pos{Case("a", CaseLabel::kPositive, 0.5, {}, 1)};
  CHECK_THROWS_AS(BootstrapCi(only_pos, Metric::kAuroc, BootstrapOptions{}), Error);
  CHECK_THROWS_AS(BootstrapCi(std::vector<CaseEval>{}, Metric::kAuroc, BootstrapOptions{}), Error);
  // One positive among many negatives: many resamples lack a positive and are
  // redrawn; the interval still comes out ordered.
  std::vector<CaseEval> rare{Case("p", CaseLabel::kPositive, 0.9, {{0.9, true}}, 1)};
  for (int i = 0; i < 3; ++i) {
    rare.push_back(Case("n" + std::to_string(i), CaseLabel::kNegative, 0.1 * i, {{0.1 * i, false}}, 0));
  }
  const Interval ci = BootstrapCi(rare, Metric::kAuroc, BootstrapOptions{});
  CHECK(ci.lower == 1.0);
  CHECK(ci.upper == 1.0);
}
