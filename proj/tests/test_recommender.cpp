/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vizrec/error.hpp"
#include "vizrec/experiments.hpp"
#include "vizrec/preprocess.hpp"
#include "vizrec/random.hpp"
#include "vizrec/recommender.hpp"
#include "vizrec/table.hpp"

using namespace vizrec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const Visualization kPlantedRef{Predicate{}, "x", 10};
const Visualization kUniformRef{Predicate{}, "x0", 10};

ExplorationConfig at_d(int d) {
  ExplorationConfig cfg;
  cfg.vc_dimension = d;
  return cfg;
}

// Same rows in a shuffled order, reloaded through CSV.
Table shuffled(const Table& t, std::uint64_t seed) {
  std::istringstream in(to_csv(t));
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  Rng rng(seed);
  for (std::size_t i = lines.size(); i > 1; --i) std::swap(lines[i - 1], lines[rng.below(i)]);
  std::string csv = header + "\n";
  for (const auto& l : lines) csv += l + "\n";
  return load_table(csv);
}

}  // namespace

TEST(Chebyshev, Examples) {
  EXPECT_DOUBLE_EQ(chebyshev_distance(vec({0.5, 0.5}), vec({1.0, 0.0})), 0.5);
  EXPECT_DOUBLE_EQ(chebyshev_distance(vec({0.25, 0.25, 0.5}), vec({0.25, 0.25, 0.5})), 0.0);
  EXPECT_NEAR(chebyshev_distance(vec({0.1, 0.2, 0.7}), vec({0.3, 0.3, 0.4})), 0.3, 1e-15);
  EXPECT_THROW(chebyshev_distance(vec({1.0}), vec({0.5, 0.5})), InvalidArgument);
}

TEST(Chebyshev, MetricProperties) {
  Rng rng(8);
  auto random_pmf = [&] {
    Eigen::VectorXd p(5);
    for (int i = 0; i < 5; ++i) p(i) = rng.uniform01() + 1e-3;
    return Eigen::VectorXd(p / p.sum());
  };
  for (int t = 0; t < 200; ++t) {
    const auto a = random_pmf(), b = random_pmf(), c = random_pmf();
    EXPECT_EQ(chebyshev_distance(a, b), chebyshev_distance(b, a));
    EXPECT_LE(chebyshev_distance(a, c), chebyshev_distance(a, b) + chebyshev_distance(b, c) + 1e-15);
    EXPECT_LE(chebyshev_distance(a, b), 1.0);
  }
}

TEST(Safety, Rule) {
  EXPECT_TRUE(is_safe(0.3, 0.2, std::nullopt));
  EXPECT_FALSE(is_safe(0.2, 0.2, std::nullopt));
  EXPECT_FALSE(is_safe(0.3, 0.2, 0.3));
  EXPECT_TRUE(is_safe(0.31, 0.2, 0.3));
}

TEST(Vizrec, UniformDataHasNoRecommendations) {
  const auto t = gen_uniform_dataset(100000, 1);
  const auto r = vizrec::vizrec(kUniformRef, t, ExplorationConfig{});
  EXPECT_TRUE(r.recommendations.empty());
  EXPECT_EQ(r.bounds.vc_dimension, 4);
}

TEST(Vizrec, IdenticalCandidateIsNotRecommended) {
  const auto t = gen_planted_dataset(10000, 1);
  const auto all = score_candidates(kPlantedRef, t, at_d(4));
  const auto it = std::find_if(all.recommendations.begin(), all.recommendations.end(),
                               [](const Recommendation& r) { return r.candidate.predicate.is_true(); });
  ASSERT_NE(it, all.recommendations.end());
  EXPECT_EQ(it->distance, 0.0);
  EXPECT_FALSE(it->safe);
}

TEST(Vizrec, PlantedDeviationRanksFirst) {
  const auto t = gen_planted_dataset(10000, 1);
  const auto r = vizrec::vizrec(kPlantedRef, t, at_d(4));
  ASSERT_FALSE(r.recommendations.empty());
  const auto& top = r.recommendations.front();
  EXPECT_EQ(canonical_string(top.candidate.predicate), canonical_string(Predicate({single("f", Op::Le, 0)})));
  EXPECT_DOUBLE_EQ(top.distance, 0.5);
  EXPECT_EQ(top.support, 5000u);
  const double expect = 0.5 - (epsilon_bar(4, 0.05, 10000).value + epsilon_bar(4, 0.05, 5000).value);
  EXPECT_NEAR(top.interest, expect, 1e-12);
  EXPECT_TRUE(top.safe);
}

TEST(Vizrec, StoredFieldsAreConsistent) {
  const auto t = gen_planted_dataset(4000, 2);
  const auto r = score_candidates(kPlantedRef, t, at_d(4));
  for (const auto& rec : r.recommendations) {
    EXPECT_DOUBLE_EQ(rec.uncertainty, rec.eps_reference + rec.eps_candidate);
    EXPECT_DOUBLE_EQ(rec.interest, rec.distance - rec.uncertainty);
    EXPECT_EQ(rec.safe, is_safe(rec.distance, rec.uncertainty, r.eps_v));
    EXPECT_DOUBLE_EQ(rec.distance, chebyshev_distance(r.reference_pmf, rec.pmf));
    EXPECT_DOUBLE_EQ(rec.eps_candidate, epsilon_bar(r.bounds, rec.support).value);
    EXPECT_DOUBLE_EQ(rec.selectivity, static_cast<double>(rec.support) / 4000.0);
  }
}

TEST(Vizrec, RankingOrder) {
  const auto t = gen_planted_dataset(20000, 3);
  const auto r = vizrec::vizrec(kPlantedRef, t, at_d(4));
  ASSERT_GT(r.recommendations.size(), 2u);
  for (std::size_t i = 1; i < r.recommendations.size(); ++i) {
    const auto& a = r.recommendations[i - 1];
    const auto& b = r.recommendations[i];
    EXPECT_TRUE(a.interest > b.interest ||
                (a.interest == b.interest && canonical_string(a.candidate.predicate) < canonical_string(b.candidate.predicate)));
  }
}

TEST(Vizrec, RowPermutationDoesNotChangeOutput) {
  const auto t = gen_planted_dataset(3000, 4);
  const auto a = to_json(vizrec::vizrec(kPlantedRef, t, at_d(4)));
  const auto b = to_json(vizrec::vizrec(kPlantedRef, shuffled(t, 99), at_d(4)));
  EXPECT_EQ(a["recommendations"], b["recommendations"]);
}

TEST(Vizrec, OneSampleIsLessConservative) {
  const auto t = gen_restriction_dataset(20000, 1);
  const Visualization ref{Predicate{}, "g", 10};
  ExplorationConfig cfg;
  const auto two = vizrec::vizrec(ref, t, cfg).recommendations.size();
  cfg.one_sample = true;
  const auto one = score_candidates(ref, t, cfg);
  EXPECT_GE(std::count_if(one.recommendations.begin(), one.recommendations.end(), [](auto& r) { return r.safe; }),
            static_cast<std::ptrdiff_t>(two));
  for (const auto& r : one.recommendations) EXPECT_EQ(r.eps_reference, 0.0);
}

TEST(Vizrec, StricterBoundsNeverAddRecommendations) {
  const auto t = gen_planted_dataset(4000, 5);
  std::size_t prev = SIZE_MAX;
  for (double delta : {0.2, 0.05, 0.01, 1e-4}) {
    auto cfg = at_d(4);
    cfg.delta = delta;
    const auto n = vizrec::vizrec(kPlantedRef, t, cfg).recommendations.size();
    EXPECT_LE(n, prev);
    prev = n;
  }
  prev = SIZE_MAX;
  for (int d : {1, 4, 20, 200, 2000}) {
    const auto n = vizrec::vizrec(kPlantedRef, t, at_d(d)).recommendations.size();
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_EQ(prev, 0u);
}

TEST(Vizrec, PruningDoesNotLoseSafeCandidates) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    // A large d raises the floor so that pruning actually cuts branches.
    const auto t = gen_planted_dataset(200, seed);
    auto cfg = at_d(30);
    cfg.one_sample = true;
    cfg.operators = {Op::Le, Op::Ge, Op::Eq};
    const auto pruned = vizrec::vizrec(kPlantedRef, t, cfg);
    EXPECT_GT(pruned.stats.pruned_low_selectivity, 0u);
    EXPECT_FALSE(pruned.recommendations.empty());
    cfg.prune = false;
    const auto full = vizrec::vizrec(kPlantedRef, t, cfg);
    EXPECT_EQ(to_json(pruned)["recommendations"], to_json(full)["recommendations"]);
  }
}

TEST(Vizrec, VisualThresholdFiltersSmallDeviations) {
  const auto t = gen_planted_dataset(10000, 1);
  auto cfg = at_d(4);
  cfg.eps_v = 0.6;
  EXPECT_TRUE(vizrec::vizrec(kPlantedRef, t, cfg).recommendations.empty());
  cfg.eps_v = 0.1;
  EXPECT_FALSE(vizrec::vizrec(kPlantedRef, t, cfg).recommendations.empty());
}

TEST(Vizrec, JsonShape) {
  const auto t = gen_planted_dataset(2000, 1);
  const auto j = to_json(vizrec::vizrec(kPlantedRef, t, at_d(4)));
  for (const char* key : {"reference", "reference_pmf", "vc_dimension", "delta", "c", "log_base", "eps_v",
                          "one_sample", "gamma_min", "stats", "recommendations"})
    EXPECT_TRUE(j.contains(key)) << key;
  ASSERT_FALSE(j["recommendations"].empty());
  const auto& r = j["recommendations"][0];
  for (const char* key : {"visualization", "predicate_text", "pmf", "distance", "eps_reference", "eps_candidate",
                          "uncertainty", "interest", "safe", "support", "selectivity"})
    EXPECT_TRUE(r.contains(key)) << key;
}

TEST(Baseline, PlantedDeviationIsDiscovered) {
  const auto t = gen_planted_dataset(4000, 1);
  const auto b = baseline_chi2_recommend(kPlantedRef, t, at_d(4), 0.05);
  EXPECT_GT(b.hypotheses, 0u);
  EXPECT_DOUBLE_EQ(b.threshold, 0.05 / static_cast<double>(b.hypotheses));
  ASSERT_FALSE(b.discoveries.empty());
  EXPECT_GE(b.uncorrected_hits, b.discoveries.size());
  for (std::size_t i = 1; i < b.discoveries.size(); ++i)
    EXPECT_LE(b.discoveries[i - 1].test.p_value, b.discoveries[i].test.p_value);
}

TEST(Baseline, UncorrectedFindsAtLeastAsMuch) {
  const auto t = gen_uniform_dataset(20000, 2);
  const auto corrected = baseline_chi2_recommend(kUniformRef, t, ExplorationConfig{}, 0.05, true);
  const auto raw = baseline_chi2_recommend(kUniformRef, t, ExplorationConfig{}, 0.05, false);
  EXPECT_GE(raw.discoveries.size(), corrected.discoveries.size());
  EXPECT_EQ(raw.threshold, 0.05);
}

TEST(Preprocess, DropsConstantIdentifierAndCorrelatedColumns) {
  const auto t = gen_restriction_dataset(5000, 1);
  ExplorationConfig cfg;
  cfg.eps_rho = 0.01;
  cfg.protect = {"g"};
  const auto r = preprocess(t, cfg);
  std::map<std::string, DropReason> dropped;
  for (const auto& d : r.report.dropped) dropped[d.feature] = d.reason;
  EXPECT_EQ(dropped.at("const_a"), DropReason::Constant);
  EXPECT_EQ(dropped.at("const_b"), DropReason::Constant);
  EXPECT_EQ(dropped.at("row_id"), DropReason::IdentifierRatio);
  EXPECT_EQ(dropped.at("ts"), DropReason::IdentifierRatio);
  EXPECT_EQ(dropped.at("f1_copy"), DropReason::Correlated);
  EXPECT_EQ(dropped.at("f2_copy"), DropReason::Correlated);
  EXPECT_EQ(dropped.size(), 6u);
  EXPECT_EQ(r.table.column_names(), (std::vector<std::string>{"g", "f1", "f2"}));
  EXPECT_LT(r.report.vc_after, r.report.vc_before);
  EXPECT_EQ(r.report.vc_after, 3);
}

TEST(Preprocess, ProtectedColumnsStay) {
  const auto t = gen_restriction_dataset(2000, 1);
  ExplorationConfig cfg;
  cfg.protect = {"g", "row_id", "const_a"};
  const auto r = preprocess(t, cfg);
  EXPECT_TRUE(r.table.has_column("row_id"));
  EXPECT_TRUE(r.table.has_column("const_a"));
  EXPECT_FALSE(r.table.has_column("const_b"));
  // Without eps_rho the copies are kept.
  EXPECT_TRUE(r.table.has_column("f1_copy"));
}

TEST(Preprocess, Pearson) {
  const auto t = load_table("a,b,c,k\n1,2,3,5\n2,4,2,5\n3,6,1,5\n4,8,0,5\n");
  EXPECT_NEAR(pearson(t.column("a"), t.column("b")), 1.0, 1e-12);
  EXPECT_NEAR(pearson(t.column("a"), t.column("c")), -1.0, 1e-12);
  EXPECT_TRUE(std::isnan(pearson(t.column("a"), t.column("k"))));
}
