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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vizrec/enumeration.hpp"
#include "vizrec/pmf.hpp"
#include "vizrec/stat_tests.hpp"
#include "vizrec/vc_bounds.hpp"

namespace vizrec {

class Table;

// max_k |p_k - q_k|; throws InvalidArgument when the supports differ.
double chebyshev_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
double chebyshev_distance(const Pmf& p, const Pmf& q);

struct Recommendation {
  Visualization candidate;
  Pmf pmf;
  double distance = 0.0;
  double eps_reference = 0.0;  // zero in one-sample mode
  double eps_candidate = 0.0;
  double uncertainty = 0.0;    // eps_reference + eps_candidate
  double interest = 0.0;       // distance - uncertainty
  bool safe = false;
  std::size_t support = 0;
  double selectivity = 0.0;
};

nlohmann::json to_json(const Recommendation& rec);

// The safety rule on stored fields: distance > max(uncertainty, eps_v).
bool is_safe(double distance, double uncertainty, const std::optional<double>& eps_v);

struct RecommendationResult {
  Visualization reference;
  Pmf reference_pmf;
  BoundConfig bounds;
  std::optional<double> eps_v;
  bool one_sample = false;
  double gamma_min = 0.0;
  EnumerationStats stats;
  std::vector<Recommendation> recommendations;
};

nlohmann::json to_json(const RecommendationResult& result);

// Every enumerated candidate scored, safe or not, in enumeration order.
RecommendationResult score_candidates(const Visualization& reference, const Table& table,
                                      const ExplorationConfig& config);

// Safe candidates only, by decreasing interest; ties by canonical predicate.
RecommendationResult vizrec(const Visualization& reference, const Table& table, const ExplorationConfig& config);

// Orders by interest descending, then canonical predicate text.
void rank(std::vector<Recommendation>& recs);

struct BaselineEntry {
  Visualization candidate;
  Pmf pmf;
  TestResult test;
  std::size_t support = 0;
};

nlohmann::json to_json(const BaselineEntry& entry);

struct BaselineResult {
  Visualization reference;
  Pmf reference_pmf;
  double alpha = 0.05;
  std::size_t hypotheses = 0;  // M, after Tarone exclusion and dedup
  double threshold = 0.05;     // alpha / M when corrected
  bool corrected = true;
  std::vector<BaselineEntry> discoveries;  // p < threshold, ascending p
  std::size_t uncorrected_hits = 0;        // p < alpha
};

nlohmann::json to_json(const BaselineResult& result);

// Per-candidate chi-square goodness of fit against the reference pmf, kept
// for comparison with vizrec only.
BaselineResult baseline_chi2_recommend(const Visualization& reference, const Table& table,
                                       const ExplorationConfig& config, double alpha, bool bonferroni = true);

}  // namespace vizrec
