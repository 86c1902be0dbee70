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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vizrec/pmf.hpp"
#include "vizrec/predicate.hpp"
#include "vizrec/vc_bounds.hpp"

namespace vizrec {

class Table;

struct ExplorationConfig {
  double delta = 0.05;
  std::optional<double> eps_v;           // visual discernibility threshold
  std::size_t max_features = 3;          // non-trivial connections per predicate
  std::vector<Op> operators{Op::Le};
  bool one_sample = false;               // reference pmf taken as exact
  bool ordering_heuristic = true;        // fewest distinct values first
  bool prune = true;                     // cut branches at the selectivity floor
  double c = 0.5;
  LogBase log_base = LogBase::Two;
  std::optional<int> vc_dimension;       // overrides the class bound when set
  std::size_t buckets = 10;              // continuous group-by and threshold grid
  unsigned threads = 1;

  bool drop_constant = true;
  bool drop_identifier = true;
  double identifier_ratio = 5.0;         // drop when rows / distinct < ratio
  std::optional<double> eps_rho;         // drop one of a pair when 1 - rho^2 < eps_rho
  std::vector<std::string> protect;      // never dropped by preprocessing
};

void validate(const ExplorationConfig& config);
nlohmann::json to_json(const ExplorationConfig& config);
ExplorationConfig exploration_config_from_json(const nlohmann::json& j);

// The declared query class over every column of the table: single-clause
// connections built from the configured operators.
QueryClassSpec query_class(const Table& table, const ExplorationConfig& config);
// Explicit override if configured, otherwise the class bound.
int effective_vc_dimension(const Table& table, const ExplorationConfig& config);
BoundConfig bound_config(const Table& table, const ExplorationConfig& config);

// Throws OutsideQueryClass if the predicate leaves the declared class.
void check_in_class(const Predicate& predicate, const QueryClassSpec& spec);

struct Candidate {
  Visualization visualization;
  Eigen::VectorXd counts;
  std::size_t support = 0;
  double selectivity = 0.0;
};

struct EnumerationStats {
  double raw_predicates = 0.0;       // size of the unpruned predicate tree
  std::size_t visited = 0;
  std::size_t excluded_zero_support = 0;
  std::size_t pruned_low_selectivity = 0;
  std::size_t equivalence_merged = 0;
  std::size_t emitted = 0;
  double gamma_min = 0.0;
  int vc_dimension = 0;
};

nlohmann::json to_json(const EnumerationStats& stats);

struct CandidateSet {
  GroupDomain domain;
  std::vector<Candidate> candidates;
  EnumerationStats stats;
};

// Tree exploration over predicates sharing the reference's group-by. Each
// feature contributes one clause per operator and threshold (observed values,
// or equal-width cut points for continuous features); leaving a feature out
// plays the role of the +inf sentinel. Branches with zero support are
// excluded (Tarone), branches at or below the selectivity floor are cut, and
// predicates selecting the same rows collapse to one representative.
CandidateSet enumerate_candidates(const Table& table, const Visualization& reference,
                                  const ExplorationConfig& config);

// Size of the unpruned predicate tree over all columns except `exclude`:
// predicates with at most max_features active single-clause connections.
double raw_predicate_count(const Table& table, const ExplorationConfig& config, const std::string& exclude = {});

// Threshold values explored for one feature.
std::vector<double> candidate_thresholds(const Table& table, const std::string& feature, std::size_t buckets);

}  // namespace vizrec
