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

#include <string>
#include <vector>

#include "json.hpp"
#include "vizrec/enumeration.hpp"
#include "vizrec/table.hpp"
#include "vizrec/vc_bounds.hpp"

namespace vizrec {

enum class DropReason { Constant, IdentifierRatio, Correlated };

std::string_view to_string(DropReason reason);

struct DroppedFeature {
  std::string feature;
  DropReason reason = DropReason::Constant;
  double statistic = 0.0;  // distinct count, rows/distinct, or 1 - rho^2
  std::string partner;     // kept column of a correlated pair
};

struct PreprocessReport {
  std::vector<DroppedFeature> dropped;
  QueryClassSpec class_before;
  QueryClassSpec class_after;
  int vc_before = 0;
  int vc_after = 0;
  // Filled once the candidate space has been enumerated.
  std::size_t excluded_zero_support = 0;
  std::size_t equivalence_merged = 0;
};

nlohmann::json to_json(const PreprocessReport& report);

struct PreprocessResult {
  Table table;
  PreprocessReport report;
};

// Column drops decided from the feature columns alone, before any group-by
// value is compared. Columns named in config.protect are kept.
PreprocessResult preprocess(const Table& table, const ExplorationConfig& config);

// Pearson correlation over rows where both columns are present; NaN when
// either column is constant on those rows.
double pearson(const Column& a, const Column& b);

}  // namespace vizrec
