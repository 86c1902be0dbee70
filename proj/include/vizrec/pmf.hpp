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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vizrec/predicate.hpp"

namespace vizrec {

class Table;

// COUNT-aggregated bar chart: rows selected by `predicate`, grouped by
// `group_by`. Continuous group-by features are cut into `buckets`
// equal-width buckets over the full column range.
struct Visualization {
  Predicate predicate;
  std::string group_by;
  std::size_t buckets = 10;
};

void validate(const Visualization& vis, const Table& table);

// The x-axis of a group-by feature, computed on the unfiltered table so that
// every pmf over the same feature is aligned.
struct GroupDomain {
  std::string feature;
  std::vector<std::string> labels;
  Eigen::VectorXd values;      // metric value or bucket midpoint per bar
  std::vector<std::int32_t> codes;  // bar index per row, -1 when missing

  std::size_t size() const { return labels.size(); }
};

GroupDomain group_domain(const Table& table, const std::string& group_by, std::size_t buckets = 10);

struct Pmf {
  std::vector<std::string> labels;
  Eigen::VectorXd values;
  Eigen::VectorXd probabilities;
  Eigen::VectorXd counts;
  std::size_t support = 0;

  std::size_t size() const { return labels.size(); }
};

// Per-bar counts of the given rows; rows with a missing group-by value are
// skipped.
Eigen::VectorXd bar_counts(const GroupDomain& domain, std::span<const std::uint32_t> rows);
// Normalises counts into a pmf; throws EmptySupport when they sum to zero.
Pmf pmf_from_counts(const GroupDomain& domain, const Eigen::VectorXd& counts);

Pmf estimate_pmf(const Visualization& vis, const Table& table);
Pmf estimate_pmf(const Visualization& vis, const Table& table, const GroupDomain& domain);

nlohmann::json to_json(const Pmf& pmf);
nlohmann::json to_json(const Visualization& vis);

}  // namespace vizrec
