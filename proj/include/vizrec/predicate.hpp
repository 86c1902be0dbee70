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

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vizrec {

class Table;

enum class Op { Le, Ge, Eq, Ne, Lt, Gt };

std::string_view to_string(Op op);
Op parse_op(std::string_view text);

inline constexpr double kSentinel = std::numeric_limits<double>::infinity();

// A single comparison `feature op value` in metric space. A value of +inf is
// the no-op sentinel: the clause is always true whatever the operator.
struct Clause {
  std::string feature;
  Op op = Op::Le;
  double value = 0.0;

  bool is_sentinel() const { return value == kSentinel; }
  bool matches(double v) const {
    switch (op) {
      case Op::Le: return v <= value;
      case Op::Ge: return v >= value;
      case Op::Eq: return v == value;
      case Op::Ne: return v != value;
      case Op::Lt: return v < value;
      case Op::Gt: return v > value;
    }
    return false;
  }
  friend bool operator==(const Clause&, const Clause&) = default;
};

// OR-combination of clauses on one feature.
struct Connection {
  std::string feature;
  std::vector<Clause> clauses;

  // Contains a sentinel clause, so it selects every row including nulls.
  bool has_sentinel() const;
  bool matches(double v) const;
  friend bool operator==(const Connection&, const Connection&) = default;
};

// AND-combination of connections over distinct features; empty means TRUE.
// Connections are kept sorted by feature name.
class Predicate {
 public:
  Predicate() = default;
  explicit Predicate(std::vector<Connection> connections);

  const std::vector<Connection>& connections() const { return connections_; }
  bool is_true() const { return connections_.empty(); }

  // Conjunction with one more connection on a feature not yet constrained.
  Predicate with(Connection connection) const;

  // Features constrained by at least one non-sentinel connection.
  std::vector<std::string> active_features() const;
  bool references(std::string_view feature) const;
  std::size_t active_clause_count() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;

 private:
  std::vector<Connection> connections_;
};

Connection single(std::string feature, Op op, double value);

nlohmann::json to_json(const Predicate& predicate);
// Clause values may be numbers, the string "inf", or, when a table is given,
// raw category labels resolved through the column's metric map.
Predicate predicate_from_json(const nlohmann::json& j, const Table* table = nullptr);
// Stable text form used for ordering and equality of predicates.
std::string canonical_string(const Predicate& predicate);

using RowSet = std::vector<std::uint32_t>;

// Rows where every connection has a satisfied clause. A missing value in a
// feature referenced by a non-sentinel connection excludes the row.
RowSet evaluate_predicate(const Predicate& predicate, const Table& table);
// Same, restricted to an ascending candidate row subset.
RowSet evaluate_predicate(const Predicate& predicate, const Table& table,
                          std::span<const std::uint32_t> candidates);

double selectivity(const Predicate& predicate, const Table& table);

}  // namespace vizrec
