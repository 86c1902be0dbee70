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

#include "vizrec/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "vizrec/error.hpp"
#include "vizrec/table.hpp"

namespace vizrec {

std::string_view to_string(Op op) {
  switch (op) {
    case Op::Le: return "<=";
    case Op::Ge: return ">=";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Gt: return ">";
  }
  return "?";
}

Op parse_op(std::string_view text) {
  if (text == "<=" || text == "≤") return Op::Le;
  if (text == ">=" || text == "≥") return Op::Ge;
  if (text == "=" || text == "==") return Op::Eq;
  if (text == "!=" || text == "≠" || text == "<>") return Op::Ne;
  if (text == "<") return Op::Lt;
  if (text == ">") return Op::Gt;
  throw InvalidArgument("unknown operator '" + std::string(text) + "'");
}

bool Connection::has_sentinel() const {
  return std::any_of(clauses.begin(), clauses.end(), [](const Clause& c) { return c.is_sentinel(); });
}

bool Connection::matches(double v) const {
  for (const auto& c : clauses)
    if (c.is_sentinel() || c.matches(v)) return true;
  return false;
}

Predicate::Predicate(std::vector<Connection> connections) : connections_(std::move(connections)) {
  std::unordered_set<std::string> seen;
  for (const auto& conn : connections_) {
    if (conn.clauses.empty()) throw InvalidArgument("connection on '" + conn.feature + "' has no clauses");
    if (!seen.insert(conn.feature).second)
      throw InvalidArgument("feature '" + conn.feature + "' appears in two connections");
    for (const auto& c : conn.clauses) {
      if (c.feature != conn.feature)
        throw InvalidArgument("clause on '" + c.feature + "' inside connection on '" + conn.feature + "'");
      if (std::isnan(c.value) || c.value == -kSentinel)
        throw InvalidArgument("clause value on '" + c.feature + "' must be finite or +inf");
    }
  }
  std::sort(connections_.begin(), connections_.end(),
            [](const Connection& a, const Connection& b) { return a.feature < b.feature; });
}

Predicate Predicate::with(Connection connection) const {
  auto conns = connections_;
  conns.push_back(std::move(connection));
  return Predicate(std::move(conns));
}

std::vector<std::string> Predicate::active_features() const {
  std::vector<std::string> out;
  for (const auto& c : connections_)
    if (!c.has_sentinel()) out.push_back(c.feature);
  return out;
}

bool Predicate::references(std::string_view feature) const {
  return std::any_of(connections_.begin(), connections_.end(),
                     [&](const Connection& c) { return c.feature == feature; });
}

std::size_t Predicate::active_clause_count() const {
  std::size_t n = 0;
  for (const auto& c : connections_)
    if (!c.has_sentinel()) n += c.clauses.size();
  return n;
}

Connection single(std::string feature, Op op, double value) {
  Connection c{feature, {Clause{feature, op, value}}};
  return c;
}

nlohmann::json to_json(const Predicate& predicate) {
  auto conns = nlohmann::json::array();
  for (const auto& conn : predicate.connections()) {
    auto ors = nlohmann::json::array();
    for (const auto& c : conn.clauses) {
      nlohmann::json value = c.is_sentinel() ? nlohmann::json("inf") : nlohmann::json(c.value);
      ors.push_back({{"op", std::string(to_string(c.op))}, {"value", value}});
    }
    conns.push_back({{"feature", conn.feature}, {"or", ors}});
  }
  return {{"and", conns}};
}

Predicate predicate_from_json(const nlohmann::json& j, const Table* table) {
  if (j.is_boolean() && j.get<bool>()) return Predicate{};
  if (!j.is_object() || !j.contains("and") || !j.at("and").is_array())
    throw InvalidArgument("predicate JSON must be an object with an \"and\" array");
  std::vector<Connection> conns;
  for (const auto& cj : j.at("and")) {
    if (!cj.is_object() || !cj.contains("feature") || !cj.at("feature").is_string() ||
        !cj.contains("or") || !cj.at("or").is_array())
      throw InvalidArgument("connection needs \"feature\" and an \"or\" array");
    Connection conn;
    conn.feature = cj.at("feature").get<std::string>();
    if (table != nullptr && !table->has_column(conn.feature)) throw UnknownFeature(conn.feature);
    for (const auto& kj : cj.at("or")) {
      if (!kj.is_object() || !kj.contains("op") || !kj.contains("value") || !kj.at("op").is_string())
        throw InvalidArgument("clause needs \"op\" and \"value\"");
      Clause c{conn.feature, parse_op(kj.at("op").get<std::string>()), 0.0};
      const auto& v = kj.at("value");
      if (v.is_number()) {
        c.value = v.get<double>();
      } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "Infinity") {
          c.value = kSentinel;
        } else if (table != nullptr) {
          auto m = table->column(conn.feature).metric.to_metric(s);
          if (!m) throw InvalidArgument("value '" + s + "' not found in column '" + conn.feature + "'");
          c.value = *m;
        } else {
          throw InvalidArgument("clause value '" + s + "' is not a number");
        }
      } else {
        throw InvalidArgument("clause value must be a number or string");
      }
      conn.clauses.push_back(std::move(c));
    }
    conns.push_back(std::move(conn));
  }
  return Predicate(std::move(conns));
}

std::string canonical_string(const Predicate& predicate) { return to_json(predicate).dump(); }

namespace {

struct BoundConnection {
  const Connection* connection;
  const std::vector<double>* values;
};

std::vector<BoundConnection> bind(const Predicate& predicate, const Table& table) {
  std::vector<BoundConnection> bound;
  for (const auto& conn : predicate.connections()) {
    const auto& col = table.column(conn.feature);  // throws UnknownFeature
    if (conn.has_sentinel()) continue;
    bound.push_back({&conn, &col.values});
  }
  return bound;
}

bool row_matches(const std::vector<BoundConnection>& bound, std::uint32_t r) {
  for (const auto& b : bound) {
    const double v = (*b.values)[r];
    if (is_null(v) || !b.connection->matches(v)) return false;
  }
  return true;
}

}  // namespace

RowSet evaluate_predicate(const Predicate& predicate, const Table& table) {
  const auto bound = bind(predicate, table);
  RowSet rows;
  const auto n = static_cast<std::uint32_t>(table.row_count());
  rows.reserve(bound.empty() ? n : n / 2);
  for (std::uint32_t r = 0; r < n; ++r)
    if (row_matches(bound, r)) rows.push_back(r);
  return rows;
}

RowSet evaluate_predicate(const Predicate& predicate, const Table& table,
                          std::span<const std::uint32_t> candidates) {
  const auto bound = bind(predicate, table);
  RowSet rows;
  for (auto r : candidates)
    if (row_matches(bound, r)) rows.push_back(r);
  return rows;
}

double selectivity(const Predicate& predicate, const Table& table) {
  if (table.row_count() == 0) throw InvalidArgument("selectivity of an empty table is undefined");
  return static_cast<double>(evaluate_predicate(predicate, table).size()) /
         static_cast<double>(table.row_count());
}

}  // namespace vizrec
