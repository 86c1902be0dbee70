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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vizrec {

enum class FeatureKind { Binary, DiscreteOrdered, ContinuousOrdered, Categorical };

std::string_view to_string(FeatureKind kind);
// Accepts the schema spellings "binary", "discrete", "continuous", "categorical".
FeatureKind parse_feature_kind(std::string_view text);

inline bool is_ordered(FeatureKind kind) { return kind != FeatureKind::Categorical; }

// Injective map from raw cell text to a real number. Ordered numeric columns
// use the identity; Binary and Categorical columns use a label table whose
// position is the metric value.
class MetricMap {
 public:
  MetricMap() = default;

  static MetricMap identity() { return MetricMap{}; }
  static MetricMap labelled(std::vector<std::string> labels);

  bool is_identity() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<double> to_metric(std::string_view raw) const;
  std::string to_raw(double metric) const;

 private:
  std::vector<std::string> labels_;
};

// Shortest text that parses back to exactly `value`.
std::string format_number(double value);
// Full-string finite number parse; surrounding blanks allowed.
std::optional<double> parse_number(std::string_view text);

struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::DiscreteOrdered;
  std::vector<double> values;  // metric values, NaN marks a missing cell
  MetricMap metric;
};

inline bool is_null(double v) { return v != v; }

// Immutable columnar table. Copies share column storage.
class Table {
 public:
  Table() = default;
  Table(std::string name, std::vector<Column> columns);

  const std::string& name() const { return name_; }
  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }

  const Column& column(std::size_t index) const { return *columns_.at(index); }
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool has_column(std::string_view name) const { return index_of(name).has_value(); }
  std::vector<std::string> column_names() const;

  // Projection onto a subset of columns, in the given order.
  Table select(const std::vector<std::string>& names) const;
  // New table holding the given rows, in the given order.
  Table take_rows(std::span<const std::uint32_t> rows) const;

 private:
  std::string name_;
  std::vector<std::shared_ptr<const Column>> columns_;
  std::size_t rows_ = 0;
};

using KindOverrides = std::map<std::string, FeatureKind, std::less<>>;

struct LoadOptions {
  std::string name = "table";
  KindOverrides kinds;
  // Integer columns with more distinct values than this are continuous.
  std::size_t discrete_threshold = 100;
};

// A column of raw cells as read from CSV; empty text is a missing value.
using RawColumn = std::vector<std::string>;

std::vector<FeatureKind> infer_feature_kinds(const std::vector<RawColumn>& columns,
                                             std::size_t discrete_threshold = 100);

Table load_table(std::string_view csv_text, const LoadOptions& options = {});
Table load_table(std::istream& in, const LoadOptions& options = {});
Table load_table_file(const std::filesystem::path& path, const LoadOptions& options = {});

// {"column": "binary|discrete|continuous|categorical"}
KindOverrides parse_schema_overrides(const nlohmann::json& schema);
KindOverrides load_schema_file(const std::filesystem::path& path);

struct ColumnStats {
  std::size_t distinct = 0;
  double min = 0.0;  // NaN when the column has no values
  double max = 0.0;
  std::size_t nulls = 0;
};

ColumnStats column_stats(const Table& table, std::string_view feature);

void write_csv(const Table& table, std::ostream& out);
std::string to_csv(const Table& table);

}  // namespace vizrec
