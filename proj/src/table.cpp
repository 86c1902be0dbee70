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

#include "vizrec/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "vizrec/csv.hpp"
#include "vizrec/error.hpp"

namespace vizrec {

namespace {

constexpr double kNull = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_missing(std::string_view cell) { return trim(cell).empty(); }

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Binary: return "binary";
    case FeatureKind::DiscreteOrdered: return "discrete";
    case FeatureKind::ContinuousOrdered: return "continuous";
    case FeatureKind::Categorical: return "categorical";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "binary") return FeatureKind::Binary;
  if (text == "discrete") return FeatureKind::DiscreteOrdered;
  if (text == "continuous") return FeatureKind::ContinuousOrdered;
  if (text == "categorical") return FeatureKind::Categorical;
  throw SchemaError("unknown feature kind '" + std::string(text) + "'");
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

MetricMap MetricMap::labelled(std::vector<std::string> labels) {
  MetricMap map;
  map.labels_ = std::move(labels);
  return map;
}

std::optional<double> MetricMap::to_metric(std::string_view raw) const {
  if (is_identity()) return parse_number(raw);
  raw = trim(raw);
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == raw) return static_cast<double>(i);
  // Numeric labels also match on value ("1.0" finds "1").
  if (auto v = parse_number(raw)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto l = parse_number(labels_[i]);
      if (l && *l == *v) return static_cast<double>(i);
    }
  }
  return std::nullopt;
}

std::string MetricMap::to_raw(double metric) const {
  if (is_null(metric)) return {};
  if (is_identity()) return format_number(metric);
  const auto idx = static_cast<std::size_t>(metric);
  if (metric < 0 || idx >= labels_.size() || static_cast<double>(idx) != metric)
    throw InvalidArgument("metric value " + format_number(metric) + " has no label");
  return labels_[idx];
}

Table::Table(std::string name, std::vector<Column> columns) : name_(std::move(name)) {
  std::unordered_set<std::string> seen;
  rows_ = columns.empty() ? 0 : columns.front().values.size();
  for (auto& c : columns) {
    if (!seen.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
    if (c.values.size() != rows_)
      throw SchemaError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                        " values, expected " + std::to_string(rows_));
    columns_.push_back(std::make_shared<const Column>(std::move(c)));
  }
}

const Column& Table::column(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw UnknownFeature(std::string(name));
  return *columns_[*idx];
}

std::optional<std::size_t> Table::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i]->name == name) return i;
  return std::nullopt;
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c->name);
  return names;
}

Table Table::select(const std::vector<std::string>& names) const {
  Table out;
  out.name_ = name_;
  out.rows_ = rows_;
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    auto idx = index_of(n);
    if (!idx) throw UnknownFeature(n);
    if (!seen.insert(n).second) throw SchemaError("duplicate column name '" + n + "'");
    out.columns_.push_back(columns_[*idx]);
  }
  return out;
}

Table Table::take_rows(std::span<const std::uint32_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column copy{c->name, c->kind, {}, c->metric};
    copy.values.reserve(rows.size());
    for (auto r : rows) {
      if (r >= rows_) throw InvalidArgument("row index out of range");
      copy.values.push_back(c->values[r]);
    }
    cols.push_back(std::move(copy));
  }
  return Table(name_, std::move(cols));
}

std::vector<FeatureKind> infer_feature_kinds(const std::vector<RawColumn>& columns,
                                             std::size_t discrete_threshold) {
  std::vector<FeatureKind> kinds;
  kinds.reserve(columns.size());
  for (const auto& col : columns) {
    bool numeric = true;
    bool integral = true;
    bool any = false;
    std::set<double> distinct;
    for (const auto& cell : col) {
      if (is_missing(cell)) continue;
      any = true;
      auto v = parse_number(cell);
      if (!v) {
        numeric = false;
        break;
      }
      if (std::floor(*v) != *v) integral = false;
      // Past this size the answer no longer depends on the exact count.
      if (distinct.size() <= discrete_threshold + 1) distinct.insert(*v);
    }
    if (!any || !numeric) {
      kinds.push_back(FeatureKind::Categorical);
    } else if (distinct.size() == 2) {
      kinds.push_back(FeatureKind::Binary);
    } else if (integral && distinct.size() <= discrete_threshold) {
      kinds.push_back(FeatureKind::DiscreteOrdered);
    } else {
      kinds.push_back(FeatureKind::ContinuousOrdered);
    }
  }
  return kinds;
}

namespace {

std::vector<std::string> first_appearance_labels(const RawColumn& raw) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& cell : raw) {
    if (is_missing(cell)) continue;
    std::string key(trim(cell));
    if (index.emplace(key, labels.size()).second) labels.push_back(std::move(key));
  }
  return labels;
}

Column build_column(std::string name, FeatureKind kind, const RawColumn& raw) {
  Column col{std::move(name), kind, {}, {}};
  col.values.reserve(raw.size());

  auto numeric_values = [&](bool require) {
    std::vector<double> vals;
    vals.reserve(raw.size());
    for (const auto& cell : raw) {
      if (is_missing(cell)) {
        vals.push_back(kNull);
        continue;
      }
      auto v = parse_number(cell);
      if (!v) {
        if (require)
          throw SchemaError("column '" + col.name + "' declared " + std::string(to_string(kind)) +
                            " but holds non-numeric value '" + cell + "'");
        return std::optional<std::vector<double>>{};
      }
      vals.push_back(*v);
    }
    return std::optional<std::vector<double>>{std::move(vals)};
  };

  switch (kind) {
    case FeatureKind::DiscreteOrdered:
    case FeatureKind::ContinuousOrdered: {
      col.values = *numeric_values(true);
      col.metric = MetricMap::identity();
      break;
    }
    case FeatureKind::Binary: {
      if (auto vals = numeric_values(false)) {
        std::set<double> distinct;
        for (double v : *vals)
          if (!is_null(v)) distinct.insert(v);
        if (distinct.size() > 2)
          throw SchemaError("column '" + col.name + "' declared binary but has " +
                            std::to_string(distinct.size()) + " distinct values");
        std::vector<std::string> labels;
        for (double v : distinct) labels.push_back(format_number(v));
        for (double v : *vals)
          col.values.push_back(is_null(v) ? kNull : (v == *distinct.begin() ? 0.0 : 1.0));
        col.metric = MetricMap::labelled(std::move(labels));
      } else {
        auto labels = first_appearance_labels(raw);
        if (labels.size() > 2)
          throw SchemaError("column '" + col.name + "' declared binary but has " +
                            std::to_string(labels.size()) + " distinct values");
        col.metric = MetricMap::labelled(labels);
        for (const auto& cell : raw)
          col.values.push_back(is_missing(cell) ? kNull : *col.metric.to_metric(cell));
      }
      break;
    }
    case FeatureKind::Categorical: {
      auto labels = first_appearance_labels(raw);
      std::unordered_map<std::string, double> index;
      for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], static_cast<double>(i));
      for (const auto& cell : raw)
        col.values.push_back(is_missing(cell) ? kNull : index.at(std::string(trim(cell))));
      col.metric = MetricMap::labelled(std::move(labels));
      break;
    }
  }
  return col;
}

}  // namespace

Table load_table(std::string_view csv_text, const LoadOptions& options) {
  auto rows = parse_csv(csv_text);
  if (rows.empty()) throw CsvError("empty CSV input (no header row)");
  const auto& header = rows.front();
  const std::size_t width = header.size();
  for (const auto& h : header)
    if (trim(h).empty()) throw CsvError("empty column name in header");

  std::vector<RawColumn> raw(width);
  for (auto& col : raw) col.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw CsvError("ragged row " + std::to_string(r + 1) + ": " + std::to_string(rows[r].size()) +
                     " fields, header has " + std::to_string(width));
    for (std::size_t c = 0; c < width; ++c) raw[c].push_back(std::move(rows[r][c]));
  }

  for (const auto& [name, kind] : options.kinds) {
    if (std::none_of(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == name; }))
      throw SchemaError("schema override for unknown column '" + name + "'");
  }

  auto kinds = infer_feature_kinds(raw, options.discrete_threshold);
  std::vector<Column> columns;
  columns.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    std::string name(trim(header[c]));
    if (auto it = options.kinds.find(name); it != options.kinds.end()) kinds[c] = it->second;
    columns.push_back(build_column(std::move(name), kinds[c], raw[c]));
  }
  return Table(options.name, std::move(columns));
}

Table load_table(std::istream& in, const LoadOptions& options) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_table(buf.view(), options);
}

Table load_table_file(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  LoadOptions opts = options;
  if (opts.name == "table") opts.name = path.stem().string();
  return load_table(in, opts);
}

KindOverrides parse_schema_overrides(const nlohmann::json& schema) {
  if (!schema.is_object()) throw SchemaError("schema must be a JSON object");
  KindOverrides out;
  for (const auto& [name, kind] : schema.items()) {
    if (!kind.is_string()) throw SchemaError("schema kind for '" + name + "' must be a string");
    out.emplace(name, parse_feature_kind(kind.get<std::string>()));
  }
  return out;
}

KindOverrides load_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema '" + path.string() + "'");
  try {
    return parse_schema_overrides(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed schema JSON: ") + e.what());
  }
}

ColumnStats column_stats(const Table& table, std::string_view feature) {
  const auto& col = table.column(feature);
  ColumnStats stats;
  stats.min = std::numeric_limits<double>::quiet_NaN();
  stats.max = stats.min;
  std::unordered_set<double> distinct;
  for (double v : col.values) {
    if (is_null(v)) {
      ++stats.nulls;
      continue;
    }
    distinct.insert(v);
    if (!(v >= stats.min)) stats.min = v;
    if (!(v <= stats.max)) stats.max = v;
  }
  stats.distinct = distinct.size();
  return stats;
}

void write_csv(const Table& table, std::ostream& out) {
  const std::size_t width = table.column_count();
  for (std::size_t c = 0; c < width; ++c) {
    if (c) out << ',';
    out << csv_escape(table.column(c).name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out << ',';
      const auto& col = table.column(c);
      const auto raw = col.metric.to_raw(col.values[r]);
      // A lone empty field would read back as a blank line.
      if (width == 1 && raw.empty())
        out << "\"\"";
      else
        out << csv_escape(raw);
    }
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

}  // namespace vizrec
