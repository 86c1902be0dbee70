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

#include "vizrec/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vizrec/error.hpp"
#include "vizrec/table.hpp"

namespace vizrec {

void validate(const Visualization& vis, const Table& table) {
  if (!table.has_column(vis.group_by)) throw UnknownFeature(vis.group_by);
  for (const auto& conn : vis.predicate.connections())
    if (!table.has_column(conn.feature)) throw UnknownFeature(conn.feature);
  if (vis.predicate.references(vis.group_by))
    throw InvalidArgument("group-by feature '" + vis.group_by + "' may not appear in the predicate");
  if (vis.buckets < 2) throw InvalidArgument("bucket count must be at least 2");
}

GroupDomain group_domain(const Table& table, const std::string& group_by, std::size_t buckets) {
  const auto& col = table.column(group_by);
  GroupDomain dom;
  dom.feature = group_by;
  dom.codes.assign(col.values.size(), -1);

  if (col.kind == FeatureKind::ContinuousOrdered) {
    if (buckets < 2) throw InvalidArgument("bucket count must be at least 2");
    double lo = INFINITY, hi = -INFINITY;
    for (double v : col.values) {
      if (is_null(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > hi) return dom;  // no observed values
    const double width = (hi - lo) / static_cast<double>(buckets);
    dom.values.resize(static_cast<Eigen::Index>(buckets));
    for (std::size_t b = 0; b < buckets; ++b) {
      const double a = lo + width * static_cast<double>(b);
      const double z = b + 1 == buckets ? hi : lo + width * static_cast<double>(b + 1);
      dom.values(static_cast<Eigen::Index>(b)) = 0.5 * (a + z);
      dom.labels.push_back("[" + format_number(a) + ", " + format_number(z) + (b + 1 == buckets ? "]" : ")"));
    }
    for (std::size_t r = 0; r < col.values.size(); ++r) {
      const double v = col.values[r];
      if (is_null(v)) continue;
      std::size_t b = width > 0 ? static_cast<std::size_t>(std::floor((v - lo) / width)) : 0;
      dom.codes[r] = static_cast<std::int32_t>(std::min(b, buckets - 1));
    }
    return dom;
  }

  std::map<double, std::int32_t> index;
  for (double v : col.values)
    if (!is_null(v)) index.emplace(v, 0);
  dom.values.resize(static_cast<Eigen::Index>(index.size()));
  std::int32_t k = 0;
  for (auto& [v, code] : index) {
    code = k;
    dom.values(k) = v;
    dom.labels.push_back(col.metric.to_raw(v));
    ++k;
  }
  for (std::size_t r = 0; r < col.values.size(); ++r)
    if (!is_null(col.values[r])) dom.codes[r] = index.at(col.values[r]);
  return dom;
}

Eigen::VectorXd bar_counts(const GroupDomain& domain, std::span<const std::uint32_t> rows) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  for (auto r : rows) {
    const auto code = domain.codes[r];
    if (code >= 0) counts(code) += 1.0;
  }
  return counts;
}

Pmf pmf_from_counts(const GroupDomain& domain, const Eigen::VectorXd& counts) {
  const double total = counts.sum();
  if (!(total > 0)) throw EmptySupport("visualization has zero support");
  Pmf pmf;
  pmf.labels = domain.labels;
  pmf.values = domain.values;
  pmf.counts = counts;
  pmf.probabilities = counts / total;
  pmf.support = static_cast<std::size_t>(std::llround(total));
  return pmf;
}

Pmf estimate_pmf(const Visualization& vis, const Table& table, const GroupDomain& domain) {
  validate(vis, table);
  const auto rows = evaluate_predicate(vis.predicate, table);
  return pmf_from_counts(domain, bar_counts(domain, rows));
}

Pmf estimate_pmf(const Visualization& vis, const Table& table) {
  validate(vis, table);
  return estimate_pmf(vis, table, group_domain(table, vis.group_by, vis.buckets));
}

nlohmann::json to_json(const Pmf& pmf) {
  nlohmann::json j;
  j["labels"] = pmf.labels;
  j["values"] = std::vector<double>(pmf.values.data(), pmf.values.data() + pmf.values.size());
  j["probabilities"] =
      std::vector<double>(pmf.probabilities.data(), pmf.probabilities.data() + pmf.probabilities.size());
  j["support"] = pmf.support;
  return j;
}

nlohmann::json to_json(const Visualization& vis) {
  return {{"predicate", to_json(vis.predicate)}, {"group_by", vis.group_by}, {"aggregate", "COUNT"},
          {"buckets", vis.buckets}};
}

}  // namespace vizrec
