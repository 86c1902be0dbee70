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

#include "vizrec/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "vizrec/error.hpp"

namespace vizrec {

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::Constant: return "constant";
    case DropReason::IdentifierRatio: return "identifier-ratio";
    case DropReason::Correlated: return "correlated";
  }
  return "constant";
}

namespace {

// vc_dimension_bound throws on an empty or all-zero class; a fully dropped
// table simply has no class.
int safe_bound(const QueryClassSpec& spec) {
  try {
    return vc_dimension_bound(spec);
  } catch (const Error&) {
    return 0;
  }
}

}  // namespace

nlohmann::json to_json(const PreprocessReport& report) {
  auto dropped = nlohmann::json::array();
  for (const auto& d : report.dropped) {
    nlohmann::json e{{"feature", d.feature}, {"reason", std::string(to_string(d.reason))}, {"statistic", d.statistic}};
    if (!d.partner.empty()) e["partner"] = d.partner;
    dropped.push_back(std::move(e));
  }
  return {{"dropped", dropped},
          {"query_class_before", to_json(report.class_before)},
          {"query_class_after", to_json(report.class_after)},
          {"vc_dimension_before", report.vc_before},
          {"vc_dimension_after", report.vc_after},
          {"excluded_zero_support", report.excluded_zero_support},
          {"equivalence_merged", report.equivalence_merged}};
}

double pearson(const Column& a, const Column& b) {
  const auto n = a.values.size();
  std::vector<double> xs, ys;
  xs.reserve(n);
  ys.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_null(a.values[i]) || is_null(b.values[i])) continue;
    xs.push_back(a.values[i]);
    ys.push_back(b.values[i]);
  }
  if (xs.size() < 2) return std::nan("");
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const Eigen::VectorXd dx = x.array() - x.mean();
  const Eigen::VectorXd dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

PreprocessResult preprocess(const Table& table, const ExplorationConfig& config) {
  validate(config);
  PreprocessReport report;
  report.class_before = query_class(table, config);
  report.vc_before = safe_bound(report.class_before);

  auto is_protected = [&](const std::string& name) {
    return std::find(config.protect.begin(), config.protect.end(), name) != config.protect.end();
  };

  std::vector<std::string> kept;
  for (const auto& name : table.column_names()) {
    if (is_protected(name)) {
      kept.push_back(name);
      continue;
    }
    const auto stats = column_stats(table, name);
    if (config.drop_constant && stats.distinct <= 1) {
      report.dropped.push_back({name, DropReason::Constant, static_cast<double>(stats.distinct), {}});
      continue;
    }
    const double present = static_cast<double>(table.row_count() - stats.nulls);
    const double ratio = present / static_cast<double>(stats.distinct);
    if (config.drop_identifier && ratio < config.identifier_ratio) {
      report.dropped.push_back({name, DropReason::IdentifierRatio, ratio, {}});
      continue;
    }
    kept.push_back(name);
  }

  if (config.eps_rho) {
    std::vector<std::string> survivors;
    for (const auto& name : kept) {
      const auto& col = table.column(name);
      bool dropped = false;
      if (col.kind != FeatureKind::Categorical && !is_protected(name)) {
        for (const auto& earlier : survivors) {
          const auto& other = table.column(earlier);
          if (other.kind == FeatureKind::Categorical) continue;
          const double rho = pearson(other, col);
          if (std::isnan(rho)) continue;
          const double residual = 1.0 - rho * rho;
          if (residual < *config.eps_rho) {
            report.dropped.push_back({name, DropReason::Correlated, residual, earlier});
            dropped = true;
            break;
          }
        }
      }
      if (!dropped) survivors.push_back(name);
    }
    kept = std::move(survivors);
  }

  PreprocessResult out{table.select(kept), std::move(report)};
  out.report.class_after = query_class(out.table, config);
  out.report.vc_after = safe_bound(out.report.class_after);
  return out;
}

}  // namespace vizrec
