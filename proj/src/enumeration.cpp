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

#include "vizrec/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "vizrec/error.hpp"
#include "vizrec/table.hpp"

namespace vizrec {

void validate(const ExplorationConfig& config) {
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (config.eps_v && !(*config.eps_v >= 0.0 && *config.eps_v <= 1.0))
    throw InvalidArgument("eps_v must lie in [0,1]");
  if (config.operators.empty()) throw InvalidArgument("operator set is empty");
  if (!(config.c > 0.0)) throw InvalidArgument("constant c must be positive");
  if (config.vc_dimension && *config.vc_dimension < 1) throw InvalidArgument("VC dimension must be at least 1");
  if (config.buckets < 2) throw InvalidArgument("bucket count must be at least 2");
  if (config.threads == 0) throw InvalidArgument("thread count must be positive");
  if (!(config.identifier_ratio > 0.0)) throw InvalidArgument("identifier ratio must be positive");
  if (config.eps_rho && !(*config.eps_rho >= 0.0)) throw InvalidArgument("eps_rho must be non-negative");
}

nlohmann::json to_json(const ExplorationConfig& config) {
  auto ops = nlohmann::json::array();
  for (Op op : config.operators) ops.push_back(std::string(to_string(op)));
  nlohmann::json j{{"delta", config.delta},
                   {"eps_v", config.eps_v ? nlohmann::json(*config.eps_v) : nlohmann::json(nullptr)},
                   {"max_features", config.max_features},
                   {"operators", ops},
                   {"one_sample", config.one_sample},
                   {"ordering_heuristic", config.ordering_heuristic},
                   {"prune", config.prune},
                   {"c", config.c},
                   {"log_base", std::string(to_string(config.log_base))},
                   {"vc_dimension", config.vc_dimension ? nlohmann::json(*config.vc_dimension) : nlohmann::json(nullptr)},
                   {"buckets", config.buckets},
                   {"drop_constant", config.drop_constant},
                   {"drop_identifier", config.drop_identifier},
                   {"identifier_ratio", config.identifier_ratio},
                   {"eps_rho", config.eps_rho ? nlohmann::json(*config.eps_rho) : nlohmann::json(nullptr)},
                   {"protect", config.protect}};
  return j;
}

ExplorationConfig exploration_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("exploration config must be a JSON object");
  ExplorationConfig c;
  try {
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("eps_v") && !j.at("eps_v").is_null()) c.eps_v = j.at("eps_v").get<double>();
    if (j.contains("max_features")) c.max_features = j.at("max_features").get<std::size_t>();
    if (j.contains("operators")) {
      c.operators.clear();
      for (const auto& op : j.at("operators")) c.operators.push_back(parse_op(op.get<std::string>()));
    }
    if (j.contains("one_sample")) c.one_sample = j.at("one_sample").get<bool>();
    if (j.contains("ordering_heuristic")) c.ordering_heuristic = j.at("ordering_heuristic").get<bool>();
    if (j.contains("prune")) c.prune = j.at("prune").get<bool>();
    if (j.contains("c")) c.c = j.at("c").get<double>();
    if (j.contains("log_base")) c.log_base = parse_log_base(j.at("log_base").get<std::string>());
    if (j.contains("vc_dimension") && !j.at("vc_dimension").is_null())
      c.vc_dimension = j.at("vc_dimension").get<int>();
    if (j.contains("buckets")) c.buckets = j.at("buckets").get<std::size_t>();
    if (j.contains("drop_constant")) c.drop_constant = j.at("drop_constant").get<bool>();
    if (j.contains("drop_identifier")) c.drop_identifier = j.at("drop_identifier").get<bool>();
    if (j.contains("identifier_ratio")) c.identifier_ratio = j.at("identifier_ratio").get<double>();
    if (j.contains("eps_rho") && !j.at("eps_rho").is_null()) c.eps_rho = j.at("eps_rho").get<double>();
    if (j.contains("protect")) c.protect = j.at("protect").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed exploration config: ") + e.what());
  }
  validate(c);
  return c;
}

QueryClassSpec query_class(const Table& table, const ExplorationConfig& config) {
  std::vector<FeatureDescriptor> features;
  for (std::size_t i = 0; i < table.column_count(); ++i) {
    const auto& col = table.column(i);
    features.push_back({col.name, col.kind == FeatureKind::Categorical});
  }
  return class_for_operators(features, config.operators);
}

int effective_vc_dimension(const Table& table, const ExplorationConfig& config) {
  if (config.vc_dimension) return *config.vc_dimension;
  return vc_dimension_bound(query_class(table, config));
}

BoundConfig bound_config(const Table& table, const ExplorationConfig& config) {
  return BoundConfig{config.delta, config.c, config.log_base, effective_vc_dimension(table, config)};
}

void check_in_class(const Predicate& predicate, const QueryClassSpec& spec) {
  for (const auto& conn : predicate.connections()) {
    const auto set = reduce_intervals(conn);
    if (set.tautology) continue;
    const auto* feature = spec.find(conn.feature);
    if (feature == nullptr)
      throw OutsideQueryClass("feature '" + conn.feature + "' is not part of the declared query class");
    if (!admits(*feature, set))
      throw OutsideQueryClass("connection on '" + conn.feature + "' exceeds the declared class (alpha=" +
                              std::to_string(feature->alpha) + ", beta=" + std::to_string(feature->beta) +
                              ", rays=" + std::string(to_string(feature->rays)) + ")");
  }
}

nlohmann::json to_json(const EnumerationStats& s) {
  return {{"raw_predicates", s.raw_predicates},
          {"visited", s.visited},
          {"excluded_zero_support", s.excluded_zero_support},
          {"pruned_low_selectivity", s.pruned_low_selectivity},
          {"equivalence_merged", s.equivalence_merged},
          {"emitted", s.emitted},
          {"gamma_min", s.gamma_min},
          {"vc_dimension", s.vc_dimension}};
}

std::vector<double> candidate_thresholds(const Table& table, const std::string& feature, std::size_t buckets) {
  const auto& col = table.column(feature);
  std::set<double> distinct;
  for (double v : col.values)
    if (!is_null(v)) distinct.insert(v);
  if (col.kind != FeatureKind::ContinuousOrdered || distinct.size() <= buckets)
    return {distinct.begin(), distinct.end()};
  const double lo = *distinct.begin();
  const double hi = *distinct.rbegin();
  const double width = (hi - lo) / static_cast<double>(buckets);
  std::vector<double> edges;
  for (std::size_t b = 1; b < buckets; ++b) edges.push_back(lo + width * static_cast<double>(b));
  return edges;
}

namespace {

std::size_t usable_operator_count(const Column& col, const std::vector<Op>& ops) {
  std::size_t k = 0;
  for (Op op : ops)
    if (col.kind != FeatureKind::Categorical || op == Op::Eq || op == Op::Ne) ++k;
  return k;
}

double tree_size(const std::vector<std::size_t>& option_counts, std::size_t max_features) {
  std::vector<double> elementary(max_features + 1, 0.0);
  elementary[0] = 1.0;
  for (auto o : option_counts)
    for (std::size_t k = max_features; k >= 1; --k) elementary[k] += elementary[k - 1] * static_cast<double>(o);
  double total = 0.0;
  for (double e : elementary) total += e;
  return total;
}

}  // namespace

double raw_predicate_count(const Table& table, const ExplorationConfig& config, const std::string& exclude) {
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < table.column_count(); ++i) {
    const auto& col = table.column(i);
    if (col.name == exclude) continue;
    const auto k = usable_operator_count(col, config.operators) *
                   candidate_thresholds(table, col.name, config.buckets).size();
    if (k > 0) counts.push_back(k);
  }
  return tree_size(counts, config.max_features);
}

namespace {

struct Option {
  Clause clause;
};

struct FeaturePlan {
  std::string name;
  const std::vector<double>* values;
  std::vector<Option> options;
  std::size_t distinct = 0;
};

struct Fingerprint {
  std::size_t support;
  std::uint64_t h1;
  std::uint64_t h2;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const {
    return static_cast<std::size_t>(f.h1 ^ (f.h2 * 0x9e3779b97f4a7c15ULL) ^ f.support);
  }
};

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Fingerprint fingerprint(const RowSet& rows) {
  std::uint64_t h1 = 0x243f6a8885a308d3ULL;
  std::uint64_t h2 = 0x13198a2e03707344ULL;
  for (auto r : rows) {
    h1 = mix64(h1 ^ (r + 0x9e3779b97f4a7c15ULL));
    h2 = (h2 ^ r) * 0x100000001b3ULL + 0x2545f4914f6cdd1dULL;
  }
  return {rows.size(), h1, mix64(h2)};
}

bool better_representative(const Predicate& a, const std::string& a_key, const Predicate& b,
                           const std::string& b_key) {
  const auto ca = a.active_clause_count();
  const auto cb = b.active_clause_count();
  if (ca != cb) return ca < cb;
  return a_key < b_key;
}

class Explorer {
 public:
  Explorer(const Table& table, const Visualization& reference, const ExplorationConfig& config, CandidateSet& out)
      : table_(table), reference_(reference), config_(config), out_(out) {}

  void run() {
    const auto n = table_.row_count();
    if (n == 0) throw EmptySupport("table has no rows");
    auto& stats = out_.stats;
    stats.vc_dimension = effective_vc_dimension(table_, config_);
    stats.gamma_min = min_selectivity_threshold(stats.vc_dimension, config_.delta, n, config_.c, config_.log_base);
    floor_support_ = stats.gamma_min * static_cast<double>(n);

    plan_features();

    std::vector<std::size_t> option_counts;
    for (const auto& f : features_) option_counts.push_back(f.options.size());
    stats.raw_predicates = tree_size(option_counts, config_.max_features);

    RowSet root;
    root.reserve(n);
    for (std::uint32_t r = 0; r < n; ++r)
      if (out_.domain.codes[r] >= 0) root.push_back(r);
    stack_.clear();
    levels_.assign(config_.max_features + 1, RowSet{});
    ++stats.visited;
    if (admit(root)) {
      emit(root);
      explore(root, 0, 0);
    }
    stats.emitted = out_.candidates.size();
  }

 private:
  void plan_features() {
    std::vector<FeaturePlan> plans;
    for (std::size_t i = 0; i < table_.column_count(); ++i) {
      const auto& col = table_.column(i);
      if (col.name == reference_.group_by) continue;
      FeaturePlan plan{col.name, &col.values, {}, column_stats(table_, col.name).distinct};
      const auto thresholds = candidate_thresholds(table_, col.name, config_.buckets);
      for (Op op : config_.operators) {
        if (usable_operator_count(col, {op}) == 0) continue;
        for (double t : thresholds) plan.options.push_back({Clause{col.name, op, t}});
      }
      if (!plan.options.empty()) plans.push_back(std::move(plan));
    }
    if (config_.ordering_heuristic)
      std::stable_sort(plans.begin(), plans.end(),
                       [](const FeaturePlan& a, const FeaturePlan& b) { return a.distinct < b.distinct; });
    features_ = std::move(plans);
  }

  // Zero support and selectivity-floor checks shared by every node.
  bool admit(const RowSet& rows) {
    if (rows.empty()) {
      ++out_.stats.excluded_zero_support;
      return false;
    }
    if (config_.prune && static_cast<double>(rows.size()) <= floor_support_) {
      ++out_.stats.pruned_low_selectivity;
      return false;
    }
    return true;
  }

  void explore(const RowSet& parent, std::size_t first_feature, std::size_t depth) {
    if (depth >= config_.max_features) return;
    RowSet& child = levels_[depth];
    for (std::size_t fi = first_feature; fi < features_.size(); ++fi) {
      const auto& plan = features_[fi];
      const auto& values = *plan.values;
      for (const auto& opt : plan.options) {
        child.clear();
        for (auto r : parent) {
          const double v = values[r];
          if (!is_null(v) && opt.clause.matches(v)) child.push_back(r);
        }
        ++out_.stats.visited;
        if (!admit(child)) continue;
        stack_.push_back(Connection{plan.name, {opt.clause}});
        emit(child);
        explore(child, fi + 1, depth + 1);
        stack_.pop_back();
      }
    }
  }

  void emit(const RowSet& rows) {
    Predicate pred(stack_);
    const auto fp = fingerprint(rows);
    auto key = canonical_string(pred);
    auto it = seen_.find(fp);
    if (it != seen_.end()) {
      ++out_.stats.equivalence_merged;
      auto& existing = out_.candidates[it->second];
      if (better_representative(pred, key, existing.visualization.predicate, keys_[it->second])) {
        existing.visualization.predicate = std::move(pred);
        keys_[it->second] = std::move(key);
      }
      return;
    }
    Candidate c;
    c.visualization = Visualization{std::move(pred), reference_.group_by, reference_.buckets};
    c.counts = bar_counts(out_.domain, rows);
    c.support = rows.size();
    c.selectivity = static_cast<double>(rows.size()) / static_cast<double>(table_.row_count());
    seen_.emplace(fp, out_.candidates.size());
    keys_.push_back(std::move(key));
    out_.candidates.push_back(std::move(c));
  }

  const Table& table_;
  const Visualization& reference_;
  const ExplorationConfig& config_;
  CandidateSet& out_;
  double floor_support_ = 0.0;
  std::vector<FeaturePlan> features_;
  std::vector<Connection> stack_;
  std::vector<RowSet> levels_;
  std::unordered_map<Fingerprint, std::size_t, FingerprintHash> seen_;
  std::vector<std::string> keys_;
};

}  // namespace

CandidateSet enumerate_candidates(const Table& table, const Visualization& reference,
                                  const ExplorationConfig& config) {
  validate(config);
  validate(reference, table);
  CandidateSet out;
  out.domain = group_domain(table, reference.group_by, reference.buckets);
  Explorer(table, reference, config, out).run();
  return out;
}

}  // namespace vizrec
