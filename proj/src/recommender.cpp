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

#include "vizrec/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "vizrec/error.hpp"
#include "vizrec/table.hpp"

namespace vizrec {

double chebyshev_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw InvalidArgument("pmfs have different supports");
  if (p.size() == 0) return 0.0;
  return (p - q).cwiseAbs().maxCoeff();
}

double chebyshev_distance(const Pmf& p, const Pmf& q) {
  if (p.labels != q.labels) throw InvalidArgument("pmfs have different supports");
  return chebyshev_distance(p.probabilities, q.probabilities);
}

bool is_safe(double distance, double uncertainty, const std::optional<double>& eps_v) {
  const double bar = eps_v ? std::max(uncertainty, *eps_v) : uncertainty;
  return distance > bar;
}

nlohmann::json to_json(const Recommendation& r) {
  return {{"visualization", to_json(r.candidate)},
          {"predicate_text", canonical_string(r.candidate.predicate)},
          {"pmf", to_json(r.pmf)},
          {"distance", r.distance},
          {"eps_reference", r.eps_reference},
          {"eps_candidate", r.eps_candidate},
          {"uncertainty", r.uncertainty},
          {"interest", r.interest},
          {"safe", r.safe},
          {"support", r.support},
          {"selectivity", r.selectivity}};
}

nlohmann::json to_json(const RecommendationResult& result) {
  auto recs = nlohmann::json::array();
  for (const auto& r : result.recommendations) recs.push_back(to_json(r));
  return {{"reference", to_json(result.reference)},
          {"reference_pmf", to_json(result.reference_pmf)},
          {"vc_dimension", result.bounds.vc_dimension},
          {"delta", result.bounds.delta},
          {"c", result.bounds.c},
          {"log_base", std::string(to_string(result.bounds.log_base))},
          {"eps_v", result.eps_v ? nlohmann::json(*result.eps_v) : nlohmann::json(nullptr)},
          {"one_sample", result.one_sample},
          {"gamma_min", result.gamma_min},
          {"stats", to_json(result.stats)},
          {"recommendations", recs}};
}

void rank(std::vector<Recommendation>& recs) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  keys.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) keys.emplace_back(canonical_string(recs[i].candidate.predicate), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    const double ia = recs[a.second].interest;
    const double ib = recs[b.second].interest;
    if (ia != ib) return ia > ib;
    return a.first < b.first;
  });
  std::vector<Recommendation> out;
  out.reserve(recs.size());
  for (const auto& k : keys) out.push_back(std::move(recs[k.second]));
  recs = std::move(out);
}

namespace {

Pmf reference_pmf(const Visualization& reference, const Table& table, const GroupDomain& domain) {
  const auto rows = evaluate_predicate(reference.predicate, table);
  const auto counts = bar_counts(domain, rows);
  if (counts.sum() <= 0.0) throw EmptySupport("reference visualization selects no rows");
  return pmf_from_counts(domain, counts);
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

RecommendationResult score_candidates(const Visualization& reference, const Table& table,
                                      const ExplorationConfig& config) {
  validate(config);
  validate(reference, table);
  RecommendationResult result;
  result.reference = reference;
  result.eps_v = config.eps_v;
  result.one_sample = config.one_sample;
  result.bounds = bound_config(table, config);

  auto space = enumerate_candidates(table, reference, config);
  result.reference_pmf = reference_pmf(reference, table, space.domain);
  result.stats = space.stats;
  result.gamma_min = space.stats.gamma_min;

  const double eps_ref = config.one_sample ? 0.0 : epsilon_bar(result.bounds, result.reference_pmf.support).value;
  auto& recs = result.recommendations;
  recs.resize(space.candidates.size());
  parallel_for(space.candidates.size(), config.threads, [&](std::size_t i) {
    auto& cand = space.candidates[i];
    auto& r = recs[i];
    r.pmf = pmf_from_counts(space.domain, cand.counts);
    r.candidate = std::move(cand.visualization);
    r.support = cand.support;
    r.selectivity = cand.selectivity;
    r.distance = chebyshev_distance(result.reference_pmf.probabilities, r.pmf.probabilities);
    r.eps_reference = eps_ref;
    r.eps_candidate = epsilon_bar(result.bounds, cand.support).value;
    r.uncertainty = r.eps_reference + r.eps_candidate;
    r.interest = r.distance - r.uncertainty;
    r.safe = is_safe(r.distance, r.uncertainty, config.eps_v);
  });
  return result;
}

RecommendationResult vizrec(const Visualization& reference, const Table& table, const ExplorationConfig& config) {
  auto result = score_candidates(reference, table, config);
  auto& recs = result.recommendations;
  recs.erase(std::remove_if(recs.begin(), recs.end(), [](const Recommendation& r) { return !r.safe; }), recs.end());
  rank(recs);
  return result;
}

nlohmann::json to_json(const BaselineEntry& e) {
  return {{"visualization", to_json(e.candidate)},
          {"predicate_text", canonical_string(e.candidate.predicate)},
          {"pmf", to_json(e.pmf)},
          {"test", to_json(e.test)},
          {"support", e.support}};
}

nlohmann::json to_json(const BaselineResult& result) {
  auto found = nlohmann::json::array();
  for (const auto& e : result.discoveries) found.push_back(to_json(e));
  return {{"reference", to_json(result.reference)},
          {"reference_pmf", to_json(result.reference_pmf)},
          {"alpha", result.alpha},
          {"hypotheses", result.hypotheses},
          {"threshold", result.threshold},
          {"corrected", result.corrected},
          {"uncorrected_hits", result.uncorrected_hits},
          {"discoveries", found}};
}

BaselineResult baseline_chi2_recommend(const Visualization& reference, const Table& table,
                                       const ExplorationConfig& config, double alpha, bool corrected) {
  validate(config);
  validate(reference, table);
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("significance level must lie in (0,1)");
  BaselineResult result;
  result.reference = reference;
  result.alpha = alpha;
  result.corrected = corrected;

  auto space = enumerate_candidates(table, reference, config);
  result.reference_pmf = reference_pmf(reference, table, space.domain);
  result.hypotheses = space.candidates.size();
  result.threshold = corrected ? bonferroni(alpha, std::max<std::size_t>(result.hypotheses, 1)) : alpha;

  for (auto& cand : space.candidates) {
    BaselineEntry e;
    e.support = cand.support;
    try {
      e.test = chi_squared_gof(result.reference_pmf.probabilities, cand.counts, result.threshold);
    } catch (const InvalidArgument& ex) {
      // Mass in a bar the reference never hits: the statistic is unbounded.
      e.test = TestResult{std::numeric_limits<double>::infinity(), 0, 0.0, true, result.threshold, {ex.what()}};
    }
    if (e.test.p_value < alpha) ++result.uncorrected_hits;
    if (e.test.p_value < result.threshold) {
      e.pmf = pmf_from_counts(space.domain, cand.counts);
      e.candidate = std::move(cand.visualization);
      result.discoveries.push_back(std::move(e));
    }
  }
  std::stable_sort(result.discoveries.begin(), result.discoveries.end(), [](const auto& a, const auto& b) {
    if (a.test.p_value != b.test.p_value) return a.test.p_value < b.test.p_value;
    return canonical_string(a.candidate.predicate) < canonical_string(b.candidate.predicate);
  });
  return result;
}

}  // namespace vizrec
