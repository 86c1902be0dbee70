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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vizrec/predicate.hpp"

namespace vizrec {

// Interval over the extended reals. Infinite ends are always open.
struct Interval {
  double lo = -kSentinel;
  double hi = kSentinel;
  bool lo_closed = false;
  bool hi_closed = false;

  bool is_left_ray() const { return lo == -kSentinel && hi != kSentinel; }
  bool is_right_ray() const { return hi == kSentinel && lo != -kSentinel; }
  bool is_bounded() const { return lo != -kSentinel && hi != kSentinel; }
  bool contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Minimal union of disjoint, non-adjacent intervals, sorted by left end, or
// the whole line.
struct IntervalSet {
  bool tautology = false;
  std::vector<Interval> intervals;

  bool contains(double x) const;
  std::size_t bounded_count() const;
  bool has_left_ray() const;
  bool has_right_ray() const;
  std::size_t ray_count() const { return (has_left_ray() ? 1 : 0) + (has_right_ray() ? 1 : 0); }
  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;
};

std::vector<Interval> clause_intervals(const Clause& clause);

IntervalSet reduce_intervals(std::vector<Interval> intervals);
IntervalSet reduce_intervals(const IntervalSet& set);
IntervalSet reduce_intervals(const Connection& connection);

// Which half-lines the rays of a feature's connections may point along.
enum class Rays { Left, Right, Both };

std::string_view to_string(Rays rays);
Rays parse_rays(std::string_view text);

// Per-feature complexity of a query class: at most `alpha` non-redundant
// bounded intervals and `beta` rays. A single ray slot has a fixed
// direction; `Both` needs beta >= 2.
struct QueryClassFeature {
  std::string name;
  int alpha = 0;
  int beta = 0;
  Rays rays = Rays::Left;

  int contribution() const { return 2 * alpha + beta; }
  friend bool operator==(const QueryClassFeature&, const QueryClassFeature&) = default;
};

struct QueryClassSpec {
  std::vector<QueryClassFeature> features;

  const QueryClassFeature* find(std::string_view name) const;
  friend bool operator==(const QueryClassSpec&, const QueryClassSpec&) = default;
};

void validate(const QueryClassFeature& feature);

// Sum over features of 2*alpha + beta. Throws InvalidArgument when the class
// is empty.
int vc_dimension_bound(const QueryClassSpec& spec);

// Complexity of one reduced connection.
QueryClassFeature connection_complexity(const std::string& feature, const IntervalSet& set);
// True when the reduced connection lies inside the feature's class.
bool admits(const QueryClassFeature& feature, const IntervalSet& set);

// Class generated by single-clause connections over the given operators.
// Categorical features only take = and !=; a feature left with no usable
// operator is omitted.
struct FeatureDescriptor {
  std::string name;
  bool categorical = false;
};
QueryClassSpec class_for_operators(const std::vector<FeatureDescriptor>& features,
                                   const std::vector<Op>& ops);

nlohmann::json to_json(const QueryClassSpec& spec);
QueryClassSpec query_class_from_json(const nlohmann::json& j);

enum class LogBase { Two, Natural };

std::string_view to_string(LogBase base);
LogBase parse_log_base(std::string_view text);

double log_inverse_delta(double delta, LogBase base = LogBase::Two);

struct BoundConfig {
  double delta = 0.05;
  double c = 0.5;
  LogBase log_base = LogBase::Two;
  int vc_dimension = 1;
};

void validate(const BoundConfig& config);
nlohmann::json to_json(const BoundConfig& config);

// Uncertainty radius sqrt(c (d + log 1/delta) / m) with its inputs.
struct EpsilonBar {
  double value = 0.0;
  int vc_dimension = 0;
  double delta = 0.0;
  std::size_t support = 0;
  double c = 0.5;
  LogBase log_base = LogBase::Two;

  double reported() const { return value < 1.0 ? value : 1.0; }
};

EpsilonBar epsilon_bar(int vc_dimension, double delta, std::size_t support, double c = 0.5,
                       LogBase base = LogBase::Two);
EpsilonBar epsilon_bar(const BoundConfig& config, std::size_t support);

nlohmann::json to_json(const EpsilonBar& eps);

// Selectivity at or below which epsilon_bar reaches 1, so no visualization
// can be recommended: c (d + log 1/delta) / n.
double min_selectivity_threshold(int vc_dimension, double delta, std::size_t rows, double c = 0.5,
                                 LogBase base = LogBase::Two);

// Largest d keeping every candidate that differs by theta detectable:
// floor(theta^2 min(gamma1, gamma2) n - log2 1/delta).
int max_vc_for_requirements(double theta, double gamma1, double gamma2, std::size_t rows, double delta,
                            LogBase base = LogBase::Two);

// exp(-2 m eps^2); doubled when `two_sided`.
double chernoff_tail(std::size_t support, double eps, bool two_sided = false);
// Union bound over K bars: K exp(-2 m eps^2).
double chernoff_union_tail(std::size_t support, double eps, std::size_t bars, bool two_sided = false);
// Inverts the union bound: sqrt(ln(K / delta) / (2 m)).
double chernoff_epsilon(std::size_t support, double delta, std::size_t bars = 1);

}  // namespace vizrec
