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

#include "vizrec/vc_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vizrec/error.hpp"

namespace vizrec {

bool IntervalSet::contains(double x) const {
  if (tautology) return true;
  return std::any_of(intervals.begin(), intervals.end(), [&](const Interval& i) { return i.contains(x); });
}

std::size_t IntervalSet::bounded_count() const {
  return static_cast<std::size_t>(
      std::count_if(intervals.begin(), intervals.end(), [](const Interval& i) { return i.is_bounded(); }));
}

bool IntervalSet::has_left_ray() const {
  return std::any_of(intervals.begin(), intervals.end(), [](const Interval& i) { return i.is_left_ray(); });
}

bool IntervalSet::has_right_ray() const {
  return std::any_of(intervals.begin(), intervals.end(), [](const Interval& i) { return i.is_right_ray(); });
}

std::vector<Interval> clause_intervals(const Clause& clause) {
  constexpr double inf = kSentinel;
  if (clause.is_sentinel()) return {Interval{-inf, inf, false, false}};
  const double a = clause.value;
  switch (clause.op) {
    case Op::Le: return {Interval{-inf, a, false, true}};
    case Op::Lt: return {Interval{-inf, a, false, false}};
    case Op::Ge: return {Interval{a, inf, true, false}};
    case Op::Gt: return {Interval{a, inf, false, false}};
    case Op::Eq: return {Interval{a, a, true, true}};
    case Op::Ne: return {Interval{-inf, a, false, false}, Interval{a, inf, false, false}};
  }
  return {};
}

namespace {

bool is_empty(const Interval& i) { return i.lo > i.hi || (i.lo == i.hi && !(i.lo_closed && i.hi_closed)); }

void normalise_ends(Interval& i) {
  if (i.lo == -kSentinel) i.lo_closed = false;
  if (i.hi == kSentinel) i.hi_closed = false;
}

}  // namespace

IntervalSet reduce_intervals(std::vector<Interval> intervals) {
  for (auto& i : intervals) normalise_ends(i);
  std::erase_if(intervals, is_empty);
  // Closed left ends sort first so a tie extends the closed one.
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });

  IntervalSet out;
  for (const auto& next : intervals) {
    if (!out.intervals.empty()) {
      auto& cur = out.intervals.back();
      const bool touches = next.lo < cur.hi || (next.lo == cur.hi && (next.lo_closed || cur.hi_closed));
      if (touches) {
        if (next.hi > cur.hi) {
          cur.hi = next.hi;
          cur.hi_closed = next.hi_closed;
        } else if (next.hi == cur.hi) {
          cur.hi_closed = cur.hi_closed || next.hi_closed;
        }
        continue;
      }
    }
    out.intervals.push_back(next);
  }
  if (out.intervals.size() == 1 && out.intervals.front().lo == -kSentinel &&
      out.intervals.front().hi == kSentinel) {
    out.tautology = true;
    out.intervals.clear();
  }
  return out;
}

IntervalSet reduce_intervals(const IntervalSet& set) {
  if (set.tautology) return set;
  return reduce_intervals(set.intervals);
}

IntervalSet reduce_intervals(const Connection& connection) {
  if (connection.clauses.empty()) throw InvalidArgument("connection has no clauses");
  std::vector<Interval> all;
  for (const auto& c : connection.clauses) {
    auto parts = clause_intervals(c);
    all.insert(all.end(), parts.begin(), parts.end());
  }
  return reduce_intervals(std::move(all));
}

std::string_view to_string(Rays rays) {
  switch (rays) {
    case Rays::Left: return "left";
    case Rays::Right: return "right";
    case Rays::Both: return "both";
  }
  return "?";
}

Rays parse_rays(std::string_view text) {
  if (text == "left") return Rays::Left;
  if (text == "right") return Rays::Right;
  if (text == "both") return Rays::Both;
  throw InvalidArgument("ray direction must be left, right or both");
}

const QueryClassFeature* QueryClassSpec::find(std::string_view name) const {
  for (const auto& f : features)
    if (f.name == name) return &f;
  return nullptr;
}

void validate(const QueryClassFeature& feature) {
  if (feature.alpha < 0 || feature.beta < 0)
    throw InvalidArgument("alpha and beta must be non-negative for '" + feature.name + "'");
  if (feature.rays == Rays::Both && feature.beta < 2)
    throw InvalidArgument("rays in both directions need beta >= 2 for '" + feature.name + "'");
}

int vc_dimension_bound(const QueryClassSpec& spec) {
  if (spec.features.empty()) throw InvalidArgument("query class has no features");
  std::set<std::string> names;
  int d = 0;
  for (const auto& f : spec.features) {
    validate(f);
    if (!names.insert(f.name).second) throw InvalidArgument("feature '" + f.name + "' listed twice");
    d += f.contribution();
  }
  if (d == 0) throw InvalidArgument("query class is empty (all alpha and beta are zero)");
  return d;
}

QueryClassFeature connection_complexity(const std::string& feature, const IntervalSet& set) {
  QueryClassFeature f{feature, 0, 0, Rays::Left};
  if (set.tautology) return f;
  f.alpha = static_cast<int>(set.bounded_count());
  f.beta = static_cast<int>(set.ray_count());
  if (set.has_left_ray() && set.has_right_ray())
    f.rays = Rays::Both;
  else if (set.has_right_ray())
    f.rays = Rays::Right;
  return f;
}

bool admits(const QueryClassFeature& feature, const IntervalSet& set) {
  if (set.tautology) return true;
  if (static_cast<int>(set.bounded_count()) > feature.alpha) return false;
  if (static_cast<int>(set.ray_count()) > feature.beta) return false;
  if (set.has_left_ray() && feature.rays == Rays::Right) return false;
  if (set.has_right_ray() && feature.rays == Rays::Left) return false;
  return true;
}

QueryClassSpec class_for_operators(const std::vector<FeatureDescriptor>& features,
                                   const std::vector<Op>& ops) {
  QueryClassSpec spec;
  for (const auto& fd : features) {
    bool point = false, left = false, right = false;
    for (Op op : ops) {
      if (fd.categorical && op != Op::Eq && op != Op::Ne) continue;
      switch (op) {
        case Op::Eq: point = true; break;
        case Op::Le:
        case Op::Lt: left = true; break;
        case Op::Ge:
        case Op::Gt: right = true; break;
        case Op::Ne: left = right = true; break;
      }
    }
    if (!point && !left && !right) continue;
    QueryClassFeature f{fd.name, point ? 1 : 0, (left ? 1 : 0) + (right ? 1 : 0), Rays::Left};
    if (left && right)
      f.rays = Rays::Both;
    else if (right)
      f.rays = Rays::Right;
    spec.features.push_back(std::move(f));
  }
  return spec;
}

nlohmann::json to_json(const QueryClassSpec& spec) {
  auto arr = nlohmann::json::array();
  for (const auto& f : spec.features)
    arr.push_back({{"name", f.name}, {"alpha", f.alpha}, {"beta", f.beta}, {"rays", std::string(to_string(f.rays))}});
  return {{"features", arr}};
}

QueryClassSpec query_class_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("features") || !j.at("features").is_array())
    throw InvalidArgument("query class JSON needs a \"features\" array");
  QueryClassSpec spec;
  for (const auto& fj : j.at("features")) {
    if (!fj.is_object()) throw InvalidArgument("query class feature must be an object");
    QueryClassFeature f;
    f.name = fj.value("name", std::string("feature") + std::to_string(spec.features.size()));
    if (!fj.contains("alpha") || !fj.contains("beta") || !fj.at("alpha").is_number_integer() ||
        !fj.at("beta").is_number_integer())
      throw InvalidArgument("query class feature needs integer \"alpha\" and \"beta\"");
    f.alpha = fj.at("alpha").get<int>();
    f.beta = fj.at("beta").get<int>();
    if (fj.contains("rays"))
      f.rays = parse_rays(fj.at("rays").get<std::string>());
    else
      f.rays = f.beta >= 2 ? Rays::Both : Rays::Left;
    validate(f);
    spec.features.push_back(std::move(f));
  }
  return spec;
}

std::string_view to_string(LogBase base) { return base == LogBase::Two ? "2" : "e"; }

LogBase parse_log_base(std::string_view text) {
  if (text == "2" || text == "log2") return LogBase::Two;
  if (text == "e" || text == "ln" || text == "natural") return LogBase::Natural;
  throw InvalidArgument("log base must be 2 or e");
}

double log_inverse_delta(double delta, LogBase base) {
  return base == LogBase::Two ? -std::log2(delta) : -std::log(delta);
}

void validate(const BoundConfig& config) {
  if (!(config.delta > 0.0 && config.delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (!(config.c > 0.0)) throw InvalidArgument("constant c must be positive");
  if (config.vc_dimension < 1) throw InvalidArgument("VC dimension must be at least 1");
}

nlohmann::json to_json(const BoundConfig& config) {
  return {{"delta", config.delta},
          {"c", config.c},
          {"log_base", std::string(to_string(config.log_base))},
          {"vc_dimension", config.vc_dimension}};
}

EpsilonBar epsilon_bar(int vc_dimension, double delta, std::size_t support, double c, LogBase base) {
  validate(BoundConfig{delta, c, base, vc_dimension});
  if (support == 0) throw InvalidArgument("epsilon_bar needs a positive support");
  EpsilonBar eps;
  eps.value = std::sqrt(c * (vc_dimension + log_inverse_delta(delta, base)) / static_cast<double>(support));
  eps.vc_dimension = vc_dimension;
  eps.delta = delta;
  eps.support = support;
  eps.c = c;
  eps.log_base = base;
  return eps;
}

EpsilonBar epsilon_bar(const BoundConfig& config, std::size_t support) {
  return epsilon_bar(config.vc_dimension, config.delta, support, config.c, config.log_base);
}

nlohmann::json to_json(const EpsilonBar& eps) {
  return {{"value", eps.value},       {"vc_dimension", eps.vc_dimension}, {"delta", eps.delta},
          {"support", eps.support},   {"c", eps.c},
          {"log_base", std::string(to_string(eps.log_base))}};
}

double min_selectivity_threshold(int vc_dimension, double delta, std::size_t rows, double c, LogBase base) {
  validate(BoundConfig{delta, c, base, vc_dimension});
  if (rows == 0) throw InvalidArgument("row count must be positive");
  return c * (vc_dimension + log_inverse_delta(delta, base)) / static_cast<double>(rows);
}

int max_vc_for_requirements(double theta, double gamma1, double gamma2, std::size_t rows, double delta,
                            LogBase base) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0,1]");
  if (!(gamma1 > 0.0 && gamma1 <= 1.0) || !(gamma2 > 0.0 && gamma2 <= 1.0))
    throw InvalidArgument("selectivities must lie in (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  const double raw =
      theta * theta * std::min(gamma1, gamma2) * static_cast<double>(rows) - log_inverse_delta(delta, base);
  // Absorb representation error so exact integers are not floored down.
  const double d = std::floor(raw + 1e-9);
  if (d < 1.0)
    throw Unsatisfiable("no VC dimension >= 1 meets the requirements (bound " + std::to_string(raw) + ")");
  return static_cast<int>(d);
}

double chernoff_tail(std::size_t support, double eps, bool two_sided) {
  const double p = std::exp(-2.0 * static_cast<double>(support) * eps * eps);
  return two_sided ? 2.0 * p : p;
}

double chernoff_union_tail(std::size_t support, double eps, std::size_t bars, bool two_sided) {
  return static_cast<double>(bars) * chernoff_tail(support, eps, two_sided);
}

double chernoff_epsilon(std::size_t support, double delta, std::size_t bars) {
  if (support == 0) throw InvalidArgument("support must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
  if (bars == 0) throw InvalidArgument("bar count must be positive");
  return std::sqrt(std::log(static_cast<double>(bars) / delta) / (2.0 * static_cast<double>(support)));
}

}  // namespace vizrec
