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

#include "vizrec/shattering.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "vizrec/error.hpp"

namespace vizrec {

namespace {

// Whether `mask` is selectable on one feature by <= alpha bounded intervals
// plus the allowed rays.
bool feature_selects(const Eigen::VectorXd& values, const QueryClassFeature& f, std::uint32_t mask) {
  const auto n = static_cast<std::size_t>(values.size());
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1u);
  if (f.alpha == 0 && f.beta == 0) return mask == full;

  // Group points by value; a group must be all in or all out.
  std::map<double, int> groups;  // value -> 1 in, 0 out
  for (std::size_t i = 0; i < n; ++i) {
    const int bit = (mask >> i) & 1u;
    auto [it, inserted] = groups.emplace(values(static_cast<Eigen::Index>(i)), bit);
    if (!inserted && it->second != bit) return false;
  }
  std::vector<int> bits;
  bits.reserve(groups.size());
  for (const auto& [v, b] : groups) bits.push_back(b);

  int runs = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] && (i == 0 || !bits[i - 1])) ++runs;
  if (runs == 0) return true;

  const bool left_ok = f.beta >= 1 && f.rays != Rays::Right;
  const bool right_ok = f.rays == Rays::Right ? f.beta >= 1 : (f.rays == Rays::Both && f.beta >= 2);
  const bool prefix = bits.front() == 1;
  const bool suffix = bits.back() == 1;

  if (runs == 1 && prefix && suffix) return left_ok || right_ok || f.alpha >= 1;
  int needed = runs;
  if (prefix && left_ok) --needed;
  if (suffix && right_ok) --needed;
  return needed <= f.alpha;
}

}  // namespace

std::vector<std::uint32_t> realizable_subsets(const Eigen::MatrixXd& points, const QueryClassSpec& spec) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n > kOracleMaxPoints)
    throw InvalidArgument("shattering oracle supports at most " + std::to_string(kOracleMaxPoints) + " points");
  if (spec.features.empty() || spec.features.size() > kOracleMaxFeatures)
    throw InvalidArgument("shattering oracle needs 1.." + std::to_string(kOracleMaxFeatures) + " features");
  if (static_cast<std::size_t>(points.cols()) != spec.features.size())
    throw InvalidArgument("point dimension does not match the query class");
  for (const auto& f : spec.features) validate(f);

  const std::uint32_t count = 1u << n;
  std::vector<char> current(count, 0);
  bool first = true;
  for (std::size_t k = 0; k < spec.features.size(); ++k) {
    const Eigen::VectorXd column = points.col(static_cast<Eigen::Index>(k));
    std::vector<std::uint32_t> own;
    for (std::uint32_t m = 0; m < count; ++m)
      if (feature_selects(column, spec.features[k], m)) own.push_back(m);
    if (first) {
      for (auto m : own) current[m] = 1;
      first = false;
      continue;
    }
    std::vector<char> next(count, 0);
    for (std::uint32_t a = 0; a < count; ++a) {
      if (!current[a]) continue;
      for (auto b : own) next[a & b] = 1;
    }
    current.swap(next);
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < count; ++m)
    if (current[m]) out.push_back(m);
  return out;
}

std::size_t shattering_oracle(const Eigen::MatrixXd& points, const QueryClassSpec& spec) {
  const auto ranges = realizable_subsets(points, spec);
  const auto n = static_cast<std::size_t>(points.rows());
  const std::uint32_t count = 1u << n;
  // A shattered set of size k needs 2^k distinct traces.
  std::size_t cap = 0;
  while (cap < n && (std::size_t{1} << (cap + 1)) <= ranges.size()) ++cap;

  std::vector<std::uint32_t> stamp(count, 0);
  std::uint32_t generation = 0;
  for (std::size_t size = cap; size > 0; --size) {
    for (std::uint32_t subset = 0; subset < count; ++subset) {
      if (static_cast<std::size_t>(std::popcount(subset)) != size) continue;
      ++generation;
      std::size_t distinct = 0;
      for (auto r : ranges) {
        const auto trace = r & subset;
        if (stamp[trace] != generation) {
          stamp[trace] = generation;
          ++distinct;
        }
      }
      if (distinct == (std::size_t{1} << size)) return size;
    }
  }
  return 0;
}

}  // namespace vizrec
