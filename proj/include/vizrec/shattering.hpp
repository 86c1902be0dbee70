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
#include <vector>

#include <Eigen/Dense>

#include "vizrec/vc_bounds.hpp"

namespace vizrec {

inline constexpr std::size_t kOracleMaxPoints = 12;
inline constexpr std::size_t kOracleMaxFeatures = 6;

// Every subset of the point set (bit i = row i of `points`) that some query
// of the class selects. Columns of `points` follow `spec.features`.
std::vector<std::uint32_t> realizable_subsets(const Eigen::MatrixXd& points, const QueryClassSpec& spec);

// Size of the largest subset of `points` shattered by the class, by
// exhaustive enumeration. Throws InvalidArgument past the size guards.
std::size_t shattering_oracle(const Eigen::MatrixXd& points, const QueryClassSpec& spec);

}  // namespace vizrec
