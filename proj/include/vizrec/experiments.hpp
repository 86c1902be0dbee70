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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vizrec/table.hpp"
#include "vizrec/vc_bounds.hpp"

namespace vizrec {

struct SeriesPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

// Plot data for one experiment. CSV columns are fixed: series,x,y.
struct ExperimentResult {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  BoundConfig bounds;
  std::vector<SeriesPoint> series;
  nlohmann::json summary = nlohmann::json::object();

  void add(std::string label, double x, double y) { series.push_back({std::move(label), x, y}); }
  std::vector<SeriesPoint> points(const std::string& label) const;
};

nlohmann::json to_json(const ExperimentResult& result);
std::string to_csv(const ExperimentResult& result);
// Throws InvalidArgument when the document does not follow the result schema.
void validate_experiment_json(const nlohmann::json& j);

struct ExperimentFiles {
  std::filesystem::path json;
  std::filesystem::path csv;
};

// <root>/<name>/<stamp>.json and .csv
ExperimentFiles write_experiment(const ExperimentResult& result, const std::filesystem::path& root,
                                 const std::string& stamp);
// UTC time as YYYYMMDDTHHMMSSZ.
std::string utc_stamp();

// x0 uniform on {1..4} (the group-by), x1..x3 uniform on {1..9}.
Table gen_uniform_dataset(std::size_t n = 100000, std::uint64_t seed = 1);

// x (group-by) equals the flag f = i % 2, plus a noise feature on {1..5}.
// Filtering on f <= 0 moves half of the group-by mass: distance 0.5 at 50%
// selectivity.
Table gen_planted_dataset(std::size_t n = 10000, std::uint64_t seed = 1);

struct RandomDataParams {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  int vc_dimension = 4;
  double delta = 0.05;
  double c = 0.5;
  LogBase log_base = LogBase::Two;
};

ExperimentResult run_random_data_experiment(const RandomDataParams& params);

// Reference and candidate pmfs of the chi-square vs VC example.
struct Chi2VcFixture {
  Eigen::VectorXd reference;
  Eigen::VectorXd candidate;
  std::size_t m = 1200;
  std::size_t n = 10000;
  double gap = 0.1;
  double target_p_value = 2.54e-5;
};

// Gap on the first bar, compensation spread evenly over the remaining bars;
// the first-bar mass is found by bisection so the goodness-of-fit p-value of
// m * candidate against the reference hits the target.
Chi2VcFixture make_chi2_vs_vc_fixture(std::size_t bins = 16, double gap = 0.1, std::size_t m = 1200,
                                      std::size_t n = 10000, double target_p_value = 2.54e-5);
nlohmann::json to_json(const Chi2VcFixture& fixture);
Chi2VcFixture chi2_vs_vc_fixture_from_json(const nlohmann::json& j);

struct Chi2VcParams {
  int vc_dimension = 10;
  double delta = 0.05;
  double alpha = 0.05;
  double c = 0.5;
  LogBase log_base = LogBase::Two;
  bool one_sample = false;
  double gap_scale = 1.0;  // candidate = reference + scale * (candidate - reference)
};

ExperimentResult run_chi2_vs_vc_example(const Chi2VcFixture& fixture, const Chi2VcParams& params = {});

struct MinSamplesParams {
  std::size_t k_min = 2;
  std::size_t k_max = 100;
  double alpha = 5e-8;
  std::vector<double> distances;  // empty: 21 log-spaced points on [0.01, 1]
};

// Rows are K = k_min..k_max, columns follow the distance grid.
Eigen::MatrixXd min_samples_surface(const MinSamplesParams& params, std::vector<double>* grid = nullptr);
ExperimentResult run_min_samples_curve(const MinSamplesParams& params = {});

struct ChernoffParams {
  std::size_t n_max = 10000;
  std::uint64_t seed = 1;
  int vc_dimension = 5;
  double delta = 0.05;
  double c = 0.5;
  LogBase log_base = LogBase::Two;
};

// Sample counts checked along one stream of draws: 1-2-5 steps from 10.
std::vector<std::size_t> chernoff_checkpoints(std::size_t n_max);
ExperimentResult run_chernoff_vs_vc(const ChernoffParams& params = {});

// Group-by g with a modest shift on f1 = 1, a noise feature f2, and droppable
// columns: two constants, two running identifiers and copies of f1 and f2.
Table gen_restriction_dataset(std::size_t n = 20000, std::uint64_t seed = 1);

struct RestrictionParams {
  std::size_t n = 20000;
  std::uint64_t seed = 1;
  double delta = 0.05;
  double eps_rho = 0.01;
};

ExperimentResult run_search_space_restriction(const Table& table, const std::string& group_by,
                                              const RestrictionParams& params);
ExperimentResult run_search_space_restriction(const RestrictionParams& params = {});

// Runs an experiment by name with default parameters and the given seed.
ExperimentResult run_experiment(const std::string& name, std::uint64_t seed);
std::vector<std::string> experiment_names();

}  // namespace vizrec
