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

#include "vizrec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "vizrec/error.hpp"
#include "vizrec/preprocess.hpp"
#include "vizrec/random.hpp"
#include "vizrec/recommender.hpp"
#include "vizrec/stat_tests.hpp"

namespace vizrec {

std::vector<SeriesPoint> ExperimentResult::points(const std::string& label) const {
  std::vector<SeriesPoint> out;
  for (const auto& p : series)
    if (p.label == label) out.push_back(p);
  return out;
}

nlohmann::json to_json(const ExperimentResult& r) {
  auto series = nlohmann::json::array();
  for (const auto& p : r.series) series.push_back({{"label", p.label}, {"x", p.x}, {"y", p.y}});
  return {{"name", r.name},
          {"parameters", r.parameters},
          {"bounds", to_json(r.bounds)},
          {"series", series},
          {"summary", r.summary}};
}

std::string to_csv(const ExperimentResult& r) {
  std::string out = "series,x,y\n";
  for (const auto& p : r.series) out += p.label + "," + format_number(p.x) + "," + format_number(p.y) + "\n";
  return out;
}

void validate_experiment_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) { throw InvalidArgument("experiment result: " + what); };
  if (!j.is_object()) fail("not an object");
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty()) fail("missing name");
  if (!j.contains("parameters") || !j["parameters"].is_object()) fail("missing parameters");
  if (!j.contains("summary") || !j["summary"].is_object()) fail("missing summary");
  if (!j.contains("bounds") || !j["bounds"].is_object()) fail("missing bounds");
  for (const char* key : {"delta", "c", "vc_dimension"})
    if (!j["bounds"].contains(key) || !j["bounds"][key].is_number()) fail(std::string("bounds.") + key);
  if (!j["bounds"].contains("log_base") || !j["bounds"]["log_base"].is_string()) fail("bounds.log_base");
  if (!j.contains("series") || !j["series"].is_array()) fail("missing series");
  for (const auto& p : j["series"]) {
    if (!p.is_object() || !p.contains("label") || !p["label"].is_string()) fail("series label");
    if (!p.contains("x") || !p["x"].is_number() || !p.contains("y") || !p["y"].is_number()) fail("series point");
  }
}

ExperimentFiles write_experiment(const ExperimentResult& result, const std::filesystem::path& root,
                                 const std::string& stamp) {
  const auto dir = root / result.name;
  std::filesystem::create_directories(dir);
  ExperimentFiles files{dir / (stamp + ".json"), dir / (stamp + ".csv")};
  const auto j = to_json(result);
  validate_experiment_json(j);
  std::ofstream(files.json) << j.dump(2) << "\n";
  std::ofstream(files.csv) << to_csv(result);
  return files;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

namespace {

Column int_column(std::string name, std::vector<double> values) {
  return Column{std::move(name), FeatureKind::DiscreteOrdered, std::move(values), MetricMap::identity()};
}

// Two-sample (or one-sample) threshold at selectivity gamma, with the
// reference on all n rows.
double threshold_at(const BoundConfig& b, double gamma, std::size_t n, bool one_sample) {
  const double k = b.c * (b.vc_dimension + log_inverse_delta(b.delta, b.log_base));
  const double cand = std::sqrt(k / (gamma * static_cast<double>(n)));
  return one_sample ? cand : cand + std::sqrt(k / static_cast<double>(n));
}

double radius_at(const BoundConfig& b, double gamma, std::size_t n) {
  return threshold_at(b, gamma, n, true);
}

// Log-spaced selectivities from gamma_min (exclusive) to 1.
std::vector<double> gamma_grid(double gamma_min, std::size_t points = 60) {
  const double lo = std::max(gamma_min, 1e-12) * 1.0001;
  std::vector<double> out;
  for (std::size_t k = 0; k < points; ++k)
    out.push_back(lo * std::pow(1.0 / lo, static_cast<double>(k) / static_cast<double>(points - 1)));
  out.back() = 1.0;
  return out;
}

}  // namespace

Table gen_uniform_dataset(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  Rng rng(seed);
  std::vector<std::vector<double>> cols(4, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = static_cast<double>(rng.uniform_int(1, 4));
    for (int f = 1; f < 4; ++f) cols[f][i] = static_cast<double>(rng.uniform_int(1, 9));
  }
  std::vector<Column> columns;
  for (int f = 0; f < 4; ++f) columns.push_back(int_column("x" + std::to_string(f), std::move(cols[f])));
  return Table("uniform", std::move(columns));
}

Table gen_planted_dataset(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  Rng rng(seed);
  std::vector<double> x(n), f(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = static_cast<double>(i % 2);
    x[i] = f[i];
    noise[i] = static_cast<double>(rng.uniform_int(1, 5));
  }
  std::vector<Column> columns;
  columns.push_back({"x", FeatureKind::Binary, std::move(x), MetricMap::labelled({"0", "1"})});
  columns.push_back({"f", FeatureKind::Binary, std::move(f), MetricMap::labelled({"0", "1"})});
  columns.push_back(int_column("noise", std::move(noise)));
  return Table("planted", std::move(columns));
}

ExperimentResult run_random_data_experiment(const RandomDataParams& p) {
  const auto table = gen_uniform_dataset(p.n, p.seed);
  ExplorationConfig config;
  config.delta = p.delta;
  config.c = p.c;
  config.log_base = p.log_base;
  config.vc_dimension = p.vc_dimension;
  const Visualization reference{Predicate{}, "x0", 10};
  const auto scored = score_candidates(reference, table, config);

  ExperimentResult r;
  r.name = "random-data";
  r.bounds = scored.bounds;
  r.parameters = {{"n", p.n}, {"seed", p.seed}, {"vc_dimension", p.vc_dimension}, {"delta", p.delta},
                  {"c", p.c}, {"log_base", std::string(to_string(p.log_base))}, {"group_by", "x0"},
                  {"operators", {"<="}}, {"max_features", config.max_features}};

  std::size_t safe = 0;
  std::size_t min_support = p.n;
  double max_distance = 0.0;
  double max_interest = -std::numeric_limits<double>::infinity();
  for (const auto& rec : scored.recommendations) {
    r.add("candidate", rec.selectivity, rec.distance);
    if (rec.safe) ++safe;
    min_support = std::min(min_support, rec.support);
    max_distance = std::max(max_distance, rec.distance);
    max_interest = std::max(max_interest, rec.interest);
  }
  for (double g : gamma_grid(scored.gamma_min)) {
    r.add("eps_bar", g, radius_at(r.bounds, g, p.n));
    r.add("threshold", g, threshold_at(r.bounds, g, p.n, false));
  }
  r.summary = {{"eps_min", epsilon_bar(r.bounds, p.n).value},
               {"recommendation_count", safe},
               {"candidates", scored.recommendations.size()},
               {"raw_predicates", scored.stats.raw_predicates},
               {"gamma_min", scored.gamma_min},
               {"min_candidate_support", min_support},
               {"max_distance", max_distance},
               {"max_interest", max_interest},
               {"stats", to_json(scored.stats)}};
  return r;
}

Chi2VcFixture make_chi2_vs_vc_fixture(std::size_t bins, double gap, std::size_t m, std::size_t n,
                                      double target) {
  if (bins < 2) throw InvalidArgument("fixture needs at least two bins");
  if (!(gap > 0.0 && gap < 0.5)) throw InvalidArgument("gap must lie in (0, 0.5)");
  const auto k = static_cast<Eigen::Index>(bins);
  auto build = [&](double p1, Eigen::VectorXd& p, Eigen::VectorXd& q) {
    p = Eigen::VectorXd::Constant(k, (1.0 - p1) / static_cast<double>(bins - 1));
    p(0) = p1;
    q = p.array() + gap / static_cast<double>(bins - 1);
    q(0) = p1 - gap;
  };
  auto p_value = [&](double p1) {
    Eigen::VectorXd p, q;
    build(p1, p, q);
    return chi_squared_gof(p, q * static_cast<double>(m), 0.05).p_value;
  };
  // The statistic m * gap^2 / (p1 (1 - p1)) is smallest at p1 = 1/2 and grows
  // towards 1, so the p-value falls monotonically on [1/2, 1 - small].
  double lo = 0.5;
  double hi = 1.0 - 1e-9;
  if (p_value(lo) < target) throw Unsatisfiable("target p-value not reachable with this bin count and gap");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p_value(mid) > target ? lo : hi) = mid;
  }
  Chi2VcFixture f;
  build(0.5 * (lo + hi), f.reference, f.candidate);
  f.m = m;
  f.n = n;
  f.gap = gap;
  f.target_p_value = target;
  return f;
}

nlohmann::json to_json(const Chi2VcFixture& f) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"construction",
           "generated by make_chi2_vs_vc_fixture: gap on bar 0, compensation spread evenly over the other bars, "
           "bar-0 mass found by bisection so the goodness-of-fit p-value at m equals target_p_value"},
          {"bins", f.reference.size()},
          {"m", f.m},
          {"n", f.n},
          {"gap", f.gap},
          {"target_p_value", f.target_p_value},
          {"reference", vec(f.reference)},
          {"candidate", vec(f.candidate)}};
}

Chi2VcFixture chi2_vs_vc_fixture_from_json(const nlohmann::json& j) {
  try {
    Chi2VcFixture f;
    const auto ref = j.at("reference").get<std::vector<double>>();
    const auto cand = j.at("candidate").get<std::vector<double>>();
    if (ref.size() != cand.size() || ref.size() < 2) throw InvalidArgument("fixture pmfs misaligned");
    f.reference = Eigen::Map<const Eigen::VectorXd>(ref.data(), static_cast<Eigen::Index>(ref.size()));
    f.candidate = Eigen::Map<const Eigen::VectorXd>(cand.data(), static_cast<Eigen::Index>(cand.size()));
    f.m = j.at("m").get<std::size_t>();
    f.n = j.at("n").get<std::size_t>();
    f.gap = j.value("gap", 0.1);
    f.target_p_value = j.value("target_p_value", 2.54e-5);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed fixture: ") + e.what());
  }
}

ExperimentResult run_chi2_vs_vc_example(const Chi2VcFixture& f, const Chi2VcParams& p) {
  if (f.reference.size() != f.candidate.size()) throw InvalidArgument("fixture pmfs misaligned");
  ExperimentResult r;
  r.name = "chi2-vs-vc";
  r.bounds = BoundConfig{p.delta, p.c, p.log_base, p.vc_dimension};
  validate(r.bounds);
  r.parameters = {{"m", f.m}, {"n", f.n}, {"vc_dimension", p.vc_dimension}, {"delta", p.delta},
                  {"alpha", p.alpha}, {"c", p.c}, {"log_base", std::string(to_string(p.log_base))},
                  {"one_sample", p.one_sample}, {"gap_scale", p.gap_scale}, {"bins", f.reference.size()}};

  const Eigen::VectorXd q = f.reference + p.gap_scale * (f.candidate - f.reference);
  if ((q.array() < 0.0).any()) throw InvalidArgument("scaled candidate leaves the simplex");
  const auto test = chi_squared_gof(f.reference, q * static_cast<double>(f.m), p.alpha);
  // Largest M with p < alpha / M.
  const double ratio = p.alpha / test.p_value;
  const double max_m = std::isfinite(ratio) ? std::ceil(ratio) - 1.0 : std::numeric_limits<double>::infinity();

  const double eps_ref = p.one_sample ? 0.0 : epsilon_bar(r.bounds, f.n).value;
  const double eps_cand = epsilon_bar(r.bounds, f.m).value;
  const double distance = chebyshev_distance(f.reference, q);
  const double uncertainty = eps_ref + eps_cand;

  for (Eigen::Index k = 0; k < q.size(); ++k) {
    r.add("reference", static_cast<double>(k), f.reference(k));
    r.add("candidate", static_cast<double>(k), q(k));
  }
  r.summary = {{"chi2_statistic", test.statistic},
               {"chi2_dof", test.dof},
               {"chi2_p_value", test.p_value},
               {"d_chi2", chi2_distance(f.reference, q)},
               {"max_bonferroni_m", max_m},
               {"chi2_rejects_at_1967", test.p_value < bonferroni(p.alpha, 1967)},
               {"distance", distance},
               {"eps_reference", eps_ref},
               {"eps_candidate", eps_cand},
               {"uncertainty", uncertainty},
               {"vc_safe", is_safe(distance, uncertainty, std::nullopt)}};
  return r;
}

Eigen::MatrixXd min_samples_surface(const MinSamplesParams& p, std::vector<double>* grid_out) {
  if (p.k_min < 2 || p.k_max < p.k_min) throw InvalidArgument("bar range must satisfy 2 <= k_min <= k_max");
  std::vector<double> grid = p.distances;
  if (grid.empty())
    for (int k = 0; k <= 20; ++k) grid.push_back(std::pow(10.0, -2.0 + 0.1 * k));
  Eigen::MatrixXd surface(static_cast<Eigen::Index>(p.k_max - p.k_min + 1), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = p.k_min; k <= p.k_max; ++k)
    for (std::size_t j = 0; j < grid.size(); ++j)
      surface(static_cast<Eigen::Index>(k - p.k_min), static_cast<Eigen::Index>(j)) =
          static_cast<double>(min_samples_chi2(grid[j], k, p.alpha));
  if (grid_out) *grid_out = grid;
  return surface;
}

ExperimentResult run_min_samples_curve(const MinSamplesParams& p) {
  std::vector<double> grid;
  const auto surface = min_samples_surface(p, &grid);
  ExperimentResult r;
  r.name = "min-samples";
  r.parameters = {{"k_min", p.k_min}, {"k_max", p.k_max}, {"alpha", p.alpha}, {"distances", grid}};
  for (Eigen::Index i = 0; i < surface.rows(); ++i)
    for (Eigen::Index j = 0; j < surface.cols(); ++j)
      r.add("K=" + std::to_string(p.k_min + static_cast<std::size_t>(i)), grid[static_cast<std::size_t>(j)],
            surface(i, j));
  r.summary = {{"n_min_k2_d0.1", min_samples_chi2(0.1, 2, p.alpha)},
               {"n_min_k10_d0.1", min_samples_chi2(0.1, 10, p.alpha)},
               {"n_min_k100_d0.1", min_samples_chi2(0.1, 100, p.alpha)},
               {"max_n_min", surface.maxCoeff()},
               {"min_n_min", surface.minCoeff()}};
  return r;
}

std::vector<std::size_t> chernoff_checkpoints(std::size_t n_max) {
  std::vector<std::size_t> out;
  for (std::size_t decade = 10; decade <= n_max; decade *= 10)
    for (std::size_t step : {1, 2, 5})
      if (decade * step <= n_max) out.push_back(decade * step);
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

ExperimentResult run_chernoff_vs_vc(const ChernoffParams& p) {
  if (p.n_max < 10) throw InvalidArgument("n_max must be at least 10");
  constexpr int trials = 10;
  constexpr double prob = 0.3;
  Eigen::VectorXd truth(trials + 1);
  double coef = 1.0;
  for (int k = 0; k <= trials; ++k) {
    truth(k) = coef * std::pow(prob, k) * std::pow(1.0 - prob, trials - k);
    coef = coef * (trials - k) / (k + 1);
  }

  ExperimentResult r;
  r.name = "chernoff-vs-vc";
  r.bounds = BoundConfig{p.delta, p.c, p.log_base, p.vc_dimension};
  validate(r.bounds);
  const BoundConfig d1{p.delta, p.c, p.log_base, 1};
  r.parameters = {{"n_max", p.n_max}, {"seed", p.seed}, {"vc_dimension", p.vc_dimension}, {"delta", p.delta},
                  {"c", p.c}, {"log_base", std::string(to_string(p.log_base))}, {"distribution", "Bin(10,0.3)"}};

  Rng rng(p.seed);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(trials + 1);
  std::size_t drawn = 0;
  bool observed_below_vc = true;
  double worst_d1_ratio = 0.0;
  double min_k1000_over_vc = std::numeric_limits<double>::infinity();
  for (std::size_t m : chernoff_checkpoints(p.n_max)) {
    for (; drawn < m; ++drawn) {
      int hits = 0;
      for (int t = 0; t < trials; ++t) hits += rng.bernoulli(prob) ? 1 : 0;
      counts(hits) += 1.0;
    }
    const double x = static_cast<double>(m);
    const double observed = (counts / x - truth).cwiseAbs().maxCoeff();
    const double vc = epsilon_bar(r.bounds, m).value;
    const double vc1 = epsilon_bar(d1, m).value;
    const double k1 = chernoff_epsilon(m, p.delta, 1);
    const double k1000 = chernoff_epsilon(m, p.delta, 1000);
    r.add("observed", x, observed);
    r.add("chernoff_k1", x, k1);
    r.add("chernoff_k10", x, chernoff_epsilon(m, p.delta, 10));
    r.add("chernoff_k100", x, chernoff_epsilon(m, p.delta, 100));
    r.add("chernoff_k1000", x, k1000);
    r.add("vc", x, vc);
    r.add("vc_d1", x, vc1);
    observed_below_vc = observed_below_vc && observed <= vc;
    worst_d1_ratio = std::max(worst_d1_ratio, vc1 / k1);
    if (m >= 100) min_k1000_over_vc = std::min(min_k1000_over_vc, k1000 / vc);
  }
  r.summary = {{"observed_below_vc", observed_below_vc},
               {"max_vc_d1_over_chernoff_k1", worst_d1_ratio},
               {"min_chernoff_k1000_over_vc", min_k1000_over_vc}};
  return r;
}

Table gen_restriction_dataset(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("dataset size must be positive");
  Rng rng(seed);
  constexpr double shift = 0.085;
  std::vector<double> g(n), f1(n), f2(n), ca(n, 1.0), cb(n, 7.0), id(n), ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    f1[i] = static_cast<double>(rng.uniform_int(1, 4));
    f2[i] = static_cast<double>(rng.uniform_int(1, 5));
    const bool planted = f1[i] == 1.0 && rng.bernoulli(shift);
    g[i] = planted ? 1.0 : static_cast<double>(rng.uniform_int(1, 4));
    id[i] = static_cast<double>(i + 1);
    ts[i] = 1000.0 + 3.0 * static_cast<double>(i);
  }
  std::vector<Column> columns;
  columns.push_back(int_column("g", std::move(g)));
  columns.push_back(int_column("f1", f1));
  columns.push_back(int_column("f2", f2));
  columns.push_back(int_column("const_a", std::move(ca)));
  columns.push_back(int_column("const_b", std::move(cb)));
  columns.push_back({"row_id", FeatureKind::ContinuousOrdered, std::move(id), MetricMap::identity()});
  columns.push_back({"ts", FeatureKind::ContinuousOrdered, std::move(ts), MetricMap::identity()});
  columns.push_back(int_column("f1_copy", std::move(f1)));
  columns.push_back(int_column("f2_copy", std::move(f2)));
  return Table("restriction", std::move(columns));
}

ExperimentResult run_search_space_restriction(const Table& table, const std::string& group_by,
                                              const RestrictionParams& p) {
  const Visualization reference{Predicate{}, group_by, 10};
  ExplorationConfig before;
  before.delta = p.delta;
  before.drop_constant = false;
  before.drop_identifier = false;
  const auto rec_before = vizrec(reference, table, before);

  ExplorationConfig after = before;
  after.drop_constant = true;
  after.drop_identifier = true;
  after.eps_rho = p.eps_rho;
  after.protect = {group_by};
  const auto reduced = preprocess(table, after);
  const auto rec_after = vizrec(reference, reduced.table, after);

  ExperimentResult r;
  r.name = "search-space-restriction";
  r.bounds = rec_after.bounds;
  r.parameters = {{"n", table.row_count()}, {"seed", p.seed}, {"delta", p.delta}, {"eps_rho", p.eps_rho},
                  {"group_by", group_by}, {"columns", table.column_names()}};
  const auto n = table.row_count();
  bool pointwise = true;
  for (double gmm : gamma_grid(std::min(rec_before.gamma_min, rec_after.gamma_min))) {
    const double b = threshold_at(rec_before.bounds, gmm, n, false);
    const double a = threshold_at(rec_after.bounds, gmm, n, false);
    r.add("eps_bar_before", gmm, b);
    r.add("eps_bar_after", gmm, a);
    pointwise = pointwise && a <= b;
  }
  for (const auto& rec : rec_before.recommendations) r.add("recommended_before", rec.selectivity, rec.interest);
  for (const auto& rec : rec_after.recommendations) r.add("recommended_after", rec.selectivity, rec.interest);
  r.summary = {{"vc_dimension_before", rec_before.bounds.vc_dimension},
               {"vc_dimension_after", rec_after.bounds.vc_dimension},
               {"recommendations_before", rec_before.recommendations.size()},
               {"recommendations_after", rec_after.recommendations.size()},
               {"candidates_before", rec_before.stats.emitted},
               {"candidates_after", rec_after.stats.emitted},
               {"after_curve_pointwise_le_before", pointwise},
               {"preprocess", to_json(reduced.report)}};
  return r;
}

ExperimentResult run_search_space_restriction(const RestrictionParams& p) {
  return run_search_space_restriction(gen_restriction_dataset(p.n, p.seed), "g", p);
}

std::vector<std::string> experiment_names() {
  return {"random-data", "chi2-vs-vc", "min-samples", "chernoff-vs-vc", "search-space-restriction"};
}

ExperimentResult run_experiment(const std::string& name, std::uint64_t seed) {
  if (name == "random-data") {
    RandomDataParams p;
    p.seed = seed;
    return run_random_data_experiment(p);
  }
  if (name == "chi2-vs-vc") return run_chi2_vs_vc_example(make_chi2_vs_vc_fixture());
  if (name == "min-samples") return run_min_samples_curve();
  if (name == "chernoff-vs-vc") {
    ChernoffParams p;
    p.seed = seed;
    return run_chernoff_vs_vc(p);
  }
  if (name == "search-space-restriction") {
    RestrictionParams p;
    p.seed = seed;
    return run_search_space_restriction(p);
  }
  throw InvalidArgument("unknown experiment '" + name + "'");
}

}  // namespace vizrec
