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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "test_util.hpp"
#include "vizrec/distributions.hpp"
#include "vizrec/experiments.hpp"
#include "vizrec/random.hpp"
#include "vizrec/service.hpp"
#include "vizrec/shattering.hpp"
#include "vizrec/stat_tests.hpp"
#include "vizrec/vc_bounds.hpp"

using namespace vizrec;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string only;  // substring filter from argv

void report(const std::string& name, const std::function<Verdict()>& check) {
  if (!only.empty() && name.find(only) == std::string::npos) return;
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s  %-28s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Standard normal from two uniforms (Box-Muller), kept off std distributions
// so the stream is the same everywhere.
double normal(Rng& rng) {
  double u1;
  do u1 = rng.uniform01();
  while (u1 <= 0.0);
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double noncentral_draw(Rng& rng, int dof, double lambda) {
  const double z = normal(rng) + std::sqrt(lambda);
  double s = z * z;
  for (int i = 1; i < dof; ++i) {
    const double w = normal(rng);
    s += w * w;
  }
  return s;
}

Verdict null_fwer() {
  constexpr int runs = 200;
  testkit::TempDir dir;
  const auto csv = (dir / "u.csv").string();
  int positive = 0;
  const auto t0 = Clock::now();
  for (int seed = 1; seed <= runs; ++seed) {
    testkit::spit(csv, to_csv(gen_uniform_dataset(100000, static_cast<std::uint64_t>(seed))));
    const auto r = testkit::cli({"recommend", csv, "--group-by", "x0", "--delta", "0.05", "--format", "json"});
    if (r.code != 0) return {false, "seed " + std::to_string(seed) + ": " + r.err};
    const auto j = nlohmann::json::parse(r.out);
    if (j.at("vc_dimension") != 4) return {false, "unexpected d " + j.at("vc_dimension").dump()};
    if (!j.at("recommendations").empty()) ++positive;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const double rate = static_cast<double>(positive) / runs;
  return {rate <= 0.08 && secs < 300.0,
          fmt("%.0f/200 runs with a recommendation (rate %.3f <= 0.08), %.0fs < 300s", positive, rate, secs)};
}

Verdict eps_min() {
  RandomDataParams p;
  const double two = run_random_data_experiment(p).summary.at("eps_min").get<double>();
  p.log_base = LogBase::Natural;
  const double ln = run_random_data_experiment(p).summary.at("eps_min").get<double>();
  const double quoted_gap = std::abs(0.0059 - ln) / ln;
  return {std::abs(two - 0.00645) <= 1e-5 && std::abs(ln - 0.00592) <= 1e-5 && quoted_gap <= 0.005,
          fmt("log2 %.6f (0.00645+-1e-5), ln %.6f (0.00592+-1e-5), 0.0059 off by %.2f%%", two, ln, 100 * quoted_gap)};
}

Verdict bonferroni_anchor() {
  const double a = bonferroni(0.05, 1967);
  const double m = std::floor(0.05 / 2.54e-5);
  return {std::abs(a - 2.542e-5) <= 5e-9 && std::abs(m - 1968.0) <= 1.0,
          fmt("alpha/1967 = %.4e, floor(0.05/2.54e-5) = %.0f", a, m)};
}

Verdict chi2_vs_vc() {
  const auto j = nlohmann::json::parse(testkit::slurp(testkit::fixture_path("chi2_vs_vc.json")));
  const auto r = run_chi2_vs_vc_example(chi2_vs_vc_fixture_from_json(j));
  const auto& s = r.summary;
  const double p = s.at("chi2_p_value").get<double>();
  const bool rejects = p < bonferroni(0.05, 1967);
  const bool safe = s.at("vc_safe").get<bool>();
  const double rel = std::abs(p - 2.54e-5) / 2.54e-5;
  return {rejects && !safe && rel <= 0.2,
          "chi2 p=" + fmt("%.4e", p) + (rejects ? " rejects" : " does not reject") + " at M=1967, vizrec " +
              (safe ? "SAFE" : "NOT SAFE") + fmt(" (dist %.4f <= eps sum %.4f), p off by %.1f%%",
                                                  s.at("distance").get<double>(), s.at("uncertainty").get<double>(),
                                                  100 * rel)};
}

Verdict chernoff_crossover() {
  const auto r = run_chernoff_vs_vc();
  const auto k1 = r.points("chernoff_k1"), k1000 = r.points("chernoff_k1000"), vc = r.points("vc"),
             vc1 = r.points("vc_d1");
  double worst = 0.0, lowest = 1e9, least_excess = 1e9;
  for (std::size_t i = 0; i < k1.size(); ++i) {
    worst = std::max(worst, vc1[i].y / k1[i].y - 1.0);
    least_excess = std::min(least_excess, vc1[i].y / k1[i].y - 1.0);
    if (k1000[i].x >= 100) lowest = std::min(lowest, k1000[i].y / vc[i].y);
  }
  return {worst < 0.35 && least_excess > 0.0 && lowest > 1.0,
          fmt("d=1 VC over K=1 Chernoff by %.1f%%..%.1f%% (< 35%%), K=1000 / VC(d=5) >= %.4f for m >= 100",
              100 * least_excess, 100 * worst, lowest)};
}

Verdict vc_lemma() {
  Rng rng(2027);
  int violations = 0, tight = 0;
  for (int trial = 0; trial < 100; ++trial) {
    QueryClassSpec spec;
    const auto k = 1 + rng.below(3);
    for (std::uint64_t f = 0; f < k; ++f) {
      QueryClassFeature q{"f" + std::to_string(f), static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3)),
                          Rays::Left};
      if (q.alpha == 0 && q.beta == 0) q.alpha = 1;
      q.rays = q.beta == 2 ? Rays::Both : (rng.bernoulli(0.5) ? Rays::Left : Rays::Right);
      spec.features.push_back(q);
    }
    const int d = vc_dimension_bound(spec);
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(d) + 1, 9);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = static_cast<double>(rng.below(8));
    const auto s = shattering_oracle(pts, spec);
    if (s > static_cast<std::size_t>(d)) ++violations;
  }
  for (int alpha = 1; alpha <= 3; ++alpha) {
    Eigen::MatrixXd pts(2 * alpha + 1, 1);
    for (int i = 0; i < pts.rows(); ++i) pts(i, 0) = i;
    const QueryClassSpec spec{{QueryClassFeature{"x", alpha, 0, Rays::Left}}};
    if (shattering_oracle(pts, spec) == static_cast<std::size_t>(vc_dimension_bound(spec))) ++tight;
  }
  return {violations == 0 && tight == 3,
          fmt("%.0f/100 random classes exceed the bound; interval classes tight for %.0f/3", violations, tight)};
}

Verdict interval_reduction() {
  Rng rng(77);
  std::vector<double> probes;
  for (int k = -50; k < 950; ++k) probes.push_back(k / 100.0);
  int mismatches = 0, unstable = 0, unmerged = 0;
  for (int t = 0; t < 1000; ++t) {
    Connection c{"x", {}};
    const auto clauses = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < clauses; ++i)
      c.clauses.push_back(Clause{"x", static_cast<Op>(rng.below(6)), static_cast<double>(rng.below(9))});
    const auto s = reduce_intervals(c);
    for (double x : probes)
      if (s.contains(x) != c.matches(x)) ++mismatches;
    if (!(reduce_intervals(s) == s)) ++unstable;
    for (std::size_t i = 1; i < s.intervals.size(); ++i) {
      const auto& a = s.intervals[i - 1];
      const auto& b = s.intervals[i];
      if (!(a.hi < b.lo || (a.hi == b.lo && !a.hi_closed && !b.lo_closed))) ++unmerged;
    }
  }
  return {mismatches + unstable + unmerged == 0,
          fmt("1000 connections x 1000 probes: %.0f membership mismatches, %.0f non-idempotent, %.0f unmerged",
              mismatches, unstable, unmerged)};
}

Verdict noncentral() {
  constexpr int draws = 1000000;
  double worst = 0.0;
  for (int dof : {1, 3, 9})
    for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
      // One stream per cell so a cell's draws do not depend on grid order.
      Rng rng(1000u * static_cast<unsigned>(dof) + static_cast<unsigned>(lambda));
      const double x = dof + lambda;  // the mean
      int below = 0;
      for (int i = 0; i < draws; ++i)
        if (noncentral_draw(rng, dof, lambda) <= x) ++below;
      const double f = noncentral_chi2_cdf(x, dof, lambda);
      const double se = std::sqrt(f * (1 - f) / draws);
      worst = std::max(worst, std::abs(below / static_cast<double>(draws) - f) / se);
    }
  // The modified test example: K=4, m=1000, distance 0.05, eps 0.01.
  Eigen::VectorXd ref = Eigen::VectorXd::Constant(4, 0.25), obs(4);
  const double shift = std::sqrt(0.05 * 0.25 / 2.0);
  obs << 0.25 + shift, 0.25 - shift, 0.25, 0.25;
  const auto t = modified_chi2_test(ref, obs, 1000, 0.01, 0.05);
  Rng rng(4242);
  int above = 0;
  for (int i = 0; i < draws; ++i)
    if (noncentral_draw(rng, 3, 10.0) >= t.statistic) ++above;
  const double mc = above / static_cast<double>(draws);
  const double se = std::sqrt(t.p_value * (1 - t.p_value) / draws);
  const double example_z = std::abs(mc - t.p_value) / se;

  boost::math::chi_squared_distribution<double> c1(1.0);
  const double q = boost::math::quantile(boost::math::complement(c1, 5e-8));
  const auto n_min = min_samples_chi2(0.1, 2, 5e-8);
  const double oracle = q / 0.1;
  const bool ok = worst <= 3.0 && example_z <= 3.0 && std::abs(static_cast<double>(n_min) - oracle) <= 2.0;
  return {ok, fmt("grid max |z| %.2f <= 3, example T=%.1f |z| %.2f, n_min %.0f", worst, t.statistic, example_z,
                  static_cast<double>(n_min)) +
                  fmt(" vs quantile oracle %.2f +-2", oracle)};
}

Verdict restriction() {
  const auto r = run_search_space_restriction();
  const auto before = r.points("eps_bar_before"), after = r.points("eps_bar_after");
  bool pointwise = before.size() == after.size() && !before.empty();
  for (std::size_t i = 0; pointwise && i < before.size(); ++i) pointwise = after[i].y <= before[i].y;
  const auto& s = r.summary;
  const auto nb = s.at("recommendations_before").get<int>(), na = s.at("recommendations_after").get<int>();
  return {na >= nb && pointwise,
          "recommendations " + std::to_string(nb) + " -> " + std::to_string(na) + ", d " +
              s.at("vc_dimension_before").dump() + " -> " + s.at("vc_dimension_after").dump() +
              (pointwise ? ", eps curve pointwise <=" : ", eps curve NOT pointwise <=")};
}

Verdict determinism() {
  std::string differing;
  for (const auto& name : experiment_names()) {
    const auto a = run_experiment(name, 11), b = run_experiment(name, 11);
    if (to_json(a).dump() != to_json(b).dump() || to_csv(a) != to_csv(b)) differing += name + " ";
  }
  Service service;
  int mismatched = 0;
  for (const auto& [file, group] : std::map<std::string, std::string>{{"planted.csv", "x"}, {"uniform.csv", "x0"}}) {
    const auto path = testkit::fixture_path(file);
    const auto reg = service.register_dataset(nlohmann::json{{"name", file}, {"csv", testkit::slurp(path)}}.dump());
    const auto id = reg.body.at("id").get<std::string>();
    const auto http = service.recommend(id, nlohmann::json{{"group_by", group}}.dump());
    const auto run = testkit::cli({"recommend", path, "--group-by", group, "--format", "json"});
    if (run.code != 0 || nlohmann::json::parse(run.out) != http.body) ++mismatched;
  }
  return {differing.empty() && mismatched == 0,
          "experiments re-run byte-identical" + (differing.empty() ? std::string() : " except " + differing) +
              "; CLI vs service JSON mismatches on shared fixtures: " + std::to_string(mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) only = argv[1];
  report("null-data FWER", null_fwer);
  report("eps_min reproduction", eps_min);
  report("Bonferroni anchor", bonferroni_anchor);
  report("chi2-vs-VC verdict split", chi2_vs_vc);
  report("Chernoff/VC crossover", chernoff_crossover);
  report("VC lemma soundness", vc_lemma);
  report("interval-reduction equivalence", interval_reduction);
  report("noncentral chi2 accuracy", noncentral);
  report("search-space restriction", restriction);
  report("determinism", determinism);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
