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

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "vizrec/error.hpp"
#include "vizrec/random.hpp"
#include "vizrec/stat_tests.hpp"

using namespace vizrec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXd uniform(int k) { return Eigen::VectorXd::Constant(k, 1.0 / k); }

}  // namespace

TEST(Gof, PerfectFit) {
  const auto r = chi_squared_gof(uniform(4), vec({25, 25, 25, 25}), 0.05);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(r.dof, 3);
}

TEST(Gof, SmallDeviation) {
  const auto r = chi_squared_gof(uniform(4), vec({30, 20, 25, 25}), 0.05);
  EXPECT_NEAR(r.statistic, 2.0, 1e-12);
  EXPECT_NEAR(r.p_value, 0.5724, 5e-5);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Gof, SparseBarsWarn) {
  const auto r = chi_squared_gof(uniform(4), vec({3, 2, 4, 3}), 0.05);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("below 5"), std::string::npos);
}

TEST(Gof, ObservationInEmptyReferenceBarIsIllPosed) {
  EXPECT_THROW(chi_squared_gof(vec({0.5, 0.5, 0.0}), vec({4, 4, 1}), 0.05), InvalidArgument);
  // Both empty: the bar is dropped.
  const auto r = chi_squared_gof(vec({0.5, 0.5, 0.0}), vec({10, 10, 0}), 0.05);
  EXPECT_EQ(r.dof, 1);
}

TEST(Gof, BadInputs) {
  EXPECT_THROW(chi_squared_gof(uniform(3), vec({1, 1}), 0.05), InvalidArgument);
  EXPECT_THROW(chi_squared_gof(uniform(2), vec({0, 0}), 0.05), InvalidArgument);
  EXPECT_THROW(chi_squared_gof(uniform(2), vec({1, 1}), 1.0), InvalidArgument);
}

TEST(Gof, BonferroniContext) {
  const double p = 2.54e-5;
  EXPECT_TRUE(p < bonferroni(0.05, 1967));
  EXPECT_FALSE(p < bonferroni(0.05, 1969));
}

TEST(Gof, NullRejectionRateIsCalibrated) {
  Rng rng(2024);
  const auto ref = vec({0.1, 0.2, 0.3, 0.4});
  constexpr int draws = 10000;
  int rejects = 0;
  for (int t = 0; t < draws; ++t) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < 200; ++i) {
      const double u = rng.uniform01();
      counts(u < 0.1 ? 0 : u < 0.3 ? 1 : u < 0.6 ? 2 : 3) += 1;
    }
    rejects += chi_squared_gof(ref, counts, 0.05).reject ? 1 : 0;
  }
  EXPECT_LE(static_cast<double>(rejects) / draws, 0.05 + 0.02);
}

TEST(Bonferroni, Examples) {
  EXPECT_NEAR(bonferroni(0.05, 1967), 2.542e-5, 5e-9);
  EXPECT_EQ(bonferroni(0.05, 1), 0.05);
  EXPECT_NEAR(bonferroni(0.05, 1000000), 5e-8, 1e-20);
  EXPECT_THROW(bonferroni(0.05, 0), InvalidArgument);
}

TEST(ModifiedChi2, ZeroThresholdIsPlainGof) {
  const auto ref = uniform(4);
  const auto counts = vec({30, 20, 25, 25});
  const auto gof = chi_squared_gof(ref, counts, 0.05);
  const auto mod = modified_chi2_test(ref, counts / 100.0, 100, 0.0, 0.05);
  EXPECT_NEAR(mod.statistic, gof.statistic, 1e-12);
  EXPECT_NEAR(mod.p_value, gof.p_value, 1e-10);
}

TEST(ModifiedChi2, IdenticalPmf) {
  const auto r = modified_chi2_test(uniform(4), uniform(4), 1000, 0.01, 0.05);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(ModifiedChi2, Monotone) {
  const auto ref = uniform(4);
  double prev = 2.0;
  for (double shift : {0.01, 0.03, 0.05, 0.08}) {
    const auto obs = vec({0.25 + shift, 0.25 - shift, 0.25, 0.25});
    const double p = modified_chi2_test(ref, obs, 1000, 0.01, 0.05).p_value;
    EXPECT_LT(p, prev);
    prev = p;
  }
  const auto obs = vec({0.3, 0.2, 0.25, 0.25});
  prev = -1.0;
  for (double eps : {0.0, 0.005, 0.01, 0.02, 0.05}) {
    const double p = modified_chi2_test(ref, obs, 1000, eps, 0.05).p_value;
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(ModifiedChi2, ZeroReferenceBin) {
  EXPECT_THROW(modified_chi2_test(vec({0.5, 0.5, 0.0}), vec({0.4, 0.4, 0.2}), 10, 0.0, 0.05), InvalidArgument);
}

TEST(MinSamples, QuantileOracle) {
  boost::math::chi_squared_distribution<double> d(1.0);
  const double q = boost::math::quantile(boost::math::complement(d, 5e-8));
  const auto expect = static_cast<std::size_t>(std::ceil(q / 0.1));
  EXPECT_EQ(min_samples_chi2(0.1, 2, 5e-8), expect);
  EXPECT_NEAR(static_cast<double>(min_samples_chi2(0.1, 2, 5e-8)), 297.0, 2.0);
}

TEST(MinSamples, DoublingDistanceHalves) {
  for (double dist : {0.01, 0.05, 0.2}) {
    const auto a = min_samples_chi2(dist, 10, 5e-8);
    const auto b = min_samples_chi2(2 * dist, 10, 5e-8);
    EXPECT_NEAR(static_cast<double>(a) / 2.0, static_cast<double>(b), 1.0);
  }
}

TEST(MinSamples, MonotoneInDistanceAndBars) {
  std::size_t prev = SIZE_MAX;
  for (double dist = 0.01; dist <= 1.0; dist *= 1.3) {
    const auto n = min_samples_chi2(dist, 20, 5e-8);
    EXPECT_LE(n, prev);
    prev = n;
  }
  prev = 0;
  for (std::size_t k = 2; k <= 100; k += 7) {
    const auto n = min_samples_chi2(0.1, k, 5e-8);
    EXPECT_GE(n, prev);
    prev = n;
  }
  // Hundreds of samples suffice at moderate distances.
  EXPECT_LT(min_samples_chi2(0.5, 100, 5e-8), 1000u);
  EXPECT_THROW(min_samples_chi2(0.0, 2, 0.05), InvalidArgument);
}
