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
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vizrec/distributions.hpp"

using namespace vizrec;

TEST(Distributions, IncompleteGammaMatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 10.0, 60.0})
    for (double x : {0.01, 0.3, 1.0, 3.0, 11.0, 40.0, 90.0}) {
      EXPECT_NEAR(gamma_p(a, x), boost::math::gamma_p(a, x), 1e-12) << a << " " << x;
      const double q = boost::math::gamma_q(a, x);
      EXPECT_NEAR(gamma_q(a, x), q, 1e-12 + 1e-9 * q) << a << " " << x;
    }
}

TEST(Distributions, GammaEdges) {
  EXPECT_EQ(gamma_p(2.0, 0.0), 0.0);
  EXPECT_EQ(gamma_q(2.0, 0.0), 1.0);
}

TEST(Distributions, CentralChi2Values) {
  EXPECT_NEAR(chi2_sf(2.0, 3), 0.5724, 5e-5);
  EXPECT_NEAR(chi2_sf(3.841458820694124, 1), 0.05, 1e-10);
  for (double dof : {1.0, 3.0, 9.0, 15.0, 99.0})
    for (double x : {0.5, 5.0, 20.0, 48.0, 150.0}) {
      boost::math::chi_squared_distribution<double> d(dof);
      const double sf = boost::math::cdf(boost::math::complement(d, x));
      EXPECT_NEAR(chi2_sf(x, dof), sf, 1e-12 + 1e-8 * sf);
      EXPECT_NEAR(chi2_cdf(x, dof), boost::math::cdf(d, x), 1e-12);
    }
}

TEST(Distributions, QuantileInvertsSurvival) {
  for (double dof : {1.0, 9.0, 99.0})
    for (double upper : {0.5, 0.05, 5e-8}) {
      boost::math::chi_squared_distribution<double> d(dof);
      const double q = boost::math::quantile(boost::math::complement(d, upper));
      EXPECT_NEAR(chi2_isf(upper, dof), q, 1e-7 * q);
    }
}

TEST(Distributions, NoncentralGridMatchesBoost) {
  for (double dof : {1.0, 3.0, 9.0})
    for (double lambda : {0.0, 1.0, 10.0, 100.0})
      for (double x : {0.5, 3.0, 12.0, 60.0, 140.0}) {
        const double cdf = noncentral_chi2_cdf(x, dof, lambda);
        double expect;
        if (lambda == 0.0) {
          expect = boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
        } else {
          expect = boost::math::cdf(boost::math::non_central_chi_squared_distribution<double>(dof, lambda), x);
        }
        EXPECT_NEAR(cdf, expect, 1e-9) << dof << " " << lambda << " " << x;
        EXPECT_NEAR(cdf + noncentral_chi2_sf(x, dof, lambda), 1.0, 1e-9);
      }
}

TEST(Distributions, ZeroNoncentralityIsCentral) {
  for (double x : {0.5, 4.0, 25.0}) EXPECT_NEAR(noncentral_chi2_sf(x, 3, 0.0), chi2_sf(x, 3), 1e-14);
}
