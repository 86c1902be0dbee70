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

namespace vizrec {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
// Series below x = a + 1, Lentz continued fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
// x with chi2_sf(x, dof) = upper, found by bisection.
double chi2_isf(double upper, double dof);

// Poisson(lambda/2) mixture of central chi-square terms, truncated once the
// unvisited Poisson mass is below 1e-12.
double noncentral_chi2_cdf(double x, double dof, double noncentrality);
double noncentral_chi2_sf(double x, double dof, double noncentrality);

}  // namespace vizrec
