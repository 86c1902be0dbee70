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

#include "vizrec/distributions.hpp"

#include <cmath>
#include <limits>

#include "vizrec/error.hpp"

namespace vizrec {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;
constexpr double kPoissonTail = 1e-12;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double series_p(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

double continued_fraction_q(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("incomplete gamma needs a > 0");
  if (std::isnan(x)) throw InvalidArgument("incomplete gamma argument is NaN");
}

template <typename Term>
double poisson_mixture(double noncentrality, Term term) {
  const double mu = 0.5 * noncentrality;
  if (mu == 0.0) return term(0);
  const auto mode = static_cast<long>(std::floor(mu));
  const double w_mode = std::exp(-mu + static_cast<double>(mode) * std::log(mu) - std::lgamma(mode + 1.0));

  double total = 0.0;
  double weight_seen = 0.0;
  double w = w_mode;
  for (long j = mode; j >= 0; --j) {
    total += w * term(j);
    weight_seen += w;
    if (w < kPoissonTail * 1e-4) break;
    w *= static_cast<double>(j) / mu;
  }
  w = w_mode;
  for (long j = mode + 1;; ++j) {
    w *= mu / static_cast<double>(j);
    total += w * term(j);
    weight_seen += w;
    if (1.0 - weight_seen < kPoissonTail || (w < kPoissonTail * 1e-4 && j > mode + 10) || j - mode > 1000000)
      break;
  }
  return total;
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return series_p(a, x);
  return 1.0 - continued_fraction_q(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - series_p(a, x);
  return continued_fraction_q(a, x);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("chi-square needs positive degrees of freedom");
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("chi-square needs positive degrees of freedom");
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_isf(double upper, double dof) {
  if (!(upper > 0.0 && upper < 1.0)) throw InvalidArgument("tail probability must lie in (0,1)");
  double lo = 0.0;
  double hi = dof + 10.0;
  while (chi2_sf(hi, dof) > upper) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_sf(mid, dof) > upper)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double noncentral_chi2_cdf(double x, double dof, double noncentrality) {
  if (!(noncentrality >= 0.0)) throw InvalidArgument("noncentrality must be non-negative");
  if (x <= 0.0) return 0.0;
  return poisson_mixture(noncentrality, [&](long j) { return chi2_cdf(x, dof + 2.0 * static_cast<double>(j)); });
}

double noncentral_chi2_sf(double x, double dof, double noncentrality) {
  if (!(noncentrality >= 0.0)) throw InvalidArgument("noncentrality must be non-negative");
  if (x <= 0.0) return 1.0;
  return poisson_mixture(noncentrality, [&](long j) { return chi2_sf(x, dof + 2.0 * static_cast<double>(j)); });
}

}  // namespace vizrec
