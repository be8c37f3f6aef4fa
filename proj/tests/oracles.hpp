//
// Copyright 2026 The RCDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Test-only reference implementations.  These deliberately avoid the code
// paths used by the library (different series, different integration
// schemes) so they can serve as independent oracles.

#ifndef RCDP_TESTS_ORACLES_HPP
#define RCDP_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>

namespace oracles {

// ln Gamma via upward recurrence into the Stirling regime.  Independent of
// both std::lgamma and any Lanczos fit.
inline double lgamma_stirling(double x) {
  double shift = 0.0;
  while (x < 32.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      r * (1.0 / 12.0 +
           r2 * (-1.0 / 360.0 +
                 r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0)))));
  return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * M_PI) + series;
}

// erf by its Maclaurin series; fine for |z| <= 4.
inline double erf_series(double z) {
  const double z2 = z * z;
  double term = z;
  double sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z2 / n;
    sum += term / (2.0 * n + 1.0);
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum * 2.0 / std::sqrt(M_PI);
}

inline double std_normal_cdf_series(double x) {
  return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0)));
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol, int depth = 40) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flm = f(lmid), frm = f(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
      return left + right + (left + right - whole) / 15.0;
    }
    return rec(lo, mid, flo, fmid, flm, left, d - 1) +
           rec(mid, hi, fmid, fhi, frm, right, d - 1);
  };
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  return rec(a, b, fa, fb, fc, whole, depth);
}

// Regularized lower incomplete gamma by quadrature; the dof-1/2 singularity
// is removed with t = u^2.
inline double reg_lower_gamma_quadrature(double s, double x) {
  if (x <= 0.0) return 0.0;
  const double norm = std::exp(-lgamma_stirling(s));
  auto integrand = [&](double u) {
    const double t = u * u;
    return 2.0 * std::pow(u, 2.0 * s - 1.0) * std::exp(-t) * norm;
  };
  return adaptive_simpson(integrand, 0.0, std::sqrt(x), 1e-13);
}

}  // namespace oracles

#endif  // RCDP_TESTS_ORACLES_HPP
