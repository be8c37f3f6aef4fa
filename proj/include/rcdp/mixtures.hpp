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

#ifndef RCDP_MIXTURES_HPP
#define RCDP_MIXTURES_HPP

#include <cstdint>
#include <vector>

#include "rcdp/numerics.hpp"

namespace rcdp {

/// One summand w * chi^2(dof) of a scaled chi-squared sum.
struct ScaledChiSqTerm {
  double weight = 0.0;
  std::int64_t dof = 0;
};

/// Sum of independent scaled chi-squared variables; mean = sum w_j * dof_j.
struct ScaledChiSqSum {
  std::vector<ScaledChiSqTerm> terms;
  double mean() const;
};

/// P[w * chi^2(dof) <= x]; 0 for x < 0.
double scaled_chi2_cdf(double x, double weight, std::int64_t dof);

/// CDF of w1 * chi^2(nu1) + w2 * chi^2(nu2).  One-dimensional quadrature
/// of the convolution integral against the lower-dof density, restricted
/// to the effective support of both factors and split at the CDF
/// transition of the other factor; endpoint square-root singularities
/// (dof 1 density, dof <= 3 CDF at the clipped edge) are removed by a
/// quadratic substitution.  Absolute error well below the 1e-6 contract.
double two_term_cdf(double x, double w1, std::int64_t nu1, double w2,
                    std::int64_t nu2);

/// Same on a two-term ScaledChiSqSum; a weight below 1e-12 delegates to
/// scaled_chi2_cdf on the other term.
double two_term_cdf(double x, const ScaledChiSqSum& sum);

struct McEstimate {
  double value = 0.0;
  double ci95_halfwidth = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of P[sum_i lambda_i chi^2(k)/k <= x] with a 95%
/// binomial CI.  lambda must lie on the simplex within 1e-9.  Sampling is
/// split over a fixed number of sub-streams so the result is independent
/// of worker count.
McEstimate simplex_sum_cdf_mc(double x, const std::vector<double>& lambda,
                              std::int64_t k, std::size_t n,
                              const SeededStream& stream);

namespace detail {

/// Tabulated CDF/PDF of chi^2(dof) over its effective support
/// [quantile(1e-15), quantile(1-1e-15)]; cubic Hermite between grid
/// points with the density as exact derivative.  Tables are cached per
/// dof and shared (thread-safe).
struct Chi2Table {
  std::int64_t dof = 0;
  double z_lo = 0.0;
  double z_hi = 0.0;
  double dz = 0.0;
  double inv_dz = 0.0;
  std::vector<double> cdf;
  std::vector<double> pdf;

  double cdf_at(double z) const;
  double pdf_at(double z) const;
};

const Chi2Table* chi2_table(std::int64_t dof);

/// Builds any missing tables for the given dofs serially; call before
/// parallel sweeps so workers only read the cache.
void prewarm_chi2_tables(const std::vector<std::int64_t>& dofs);

/// Quantile of chi^2(dof) by bisection on the regularized gamma CDF.
double chi2_quantile(std::int64_t dof, double p);

/// Core of two_term_cdf with caller-supplied tables (null for dof <= 3).
/// Lock-free; sweeps that evaluate many (x, lambda) for fixed dofs fetch
/// the tables once and call this directly.
double two_term_cdf_tabled(double x, double w1, std::int64_t nu1,
                           const Chi2Table* t1, double w2, std::int64_t nu2,
                           const Chi2Table* t2);

}  // namespace detail

}  // namespace rcdp

#endif  // RCDP_MIXTURES_HPP
