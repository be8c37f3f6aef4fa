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

#ifndef RCDP_ENVELOPE_HPP
#define RCDP_ENVELOPE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcdp {

enum class Estimator { kHutch, kHutchPlusPlus };

/// Raised when a numerical consistency check fails (monotonicity of a
/// computed CDF, mass outside a discretization range, exhausted supports).
class NumericalAlarm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvelopePoint {
  double x = 0.0;
  double F = 0.0;
};

// Discretized CDF of the envelope random variable Z^2 for a sketch-norm
// estimator: the pointwise supremum over eigenvalue configurations of the
// CDF of sum_i lambda_i chi^2(k)/k.  Below 1 the one-block (vertex)
// configuration attains the sup, above x_plus the balanced configuration
// does, and in between a two-block mixture searched by brute force.
struct EnvelopeGrid {
  std::int64_t k = 0;
  std::int64_t d = 0;
  Estimator estimator = Estimator::kHutch;
  double x_plus = 1.0;
  int n_lambda = 0;
  // Pairs (i, j) searched in the middle region are capped at
  // i + j <= pair_cap for very large d (0 means uncapped).
  std::int64_t pair_cap = 0;
  std::vector<EnvelopePoint> points;  // strictly increasing x, F nondecreasing

  /// CDF value by linear interpolation; clamps to the end values outside
  /// the grid (0 below the first point).
  double value_at(double x) const;

  /// Smallest grid x with F(x) >= q (linear interpolation between points).
  double quantile(double q) const;
};

struct MiddleRegionResult {
  std::int64_t i = 0;
  std::int64_t j = 0;
  double lambda = 0.0;  // weight on the i block, canonicalized so i <= j
  double F = 0.0;
};

/// Maximizes F(x; lambda/(ik) chi^2(ik) + (1-lambda)/(jk) chi^2(jk)) over
/// integer blocks 1 <= i + j <= d and lambda on a uniform grid, exploiting
/// the (i, j, lambda) <-> (j, i, 1-lambda) symmetry.  x must lie in (1, 2).
MiddleRegionResult middle_region_sup(double x, std::int64_t k, std::int64_t d,
                                     int n_lambda = 501);

/// Threshold above which the balanced configuration chi^2(kd)/(kd) attains
/// the envelope; bisection on [1, 2] that compares the best two-block value
/// against the balanced CDF, to bracket width tau.
double find_x_plus(std::int64_t k, std::int64_t d, double tau = 1e-4,
                   int n_lambda = 501);

/// Envelope grid for the Hutchinson estimator.  x_max <= 0 selects the
/// default max(3, x_plus + 1).  The base grid has n_grid cells and is
/// refined inside (1, x_plus) to spacing (x_plus - 1)/32.
EnvelopeGrid build_hutch_envelope(std::int64_t k, std::int64_t d,
                                  double x_min = 1e-4, double x_max = -1.0,
                                  int n_grid = 2048, int n_lambda = 501);

/// Pointwise envelope CDF for the head-aware sketch estimator:
/// max(F(x; chi^2(k)/k), step at 1).
double hutchpp_envelope(double x, std::int64_t k);

/// Grid form of the above (the step at 1 is represented by consecutive
/// points at 1 - eps and 1).
EnvelopeGrid build_hutchpp_envelope(std::int64_t k, double x_min = 1e-4,
                                    double x_max = 3.0, int n_grid = 2048);

/// Text format: "# envelope v1", "# estimator=<hutch|hutchpp>",
/// "# k=<int> d=<int> x_plus=<float> n_lambda=<int>", then "x,F" rows in
/// increasing x with 17 significant digits (bit-exact round-trip).
std::string serialize_envelope(const EnvelopeGrid& g);
EnvelopeGrid parse_envelope(const std::string& text);

}  // namespace rcdp

#endif  // RCDP_ENVELOPE_HPP
