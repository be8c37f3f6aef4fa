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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rcdp/mixtures.hpp"
#include "rcdp/numerics.hpp"
#include "rcdp/parallel.hpp"

using rcdp::McEstimate;
using rcdp::ScaledChiSqSum;
using rcdp::ScaledChiSqTerm;
using rcdp::SeededStream;

TEST_CASE("scaled_chi2_cdf basics") {
  // P(chi^2_3 <= 4.5) ~ 0.7877 (weight 1, x = 4.5).
  CHECK(rcdp::scaled_chi2_cdf(4.5, 1.0, 3) == doctest::Approx(0.7877).epsilon(7e-4));
  CHECK(rcdp::scaled_chi2_cdf(-0.5, 1.0, 3) == 0.0);
  CHECK(rcdp::scaled_chi2_cdf(0.0, 2.0, 4) == 0.0);
  // CLT: CDF at the mean tends to 1/2.
  const std::int64_t nu = 10000;
  CHECK(rcdp::scaled_chi2_cdf(1.0, 1.0 / nu, nu) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::fabs(rcdp::scaled_chi2_cdf(1.0, 1.0 / nu, nu) - 0.5) < 0.01);
  CHECK_THROWS_AS(rcdp::scaled_chi2_cdf(1.0, 0.0, 3), std::domain_error);
  CHECK_THROWS_AS(rcdp::scaled_chi2_cdf(1.0, 1.0, 0), std::domain_error);
}

TEST_CASE("two_term_cdf Szekely fixture") {
  // 0.71 chi^2(1) + 0.145 chi^2(2) at 1.5.
  const double f = rcdp::two_term_cdf(1.5, 0.71, 1, 0.145, 2);
  CHECK(f == doctest::Approx(0.7961).epsilon(2e-3));
  CHECK(std::fabs(f - 0.7961) < 1e-3);
}

TEST_CASE("two_term_cdf degenerate weight delegates") {
  ScaledChiSqSum sum{{ScaledChiSqTerm{0.4, 6}, ScaledChiSqTerm{0.0, 2}}};
  CHECK(rcdp::two_term_cdf(2.0, sum) ==
        doctest::Approx(rcdp::scaled_chi2_cdf(2.0, 0.4, 6)).epsilon(1e-12));
  ScaledChiSqSum flipped{{ScaledChiSqTerm{0.0, 2}, ScaledChiSqTerm{0.4, 6}}};
  CHECK(rcdp::two_term_cdf(2.0, flipped) ==
        doctest::Approx(rcdp::scaled_chi2_cdf(2.0, 0.4, 6)).epsilon(1e-12));
}

TEST_CASE("two_term_cdf additivity collapse") {
  // w chi^2(a) + w chi^2(b) is exactly w chi^2(a+b).
  struct Case {
    double w;
    std::int64_t a, b;
  };
  for (const Case& c : std::vector<Case>{{0.5, 1, 1},
                                         {0.5, 2, 2},
                                         {0.25, 3, 5},
                                         {1.0 / 16, 8, 8},
                                         {1.0 / 64, 32, 32},
                                         {1.0 / 1024, 512, 512},
                                         {1.0 / 16384, 8192, 8192},
                                         {1.0 / 8192, 8192, 1024}}) {
    for (double x = 0.125; x <= 5.0; x += 0.125) {
      const double lhs = rcdp::two_term_cdf(x * c.w * (c.a + c.b), c.w, c.a, c.w, c.b);
      const double rhs = rcdp::scaled_chi2_cdf(x * c.w * (c.a + c.b), c.w, c.a + c.b);
      CHECK(std::fabs(lhs - rhs) <= 1e-6);
    }
  }
}

TEST_CASE("two_term_cdf tight additivity near the mean") {
  // The interesting envelope region sits near the mean; demand much better
  // than the 1e-6 contract there.
  for (std::int64_t half : {16, 256, 4096}) {
    const double w = 1.0 / static_cast<double>(2 * half);
    for (double x : {0.9, 0.999, 1.0, 1.001, 1.1}) {
      const double lhs = rcdp::two_term_cdf(x, w, half, w, half);
      const double rhs = rcdp::scaled_chi2_cdf(x, w, 2 * half);
      CHECK(std::fabs(lhs - rhs) <= 2e-8);
    }
  }
}

TEST_CASE("two_term_cdf asymmetric dofs against Monte Carlo") {
  SeededStream stream(555);
  struct Case {
    double w1;
    std::int64_t nu1;
    double w2;
    std::int64_t nu2;
    double x;
  };
  for (const Case& c : std::vector<Case>{
           {0.7, 1, 0.1, 3, 1.2},
           {0.05, 8, 0.01, 60, 1.1},
           {0.3 / 32.0, 32, (0.7 / 2016.0), 2016, 1.02},
           {0.45 / 32.0, 32, 0.55 / 8160.0, 8160, 0.99},
           {0.001, 50, 0.02, 12, 0.5}}) {
    const double got = rcdp::two_term_cdf(c.x, c.w1, c.nu1, c.w2, c.nu2);
    // MC oracle on the raw chi-squared pair.
    const std::size_t n = 400000;
    SeededStream sub = stream.substream(static_cast<std::uint64_t>(c.nu1 * 131 + c.nu2));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = c.w1 * rcdp::sample_chi_squared(sub, static_cast<double>(c.nu1)) +
                       c.w2 * rcdp::sample_chi_squared(sub, static_cast<double>(c.nu2));
      if (v <= c.x) ++hits;
    }
    const double mc = static_cast<double>(hits) / n;
    const double se = std::sqrt(mc * (1.0 - mc) / n) + 1e-9;
    CHECK(std::fabs(got - mc) <= 5.0 * se);
  }
}

TEST_CASE("two_term_cdf monotone and bounded") {
  for (auto [w1, nu1, w2, nu2] :
       std::vector<std::tuple<double, std::int64_t, double, std::int64_t>>{
           {0.71, 1, 0.145, 2}, {0.02, 32, 0.005, 96}, {0.4, 4, 0.2, 3}}) {
    double prev = 0.0;
    for (double x = -0.5; x <= 6.0; x += 0.03125) {
      const double v = rcdp::two_term_cdf(x, w1, nu1, w2, nu2);
      CHECK(v >= prev - 1e-9);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = std::max(prev, v);
    }
  }
}

TEST_CASE("simplex_sum_cdf_mc single-term and uniform reductions") {
  SeededStream stream(808);
  const std::int64_t k = 4;
  const double x = 1.3;

  std::vector<double> vertex{1.0, 0.0, 0.0};
  McEstimate mc1 = rcdp::simplex_sum_cdf_mc(x, vertex, k, 40000, stream);
  const double exact1 = rcdp::scaled_chi2_cdf(x, 1.0 / k, k);
  CHECK(std::fabs(mc1.value - exact1) <= mc1.ci95_halfwidth * 1.6);

  std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
  McEstimate mc2 = rcdp::simplex_sum_cdf_mc(x, uniform, k, 40000, stream.substream(9));
  const double exact2 = rcdp::scaled_chi2_cdf(x, 1.0 / (4.0 * k), 4 * k);
  CHECK(std::fabs(mc2.value - exact2) <= mc2.ci95_halfwidth * 1.6);
}

TEST_CASE("simplex_sum_cdf_mc matches the Szekely mixture") {
  SeededStream stream(4040);
  std::vector<double> lambda{0.71, 0.145, 0.145};
  McEstimate mc = rcdp::simplex_sum_cdf_mc(1.5, lambda, 1, 200000, stream);
  CHECK(std::fabs(mc.value - 0.7961) <= mc.ci95_halfwidth + 1e-3);
}

TEST_CASE("simplex_sum_cdf_mc validates inputs and has mean one") {
  SeededStream stream(11);
  std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(rcdp::simplex_sum_cdf_mc(1.0, bad, 4, 5000, stream),
                  std::domain_error);
  std::vector<double> neg{1.5, -0.5};
  CHECK_THROWS_AS(rcdp::simplex_sum_cdf_mc(1.0, neg, 4, 5000, stream),
                  std::domain_error);
  std::vector<double> ok{0.6, 0.4};
  CHECK_THROWS_AS(rcdp::simplex_sum_cdf_mc(1.0, ok, 4, 10, stream),
                  std::domain_error);

  // E[X(lambda)] = 1: the CDF at the mean is strictly inside (0, 1) and the
  // MC mean over draws is close to 1.
  SeededStream sub = stream.substream(77);
  double mean = 0.0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    mean += 0.6 * rcdp::sample_chi_squared(sub, 4.0) / 4.0 +
            0.4 * rcdp::sample_chi_squared(sub, 4.0) / 4.0;
  }
  CHECK(mean / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("simplex_sum_cdf_mc deterministic under thread count") {
  SeededStream stream(31);
  std::vector<double> lambda{0.5, 0.3, 0.2};
  const std::size_t saved = rcdp::max_threads();
  McEstimate a = rcdp::simplex_sum_cdf_mc(1.1, lambda, 8, 20000, stream);
  rcdp::set_max_threads(1);
  McEstimate b = rcdp::simplex_sum_cdf_mc(1.1, lambda, 8, 20000, stream);
  rcdp::set_max_threads(saved);
  CHECK(a.value == b.value);
}
