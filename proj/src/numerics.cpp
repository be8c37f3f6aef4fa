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

#include "rcdp/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rcdp {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogTwoPi = 1.8378770664093454836;

// Stirling series remainder: ln Gamma(s) - [(s - 1/2) ln s - s + ln(2 pi)/2].
double stirling_remainder(double s) {
  const double r = 1.0 / s;
  const double r2 = r * r;
  // 1/(12 s) - 1/(360 s^3) + 1/(1260 s^5) - 1/(1680 s^7) + 1/(1188 s^9)
  return r *
         (8.3333333333333333e-2 +
          r2 * (-2.7777777777777778e-3 +
                r2 * (7.9365079365079365e-4 +
                      r2 * (-5.9523809523809524e-4 + r2 * 8.4175084175084175e-4))));
}

// ln( x^s e^{-x} / Gamma(s) ), stable for large s where s*ln(x) - x and
// ln Gamma(s) individually reach 1e7 and would cancel to noise.
double log_gamma_prefactor(double s, double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (s < 64.0) return s * std::log(x) - x - std::lgamma(s);
  const double t = (x - s) / s;
  // s*(log1p(t) - t) = s*ln(x/s) + s - x, computed without cancellation.
  return s * (std::log1p(t) - t) + 0.5 * (std::log(s) - kLogTwoPi) -
         stirling_remainder(s);
}

// Upper continued fraction (modified Lentz).  Returns Q(s, x); needs
// x >= s + 1 for fast convergence.
double gamma_q_cf(double s, double x) {
  constexpr double kFpMin = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  const std::size_t max_iter =
      1000 + static_cast<std::size_t>(12.0 * std::sqrt(s > x ? s : x));
  for (std::size_t i = 1; i <= max_iter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-17) break;
  }
  return std::exp(log_gamma_prefactor(s, x)) * h;
}

inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be > 0");
  return std::lgamma(x);
}

double reg_lower_gamma(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("reg_lower_gamma: s must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("reg_lower_gamma: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    const std::size_t max_iter =
        1000 + static_cast<std::size_t>(12.0 * std::sqrt(s > x ? s : x));
    for (std::size_t i = 0; i < max_iter; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
    }
    const double p = sum * std::exp(log_gamma_prefactor(s, x));
    return p < 1.0 ? p : 1.0;
  }
  const double q = gamma_q_cf(s, x);
  const double p = 1.0 - q;
  return p > 0.0 ? (p < 1.0 ? p : 1.0) : 0.0;
}

double reg_upper_gamma(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("reg_upper_gamma: s must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("reg_upper_gamma: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x >= s + 1.0) {
    const double q = gamma_q_cf(s, x);
    return q > 0.0 ? (q < 1.0 ? q : 1.0) : 0.0;
  }
  return 1.0 - reg_lower_gamma(s, x);
}

double gamma_pdf(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("gamma_pdf: s must be > 0");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (s > 1.0) return 0.0;
    if (s == 1.0) return 1.0;
    return std::numeric_limits<double>::infinity();
  }
  return std::exp(log_gamma_prefactor(s, x)) / x;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

std::uint64_t SeededStream::next_u64() {
  ++counter_;
  return splitmix_finalize(seed_ + counter_ * kWeyl);
}

double SeededStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

SeededStream SeededStream::substream(std::uint64_t id) const {
  const std::uint64_t child =
      splitmix_finalize(seed_ ^ splitmix_finalize(id * kWeyl + 0x632BE59BD9B4E019ULL));
  return SeededStream(child);
}

std::vector<double> sample_gaussian(SeededStream& stream, double mean,
                                    double stddev, std::size_t count) {
  if (stddev < 0.0) throw std::domain_error("sample_gaussian: stddev must be >= 0");
  std::vector<double> out(count);
  if (stddev == 0.0) {
    for (auto& v : out) v = mean;
    return out;
  }
  for (auto& v : out) v = mean + stddev * stream.next_gaussian();
  return out;
}

double sample_gamma(SeededStream& stream, double shape) {
  if (!(shape > 0.0)) throw std::domain_error("sample_gamma: shape must be > 0");
  if (shape < 1.0) {
    const double u = stream.next_uniform();
    return sample_gamma(stream, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.next_gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_chi_squared(SeededStream& stream, double dof) {
  return 2.0 * sample_gamma(stream, dof / 2.0);
}

}  // namespace rcdp
