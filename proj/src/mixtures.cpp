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

#include "rcdp/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "rcdp/parallel.hpp"

namespace rcdp {

namespace {

constexpr double kWeightFloor = 1e-12;
constexpr double kTailMass = 1e-15;

// ---------------------------------------------------------------------------
// Gauss-Legendre rules for orders 8..64, built eagerly on first use so the
// hot quadrature path is lock-free.

struct GlRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

constexpr int kGlMin = 8;
constexpr int kGlMax = 64;

GlRule make_gl_rule(int n) {
  GlRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GlRule& gl_rule(int n) {
  static const std::vector<GlRule>* rules = [] {
    auto* r = new std::vector<GlRule>();
    r->reserve(kGlMax - kGlMin + 1);
    for (int n = kGlMin; n <= kGlMax; ++n) r->push_back(make_gl_rule(n));
    return r;
  }();
  n = std::clamp(n, kGlMin, kGlMax);
  return (*rules)[static_cast<std::size_t>(n - kGlMin)];
}

double chi2_cdf_direct(std::int64_t dof, double z) {
  if (z <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * static_cast<double>(dof), 0.5 * z);
}

double chi2_pdf_direct(std::int64_t dof, double z) {
  if (z <= 0.0) return dof == 2 ? 0.5 : 0.0;
  return 0.5 * gamma_pdf(0.5 * static_cast<double>(dof), 0.5 * z);
}

}  // namespace

double ScaledChiSqSum::mean() const {
  double m = 0.0;
  for (const auto& t : terms) m += t.weight * static_cast<double>(t.dof);
  return m;
}

double scaled_chi2_cdf(double x, double weight, std::int64_t dof) {
  if (!(weight > 0.0)) throw std::domain_error("scaled_chi2_cdf: weight must be > 0");
  if (dof < 1) throw std::domain_error("scaled_chi2_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return reg_lower_gamma(0.5 * static_cast<double>(dof), 0.5 * x / weight);
}

namespace detail {

double chi2_quantile(std::int64_t dof, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p in (0,1)");
  const double nu = static_cast<double>(dof);
  double hi = nu + 10.0 * std::sqrt(2.0 * nu) + 50.0;
  while (chi2_cdf_direct(dof, hi) < p) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf_direct(dof, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double Chi2Table::cdf_at(double z) const {
  if (z <= z_lo) return z <= 0.0 ? 0.0 : cdf.front();
  if (z >= z_hi) return cdf.back();
  const double u = (z - z_lo) * inv_dz;
  const std::size_t i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * cdf[i] + h01 * cdf[i + 1] + dz * (h10 * pdf[i] + h11 * pdf[i + 1]);
}

double Chi2Table::pdf_at(double z) const {
  if (z <= z_lo || z >= z_hi) return 0.0;
  const double u = (z - z_lo) * inv_dz;
  const std::size_t i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  const double shape_m1 = 0.5 * static_cast<double>(dof) - 1.0;
  const double z0 = z_lo + static_cast<double>(i) * dz;
  const double z1 = z0 + dz;
  const double d0 = pdf[i] * (shape_m1 / z0 - 0.5);
  const double d1 = pdf[i + 1] * (shape_m1 / z1 - 0.5);
  return h00 * pdf[i] + h01 * pdf[i + 1] + dz * (h10 * d0 + h11 * d1);
}

namespace {

std::mutex g_table_mutex;
std::unordered_map<std::int64_t, std::unique_ptr<const Chi2Table>> g_tables;

std::unique_ptr<const Chi2Table> build_chi2_table(std::int64_t dof) {
  constexpr int kPoints = 1537;
  auto table = std::make_unique<Chi2Table>();
  table->dof = dof;
  table->z_lo = chi2_quantile(dof, kTailMass);
  table->z_hi = chi2_quantile(dof, 1.0 - kTailMass);
  table->dz = (table->z_hi - table->z_lo) / (kPoints - 1);
  table->inv_dz = 1.0 / table->dz;
  table->cdf.resize(kPoints);
  table->pdf.resize(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    const double z = table->z_lo + i * table->dz;
    table->cdf[i] = chi2_cdf_direct(dof, z);
    table->pdf[i] = chi2_pdf_direct(dof, z);
  }
  return table;
}

}  // namespace

const Chi2Table* chi2_table(std::int64_t dof) {
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto it = g_tables.find(dof);
  if (it == g_tables.end()) {
    it = g_tables.emplace(dof, build_chi2_table(dof)).first;
  }
  return it->second.get();
}

void prewarm_chi2_tables(const std::vector<std::int64_t>& dofs) {
  for (auto dof : dofs) {
    if (dof >= 4) chi2_table(dof);
  }
}

}  // namespace detail

namespace {

using detail::Chi2Table;

enum class Transform { kLinear, kSqrtLeft, kSqrtRight };

// Integrand of the convolution: chi^2(nuA) density at v times the CDF of
// the other block at x - wA*v.  The B-side CDF comes from the cached table
// for dof >= 4 and from the regularized gamma directly otherwise.
struct ConvIntegrand {
  double x = 0.0;
  double wa = 0.0;
  double wb = 0.0;
  std::int64_t nu_a = 0;
  std::int64_t nu_b = 0;
  const Chi2Table* table_a = nullptr;  // null for nu_a <= 3
  const Chi2Table* table_b = nullptr;  // null for nu_b <= 3

  double pdf_a(double v) const {
    return table_a ? table_a->pdf_at(v) : chi2_pdf_direct(nu_a, v);
  }
  double cdf_b(double u) const {
    if (u <= 0.0) return 0.0;
    const double z = u / wb;
    return table_b ? table_b->cdf_at(z) : chi2_cdf_direct(nu_b, z);
  }
  double cdf_a(double v) const {
    return table_a ? table_a->cdf_at(v) : chi2_cdf_direct(nu_a, v);
  }
  double operator()(double v) const { return pdf_a(v) * cdf_b(x - wa * v); }
};

double integrate_piece(const ConvIntegrand& f, double lo, double hi, int n,
                       Transform tf) {
  const GlRule& rule = gl_rule(n);
  n = static_cast<int>(rule.nodes.size());
  double acc = 0.0;
  switch (tf) {
    case Transform::kLinear: {
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (int q = 0; q < n; ++q) {
        acc += rule.weights[q] * f(mid + half * rule.nodes[q]);
      }
      return acc * half;
    }
    case Transform::kSqrtLeft: {
      // v = lo + s^2 removes the density singularity at v = 0 (dof 1).
      const double smax = std::sqrt(hi - lo);
      const double mid = 0.5 * smax;
      for (int q = 0; q < n; ++q) {
        const double s = mid + mid * rule.nodes[q];
        acc += rule.weights[q] * 2.0 * s * f(lo + s * s);
      }
      return acc * mid;
    }
    case Transform::kSqrtRight: {
      // v = hi - s^2 removes the sqrt kink of the clipped B CDF (dof <= 3).
      const double smax = std::sqrt(hi - lo);
      const double mid = 0.5 * smax;
      for (int q = 0; q < n; ++q) {
        const double s = mid + mid * rule.nodes[q];
        acc += rule.weights[q] * 2.0 * s * f(hi - s * s);
      }
      return acc * mid;
    }
  }
  return acc;
}

int pick_node_count(double width, double feature) {
  if (feature <= 0.0) return 16;
  const double ratio = width / feature;
  const int n = 8 + static_cast<int>(std::ceil(3.0 * ratio));
  return std::clamp(n, 16, 64);
}

}  // namespace

namespace detail {

double two_term_cdf_tabled(double x, double w1, std::int64_t nu1,
                           const Chi2Table* t1, double w2, std::int64_t nu2,
                           const Chi2Table* t2) {
  if (nu1 < 1 || nu2 < 1) throw std::domain_error("two_term_cdf: dof must be >= 1");
  if (w1 < 0.0 || w2 < 0.0) throw std::domain_error("two_term_cdf: weights must be >= 0");
  if (w1 < kWeightFloor && w2 < kWeightFloor)
    throw std::domain_error("two_term_cdf: both weights are zero");
  if (w1 < kWeightFloor) return scaled_chi2_cdf(x, w2, nu2);
  if (w2 < kWeightFloor) return scaled_chi2_cdf(x, w1, nu1);
  if (x <= 0.0) return 0.0;

  // Integrate against the smaller-dof density; its CDF/PDF tables are only
  // used for dof >= 4 (below that the density needs the sqrt substitution).
  ConvIntegrand f;
  if (nu1 <= nu2) {
    f = ConvIntegrand{x, w1, w2, nu1, nu2, t1, t2};
  } else {
    f = ConvIntegrand{x, w2, w1, nu2, nu1, t2, t1};
  }

  // Effective support of the quadrature variable.
  double a_lo, a_hi;
  if (f.table_a) {
    a_lo = f.table_a->z_lo;
    a_hi = f.table_a->z_hi;
  } else {
    a_lo = 0.0;
    a_hi = detail::chi2_quantile(f.nu_a, 1.0 - kTailMass);
  }
  const double clip = x / f.wa;
  const bool clipped = clip < a_hi;
  if (clipped) a_hi = clip;
  if (a_hi <= a_lo) return 0.0;

  // The B-block CDF transitions while x - wa*v sweeps the B support; below
  // c1 it saturates at 1, above c2 it is 0.
  double b_zlo, b_zhi;
  if (f.table_b) {
    b_zlo = f.table_b->z_lo;
    b_zhi = f.table_b->z_hi;
  } else {
    b_zlo = 0.0;
    b_zhi = detail::chi2_quantile(f.nu_b, 1.0 - kTailMass);
  }
  const double c1 = (x - f.wb * b_zhi) / f.wa;
  const double c2 = (x - f.wb * b_zlo) / f.wa;

  std::vector<double> cuts;
  cuts.push_back(a_lo);
  if (c1 > a_lo && c1 < a_hi) cuts.push_back(c1);
  if (c2 > a_lo && c2 < a_hi) cuts.push_back(c2);
  cuts.push_back(a_hi);

  const double sigma_a = std::sqrt(2.0 * static_cast<double>(f.nu_a));
  const double trans_width = (f.wb / f.wa) * (b_zhi - b_zlo);

  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = cuts[p + 1];
    if (hi - lo <= 0.0) continue;
    if (lo >= c2) continue;  // F_B below kTailMass on the whole piece
    if (hi <= c1) {
      // F_B is 1 up to kTailMass here; the piece reduces to plain A mass.
      total += f.cdf_a(hi) - f.cdf_a(lo);
      continue;
    }
    const bool in_transition = lo < c2 && hi > c1;
    const double feature =
        in_transition ? std::min(sigma_a, std::max(trans_width / 8.0, 1e-300))
                      : sigma_a;
    int n = pick_node_count(hi - lo, feature);
    Transform tf = Transform::kLinear;
    if (f.nu_a <= 3 && lo == 0.0) {
      tf = Transform::kSqrtLeft;
      n = std::max(n, 48);
      if (f.nu_b <= 3 && clipped && hi == a_hi) {
        // Singular at both ends; split in the middle.
        const double mid = 0.5 * (lo + hi);
        total += integrate_piece(f, lo, mid, 48, Transform::kSqrtLeft);
        total += integrate_piece(f, mid, hi, 48, Transform::kSqrtRight);
        continue;
      }
    } else if (f.nu_b <= 3 && clipped && hi == a_hi) {
      tf = Transform::kSqrtRight;
      n = std::max(n, 48);
    }
    total += integrate_piece(f, lo, hi, n, tf);
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace detail

double two_term_cdf(double x, double w1, std::int64_t nu1, double w2,
                    std::int64_t nu2) {
  const detail::Chi2Table* t1 = nu1 >= 4 ? detail::chi2_table(nu1) : nullptr;
  const detail::Chi2Table* t2 = nu2 >= 4 ? detail::chi2_table(nu2) : nullptr;
  return detail::two_term_cdf_tabled(x, w1, nu1, t1, w2, nu2, t2);
}

double two_term_cdf(double x, const ScaledChiSqSum& sum) {
  if (sum.terms.size() != 2)
    throw std::domain_error("two_term_cdf: exactly two terms required");
  return two_term_cdf(x, sum.terms[0].weight, sum.terms[0].dof,
                      sum.terms[1].weight, sum.terms[1].dof);
}

McEstimate simplex_sum_cdf_mc(double x, const std::vector<double>& lambda,
                              std::int64_t k, std::size_t n,
                              const SeededStream& stream) {
  if (lambda.empty()) throw std::domain_error("simplex_sum_cdf_mc: empty lambda");
  if (k < 1) throw std::domain_error("simplex_sum_cdf_mc: k must be >= 1");
  if (n < 1000) throw std::domain_error("simplex_sum_cdf_mc: n must be >= 1000");
  double sum = 0.0;
  for (double v : lambda) {
    if (v < 0.0) throw std::domain_error("simplex_sum_cdf_mc: negative weight");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::domain_error("simplex_sum_cdf_mc: weights must sum to 1");

  // Fixed partition over sub-streams keeps the estimate independent of the
  // worker count.
  constexpr std::size_t kChunks = 128;
  const double inv_k = 1.0 / static_cast<double>(k);
  std::vector<std::size_t> hits(kChunks, 0);
  std::vector<std::size_t> counts(kChunks, 0);
  parallel_for(kChunks, [&](std::size_t c) {
    const std::size_t lo = n * c / kChunks;
    const std::size_t hi = n * (c + 1) / kChunks;
    SeededStream sub = stream.substream(0x5153u + c);
    std::size_t h = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      double acc = 0.0;
      for (double w : lambda) {
        if (w == 0.0) continue;
        acc += w * inv_k * sample_chi_squared(sub, static_cast<double>(k));
      }
      if (acc <= x) ++h;
    }
    hits[c] = h;
    counts[c] = hi - lo;
  });
  std::size_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  const double p = static_cast<double>(total_hits) / static_cast<double>(n);
  const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) /
                              static_cast<double>(n));
  return McEstimate{p, 1.96 * se, n};
}

}  // namespace rcdp
