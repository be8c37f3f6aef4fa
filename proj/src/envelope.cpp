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

#include "rcdp/envelope.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rcdp/mixtures.hpp"
#include "rcdp/parallel.hpp"

namespace rcdp {

namespace {

using detail::Chi2Table;

constexpr std::int64_t kPairCapThreshold = 512;
constexpr std::int64_t kPairCap = 256;
// Slack for comparing quadrature-evaluated two-block CDFs against the
// directly evaluated balanced CDF in the x_plus search.
constexpr double kUniformSlack = 1e-8;

struct BlockPair {
  std::int64_t i;
  std::int64_t j;
};

std::int64_t effective_pair_cap(std::int64_t d) {
  return d >= kPairCapThreshold ? std::min(d, kPairCap) : 0;
}

// Ordered pairs (i, j), i, j >= 1, i + j <= d; lambda in [0, 0.5] on the i
// block covers the full family through the (i, j, l) <-> (j, i, 1-l)
// symmetry.  For d >= 512 the sum is capped, keeping the exact boundary
// configurations (1, d-1) and the balanced split.
std::vector<BlockPair> enumerate_pairs(std::int64_t d) {
  std::vector<BlockPair> pairs;
  const std::int64_t cap = effective_pair_cap(d);
  const std::int64_t limit = cap > 0 ? cap : d;
  for (std::int64_t i = 1; i < limit; ++i) {
    for (std::int64_t j = 1; i + j <= limit; ++j) {
      pairs.push_back({i, j});
    }
  }
  if (cap > 0) {
    const std::int64_t half_up = (d + 1) / 2;
    const std::int64_t half_down = d / 2;
    pairs.push_back({1, d - 1});
    pairs.push_back({d - 1, 1});
    pairs.push_back({half_up, half_down});
    if (half_up != half_down) pairs.push_back({half_down, half_up});
  }
  return pairs;
}

std::vector<std::int64_t> pair_dofs(const std::vector<BlockPair>& pairs,
                                    std::int64_t k) {
  std::vector<std::int64_t> dofs;
  dofs.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    dofs.push_back(p.i * k);
    dofs.push_back(p.j * k);
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

const Chi2Table* table_or_null(std::int64_t dof) {
  return dof >= 4 ? detail::chi2_table(dof) : nullptr;
}

// Best CDF over the lambda grid for one (i, j) pair at a fixed x.
// lambda = 0 is the pure j-block configuration; two_term_cdf delegates it.
struct PairBest {
  double F = -1.0;
  int lambda_idx = 0;
};

PairBest sweep_lambda(double x, std::int64_t k, const BlockPair& p,
                      const Chi2Table* ti, const Chi2Table* tj, int n_lambda) {
  PairBest best;
  const double nui = static_cast<double>(p.i * k);
  const double nuj = static_cast<double>(p.j * k);
  for (int t = 0; t < n_lambda; ++t) {
    const double lam = 0.5 * static_cast<double>(t) / (n_lambda - 1);
    const double f = detail::two_term_cdf_tabled(x, lam / nui, p.i * k, ti,
                                                 (1.0 - lam) / nuj, p.j * k, tj);
    if (f > best.F) {
      best.F = f;
      best.lambda_idx = t;
    }
  }
  return best;
}

struct FamilyContext {
  std::int64_t k = 0;
  std::int64_t d = 0;
  int n_lambda = 0;
  std::vector<BlockPair> pairs;
  std::vector<const Chi2Table*> ti;
  std::vector<const Chi2Table*> tj;
};

FamilyContext make_family(std::int64_t k, std::int64_t d, int n_lambda) {
  FamilyContext ctx;
  ctx.k = k;
  ctx.d = d;
  ctx.n_lambda = n_lambda;
  ctx.pairs = enumerate_pairs(d);
  detail::prewarm_chi2_tables(pair_dofs(ctx.pairs, k));
  ctx.ti.resize(ctx.pairs.size());
  ctx.tj.resize(ctx.pairs.size());
  for (std::size_t idx = 0; idx < ctx.pairs.size(); ++idx) {
    ctx.ti[idx] = table_or_null(ctx.pairs[idx].i * k);
    ctx.tj[idx] = table_or_null(ctx.pairs[idx].j * k);
  }
  return ctx;
}

MiddleRegionResult family_sup(const FamilyContext& ctx, double x) {
  struct Slot {
    PairBest best;
    std::size_t pair_idx = 0;
    bool valid = false;
  };
  const std::size_t n = ctx.pairs.size();
  const std::size_t chunks = std::min<std::size_t>(n, max_threads() * 16);
  std::vector<Slot> slots(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    Slot slot;
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const PairBest b =
          sweep_lambda(x, ctx.k, ctx.pairs[idx], ctx.ti[idx], ctx.tj[idx],
                       ctx.n_lambda);
      if (!slot.valid || b.F > slot.best.F) {
        slot.best = b;
        slot.pair_idx = idx;
        slot.valid = true;
      }
    }
    slots[c] = slot;
  });
  Slot overall;
  for (const Slot& s : slots) {
    if (!s.valid) continue;
    if (!overall.valid || s.best.F > overall.best.F) overall = s;
  }
  const BlockPair p = ctx.pairs[overall.pair_idx];
  double lam = 0.5 * static_cast<double>(overall.best.lambda_idx) /
               (ctx.n_lambda - 1);
  MiddleRegionResult res;
  // Canonical form: i <= j with lambda the weight on the i block.
  if (p.i <= p.j) {
    res = {p.i, p.j, lam, overall.best.F};
  } else {
    res = {p.j, p.i, 1.0 - lam, overall.best.F};
  }
  return res;
}

// True if some two-block configuration strictly exceeds the balanced CDF
// at x (then x < x_plus).  Early exit across workers is only an
// optimization: the existence answer does not depend on scan order.
bool family_exceeds_uniform(const FamilyContext& ctx, double x) {
  const double f_unif = scaled_chi2_cdf(
      x, 1.0 / static_cast<double>(ctx.k * ctx.d), ctx.k * ctx.d);
  const double threshold = f_unif + kUniformSlack;
  const std::size_t n = ctx.pairs.size();
  const std::size_t chunks = std::min<std::size_t>(n, max_threads() * 16);
  std::atomic<bool> found{false};
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    for (std::size_t idx = lo; idx < hi && !found.load(std::memory_order_relaxed);
         ++idx) {
      const BlockPair& p = ctx.pairs[idx];
      const double nui = static_cast<double>(p.i * ctx.k);
      const double nuj = static_cast<double>(p.j * ctx.k);
      for (int t = 0; t < ctx.n_lambda; ++t) {
        const double lam = 0.5 * static_cast<double>(t) / (ctx.n_lambda - 1);
        const double f = detail::two_term_cdf_tabled(
            x, lam / nui, p.i * ctx.k, ctx.ti[idx], (1.0 - lam) / nuj,
            p.j * ctx.k, ctx.tj[idx]);
        if (f > threshold) {
          found.store(true, std::memory_order_relaxed);
          return;
        }
      }
    }
  });
  return found.load();
}

}  // namespace

double EnvelopeGrid::value_at(double x) const {
  if (points.empty()) return 0.0;
  if (x <= points.front().x) return x <= 0.0 ? 0.0 : std::min(points.front().F, 1.0);
  if (x >= points.back().x) return points.back().F;
  auto it = std::lower_bound(points.begin(), points.end(), x,
                             [](const EnvelopePoint& p, double v) { return p.x < v; });
  const EnvelopePoint& hi = *it;
  const EnvelopePoint& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.F + t * (hi.F - lo.F);
}

double EnvelopeGrid::quantile(double q) const {
  if (points.empty()) throw std::invalid_argument("quantile: empty grid");
  if (q <= points.front().F) return points.front().x;
  if (q >= points.back().F) return points.back().x;
  auto it = std::lower_bound(points.begin(), points.end(), q,
                             [](const EnvelopePoint& p, double v) { return p.F < v; });
  const EnvelopePoint& hi = *it;
  const EnvelopePoint& lo = *(it - 1);
  if (hi.F <= lo.F) return hi.x;
  const double t = (q - lo.F) / (hi.F - lo.F);
  return lo.x + t * (hi.x - lo.x);
}

MiddleRegionResult middle_region_sup(double x, std::int64_t k, std::int64_t d,
                                     int n_lambda) {
  if (k < 1 || d < 1) throw std::domain_error("middle_region_sup: k, d >= 1");
  if (!(x > 1.0 && x < 2.0))
    throw std::domain_error("middle_region_sup: x must lie in (1, 2)");
  if (n_lambda < 101) throw std::domain_error("middle_region_sup: n_lambda >= 101");
  if (d == 1) {
    return MiddleRegionResult{1, 0, 1.0,
                              scaled_chi2_cdf(x, 1.0 / static_cast<double>(k), k)};
  }
  FamilyContext ctx = make_family(k, d, n_lambda);
  return family_sup(ctx, x);
}

double find_x_plus(std::int64_t k, std::int64_t d, double tau, int n_lambda) {
  if (k < 1 || d < 1) throw std::domain_error("find_x_plus: k, d >= 1");
  if (!(tau > 0.0 && tau <= 1e-2))
    throw std::domain_error("find_x_plus: tau must lie in (0, 1e-2]");
  if (d == 1) return 1.0;
  FamilyContext ctx = make_family(k, d, n_lambda);
  double lo = 1.0;
  double hi = 2.0;
  while (hi - lo > tau) {
    const double mid = 0.5 * (lo + hi);
    if (family_exceeds_uniform(ctx, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EnvelopeGrid build_hutch_envelope(std::int64_t k, std::int64_t d, double x_min,
                                  double x_max, int n_grid, int n_lambda) {
  if (k < 1 || d < 1) throw std::domain_error("build_hutch_envelope: k, d >= 1");
  if (n_grid < 64) throw std::domain_error("build_hutch_envelope: n_grid >= 64");
  const double x_plus = find_x_plus(k, d, 1e-4, n_lambda);
  if (x_max <= 0.0) x_max = std::max(3.0, x_plus + 1.0);
  if (!(x_min >= 0.0 && x_min < 1.0 && x_max > 1.0))
    throw std::domain_error("build_hutch_envelope: need 0 <= x_min < 1 < x_max");

  const double dx = (x_max - x_min) / n_grid;
  std::vector<double> xs;
  xs.reserve(n_grid + 64);
  for (int i = 0; i <= n_grid; ++i) xs.push_back(x_min + i * dx);
  xs.push_back(1.0);
  if (x_plus < x_max) xs.push_back(x_plus);
  const double fine = std::min(dx, (x_plus - 1.0) / 32.0);
  if (fine > 0.0) {
    for (double x = 1.0 + fine; x < std::min(x_plus, x_max); x += fine)
      xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  EnvelopeGrid grid;
  grid.k = k;
  grid.d = d;
  grid.estimator = Estimator::kHutch;
  grid.x_plus = x_plus;
  grid.n_lambda = n_lambda;
  grid.pair_cap = effective_pair_cap(d);
  grid.points.resize(xs.size());

  const double inv_k = 1.0 / static_cast<double>(k);
  const double inv_kd = 1.0 / static_cast<double>(k * d);
  FamilyContext ctx;
  bool have_ctx = false;
  for (std::size_t idx = 0; idx < xs.size(); ++idx) {
    const double x = xs[idx];
    double f;
    if (x <= 1.0 || d == 1) {
      f = x <= 0.0 ? 0.0 : scaled_chi2_cdf(x, inv_k, k);
    } else if (x >= x_plus) {
      f = scaled_chi2_cdf(x, inv_kd, k * d);
    } else {
      if (!have_ctx) {
        ctx = make_family(k, d, n_lambda);
        have_ctx = true;
      }
      f = family_sup(ctx, x).F;
    }
    grid.points[idx] = EnvelopePoint{x, f};
  }

  // The envelope is nondecreasing; enforce with a running max and treat a
  // real violation as an optimizer/quadrature bug.
  double run = 0.0;
  for (auto& p : grid.points) {
    if (p.F < run - 1e-6) {
      throw NumericalAlarm("build_hutch_envelope: envelope decreased by more than 1e-6");
    }
    run = std::max(run, p.F);
    p.F = std::min(run, 1.0);
  }
  return grid;
}

double hutchpp_envelope(double x, std::int64_t k) {
  if (k < 1) throw std::domain_error("hutchpp_envelope: k >= 1");
  if (x < 0.0) return 0.0;
  const double base = x <= 0.0 ? 0.0 : scaled_chi2_cdf(x, 1.0 / static_cast<double>(k), k);
  return x >= 1.0 ? 1.0 : base;
}

EnvelopeGrid build_hutchpp_envelope(std::int64_t k, double x_min, double x_max,
                                    int n_grid) {
  if (k < 1) throw std::domain_error("build_hutchpp_envelope: k >= 1");
  if (n_grid < 64) throw std::domain_error("build_hutchpp_envelope: n_grid >= 64");
  if (!(x_min >= 0.0 && x_min < 1.0 && x_max > 1.0))
    throw std::domain_error("build_hutchpp_envelope: need 0 <= x_min < 1 < x_max");
  std::vector<double> xs;
  const double dx = (x_max - x_min) / n_grid;
  for (int i = 0; i <= n_grid; ++i) xs.push_back(x_min + i * dx);
  // Straddle the step at 1 so interpolation reproduces the jump.
  xs.push_back(std::nextafter(1.0, 0.0));
  xs.push_back(1.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  EnvelopeGrid grid;
  grid.k = k;
  grid.d = 0;
  grid.estimator = Estimator::kHutchPlusPlus;
  grid.x_plus = 1.0;
  grid.n_lambda = 0;
  grid.points.reserve(xs.size());
  for (double x : xs) grid.points.push_back(EnvelopePoint{x, hutchpp_envelope(x, k)});
  return grid;
}

std::string serialize_envelope(const EnvelopeGrid& g) {
  std::string out;
  out.reserve(g.points.size() * 48 + 128);
  char buf[128];
  out += "# envelope v1\n";
  out += g.estimator == Estimator::kHutch ? "# estimator=hutch\n"
                                          : "# estimator=hutchpp\n";
  std::snprintf(buf, sizeof(buf), "# k=%lld d=%lld x_plus=%.17g n_lambda=%d\n",
                static_cast<long long>(g.k), static_cast<long long>(g.d),
                g.x_plus, g.n_lambda);
  out += buf;
  if (g.pair_cap > 0) {
    std::snprintf(buf, sizeof(buf), "# pair_cap=%lld\n",
                  static_cast<long long>(g.pair_cap));
    out += buf;
  }
  for (const auto& p : g.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.x, p.F);
    out += buf;
  }
  return out;
}

EnvelopeGrid parse_envelope(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  EnvelopeGrid g;
  if (!std::getline(in, line) || line != "# envelope v1")
    throw std::runtime_error("parse_envelope: missing '# envelope v1' header");
  if (!std::getline(in, line))
    throw std::runtime_error("parse_envelope: missing estimator header");
  if (line == "# estimator=hutch") {
    g.estimator = Estimator::kHutch;
  } else if (line == "# estimator=hutchpp") {
    g.estimator = Estimator::kHutchPlusPlus;
  } else {
    throw std::runtime_error("parse_envelope: bad estimator header: " + line);
  }
  if (!std::getline(in, line))
    throw std::runtime_error("parse_envelope: missing parameter header");
  {
    long long k = 0, d = 0;
    double x_plus = 0.0;
    int n_lambda = 0;
    if (std::sscanf(line.c_str(), "# k=%lld d=%lld x_plus=%lg n_lambda=%d", &k, &d,
                    &x_plus, &n_lambda) != 4) {
      throw std::runtime_error("parse_envelope: bad parameter header: " + line);
    }
    if (k < 1 || d < 0 || n_lambda < 0 || !(x_plus >= 1.0 && x_plus <= 2.0))
      throw std::runtime_error("parse_envelope: parameter header out of range");
    g.k = k;
    g.d = d;
    g.x_plus = x_plus;
    g.n_lambda = n_lambda;
  }
  double prev_x = -std::numeric_limits<double>::infinity();
  double prev_f = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      long long cap = 0;
      if (std::sscanf(line.c_str(), "# pair_cap=%lld", &cap) == 1) g.pair_cap = cap;
      continue;
    }
    double x = 0.0, f = 0.0;
    if (std::sscanf(line.c_str(), "%lg,%lg", &x, &f) != 2)
      throw std::runtime_error("parse_envelope: bad row: " + line);
    if (!(x > prev_x)) throw std::runtime_error("parse_envelope: x not increasing");
    if (f < prev_f - 1e-12 || f < 0.0 || f > 1.0)
      throw std::runtime_error("parse_envelope: F not a nondecreasing CDF");
    g.points.push_back(EnvelopePoint{x, f});
    prev_x = x;
    prev_f = std::max(prev_f, f);
  }
  if (g.points.empty()) throw std::runtime_error("parse_envelope: no points");
  return g;
}

}  // namespace rcdp
