#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "core.hpp"

namespace skorokhod {

struct Minimum1D {
  double x = 0.0;
  double f = kInf;
};

template <class F>
Minimum1D golden_section(F&& f, double lo, double hi, double tol = 1e-10, int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Minimum1D best{c, fc};
  if (fd < best.f) best = {d, fd};
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < best.f) best = {x, fx};
  }
  return best;
}

struct MinimumND {
  std::vector<double> x;
  double f = kInf;
};

// Nelder-Mead with standard coefficients. Infinite values act as walls.
template <class F>
MinimumND nelder_mead(F&& f, std::vector<double> x0, double step, double ftol = 1e-10, int max_iter = 4000) {
  const std::size_t n = x0.size();
  if (n == 0) return {x0, f(x0)};
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::isfinite(val[worst]) && std::abs(val[worst] - val[best]) <= ftol * (1.0 + std::abs(val[best]))) {
      double size = 0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(pts[i][j] - pts[best][j]));
      if (size < 1e-9) break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (pts[worst][j] - centroid[j]);
      return p;
    };
    auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < val[best]) {
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr;
      val[worst] = fr;
      continue;
    }
    auto xc = fr < val[worst] ? along(-0.5) : along(0.5);
    const double fcv = f(xc);
    if (fcv < std::min(fr, val[worst])) {
      pts[worst] = xc;
      val[worst] = fcv;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      val[i] = f(pts[i]);
    }
  }
  const auto it = std::min_element(val.begin(), val.end());
  return {pts[static_cast<std::size_t>(it - val.begin())], *it};
}

struct SimplexMinimum {
  std::vector<double> t;  // weights on the simplex, t_i = 1/a_i
  double value = kInf;    // objective at t
};

namespace detail {

inline void compositions(std::size_t parts, std::size_t total, std::vector<std::size_t>& cur,
                         std::vector<std::vector<double>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (cur.size() + 1 == parts) {
    if (total == 0) return;
    std::vector<double> t;
    std::size_t sum = 0;
    for (auto c : cur) sum += c;
    const double r = static_cast<double>(sum + total);
    for (auto c : cur) t.push_back(static_cast<double>(c) / r);
    t.push_back(static_cast<double>(total) / r);
    out.push_back(std::move(t));
    return;
  }
  for (std::size_t c = 1; c + (parts - cur.size() - 1) <= total; ++c) {
    cur.push_back(c);
    compositions(parts, total - c, cur, out, cap);
    cur.pop_back();
  }
}

}  // namespace detail

// Minimizes objective(t) over {t_i > 0, sum t = 1, lo_i <= t_i <= hi_i}.
// Grid seeds (resolution 16 for k <= 3), one always-feasible interpolated
// point, then local refinement. Infeasible t are never passed to the objective.
template <class F>
SimplexMinimum minimize_on_simplex(std::size_t k, F&& objective, std::vector<double> lo = {},
                                   std::vector<double> hi = {}, double tol = 1e-6) {
  if (k == 0) throw ArgumentError("minimize_on_simplex: empty index set");
  if (lo.empty()) lo.assign(k, 0.0);
  if (hi.empty()) hi.assign(k, 1.0);
  if (lo.size() != k || hi.size() != k) throw ArgumentError("minimize_on_simplex: bound size mismatch");
  const double slo = std::accumulate(lo.begin(), lo.end(), 0.0);
  const double shi = std::accumulate(hi.begin(), hi.end(), 0.0);
  SimplexMinimum best;
  if (slo > 1.0 + 1e-12 || shi < 1.0 - 1e-12) return best;

  auto feasible = [&](const std::vector<double>& t) {
    for (std::size_t i = 0; i < k; ++i)
      if (!(t[i] > 0) || t[i] < lo[i] - 1e-15 || t[i] > hi[i] + 1e-15) return false;
    return true;
  };
  auto eval = [&](const std::vector<double>& t) { return feasible(t) ? objective(t) : kInf; };
  auto consider = [&](const std::vector<double>& t) {
    const double v = eval(t);
    if (best.t.empty() || v < best.value) best = {t, v};
  };

  if (k == 1) {
    best = {{1.0}, eval({1.0})};
    return best;
  }

  std::vector<double> interp(k);
  const double lam = shi > slo ? (1.0 - slo) / (shi - slo) : 0.0;
  for (std::size_t i = 0; i < k; ++i) interp[i] = lo[i] + lam * (hi[i] - lo[i]);
  consider(interp);
  if (best.value == -kInf) return best;

  std::vector<std::vector<double>> seeds;
  const std::size_t res = k <= 3 ? 16 : k + 4;
  std::vector<std::size_t> cur;
  if (k <= 16) detail::compositions(k, res, cur, seeds, 5000);
  seeds.push_back(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  for (const auto& s : seeds) {
    consider(s);
    if (best.value == -kInf) return best;
  }
  if (!std::isfinite(best.value)) return best;

  if (k == 2) {
    const double a = std::max({lo[0], 1.0 - hi[1], 0.0});
    const double b = std::min({hi[0], 1.0 - lo[1], 1.0});
    if (b > a) {
      auto g = golden_section([&](double x) { return eval({x, 1.0 - x}); }, a, b, 1e-12);
      if (g.f < best.value) best = {{g.x, 1.0 - g.x}, g.f};
    }
    return best;
  }

  // softmax coordinates relative to the last weight
  auto to_t = [&](const std::vector<double>& y) {
    std::vector<double> t(k);
    double mx = 0;
    for (double v : y) mx = std::max(mx, v);
    double z = std::exp(-mx);
    for (std::size_t i = 0; i + 1 < k; ++i) z += std::exp(y[i] - mx);
    for (std::size_t i = 0; i + 1 < k; ++i) t[i] = std::exp(y[i] - mx) / z;
    t[k - 1] = std::exp(-mx) / z;
    return t;
  };
  std::vector<double> y0(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) y0[i] = std::log(best.t[i] / best.t[k - 1]);
  for (int round = 0; round < 3; ++round) {
    auto nm = nelder_mead([&](const std::vector<double>& y) { return eval(to_t(y)); }, y0, 0.25 / (round + 1),
                          tol * 1e-3);
    auto t = to_t(nm.x);
    if (nm.f < best.value) {
      const bool small = best.value - nm.f <= tol * (1.0 + std::abs(nm.f));
      best = {t, nm.f};
      y0 = nm.x;
      if (small) break;
    } else {
      break;
    }
  }
  return best;
}

}  // namespace skorokhod
