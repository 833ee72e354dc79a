#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "glspace.hpp"
#include "modulus.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace skorokhod {

// Limit law of sup |B(t)| for a Brownian bridge.
inline double kolmogorov_cdf(double u) {
  if (!(u > 0)) return 0.0;
  if (u < 1.0) {
    // theta-function form, fast for small u
    const double c = std::numbers::pi * std::numbers::pi / (8 * u * u);
    double sum = 0;
    for (int k = 1; k < 1000; ++k) {
      const double j = 2.0 * k - 1;
      const double term = std::exp(-j * j * c);
      sum += term;
      if (term < 1e-12 * std::max(sum, 1e-300)) break;
    }
    return std::min(1.0, std::sqrt(2 * std::numbers::pi) / u * sum);
  }
  double sum = 0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * u * u);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(1.0 - 2.0 * sum, 0.0, 1.0);
}

struct MomentCheck {
  std::size_t point = 0;
  std::size_t n = 0;
  double mean = 0, mean_se = 0;
  double variance = 0, variance_target = 0, variance_se = 0;
  double kurtosis = 0, kurtosis_se = 0;  // excess kurtosis, target 0
};

struct CovarianceCheck {
  std::size_t a = 0, b = 0, n = 0;
  double covariance = 0, target = 0, se = 0;
};

struct FddReport {
  std::vector<Point> points;
  std::vector<std::size_t> n_list;
  std::vector<MomentCheck> moments;
  std::vector<CovarianceCheck> pairs;
  bool pass = false;  // judged at the largest n, 4 SE bands
};

// Finite-dimensional moments of S_n at the given points.
inline FddReport fdd_check(const FieldModel& base, const std::vector<Point>& points, std::vector<std::size_t> n_list,
                           std::size_t replicates, std::uint64_t master_seed, unsigned workers = 1) {
  if (!base.centered()) throw ModelError("fdd_check: base model is not centered");
  if (replicates < 1000) throw ArgumentError("fdd_check: need at least 1000 replicates");
  if (points.empty() || n_list.empty()) throw ArgumentError("fdd_check: empty point or n list");
  std::sort(n_list.begin(), n_list.end());
  FddReport rep{points, n_list, {}, {}, true};
  const std::size_t np = points.size();
  const double rr = static_cast<double>(replicates);
  for (std::size_t n : n_list) {
    const FieldModel model = FieldModel::partial_sum(base, n);
    const std::uint64_t seed = derive_seed(master_seed, n);
    std::vector<double> vals(replicates * np);
    parallel_for(replicates, workers, [&](std::size_t r) {
      const auto v = sample_points(model, points, StreamKey(SeedSpec{seed, r}));
      std::copy(v.begin(), v.end(), vals.begin() + static_cast<std::ptrdiff_t>(r * np));
    });
    const bool judged = n == n_list.back();
    for (std::size_t i = 0; i < np; ++i) {
      double s1 = 0;
      for (std::size_t r = 0; r < replicates; ++r) s1 += vals[r * np + i];
      const double mean = s1 / rr;
      double m2 = 0, m4 = 0;
      for (std::size_t r = 0; r < replicates; ++r) {
        const double c = vals[r * np + i] - mean;
        m2 += c * c;
        m4 += c * c * c * c;
      }
      m2 /= rr;
      m4 /= rr;
      MomentCheck mc;
      mc.point = i;
      mc.n = n;
      mc.mean = mean;
      mc.mean_se = std::sqrt(m2 / rr);
      mc.variance = m2;
      mc.variance_target = model_covariance(base, points[i], points[i]);
      mc.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / rr);
      mc.kurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
      mc.kurtosis_se = std::sqrt(24.0 / rr);
      if (judged) {
        const bool ok = std::abs(mc.mean) <= 4 * mc.mean_se + 1e-12 &&
                        std::abs(mc.variance - mc.variance_target) <= 4 * mc.variance_se + 1e-12 &&
                        (m2 == 0 || std::abs(mc.kurtosis) <= 4 * mc.kurtosis_se);
        rep.pass = rep.pass && ok;
      }
      rep.moments.push_back(mc);
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = a + 1; b < np; ++b) {
        double s = 0, s2 = 0;
        for (std::size_t r = 0; r < replicates; ++r) {
          const double p = vals[r * np + a] * vals[r * np + b];
          s += p;
          s2 += p * p;
        }
        CovarianceCheck cc{a, b, n, s / rr, model_covariance(base, points[a], points[b]), 0.0};
        cc.se = std::sqrt(std::max(s2 / rr - cc.covariance * cc.covariance, 0.0) / rr);
        if (judged) rep.pass = rep.pass && std::abs(cc.covariance - cc.target) <= 4 * cc.se + 1e-12;
        rep.pairs.push_back(cc);
      }
  }
  return rep;
}

enum class SupReference { kolmogorov, gaussian_simulation };

struct SupLaw {
  std::vector<double> samples;    // sorted sup |S_n| over lattice nodes
  std::vector<double> reference;  // sorted reference samples (simulation mode only)
  SupReference kind = SupReference::kolmogorov;
  double discrepancy = 0.0;  // sup |F_emp - F_ref|
  double at = 0.0;           // where the sup is attained

  double empirical_cdf(double u) const {
    return static_cast<double>(std::upper_bound(samples.begin(), samples.end(), u) - samples.begin()) /
           static_cast<double>(samples.size());
  }
  double reference_cdf(double u) const {
    if (kind == SupReference::kolmogorov) return kolmogorov_cdf(u);
    return static_cast<double>(std::upper_bound(reference.begin(), reference.end(), u) - reference.begin()) /
           static_cast<double>(reference.size());
  }
};

namespace detail {

inline std::vector<double> sup_samples(const FieldModel& model, const Lattice& lattice, std::size_t replicates,
                                       std::uint64_t seed, unsigned workers) {
  std::vector<double> out(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const auto p = sample_path(model, lattice, SeedSpec{seed, r});
    double s = 0;
    for (double v : p.values) s = std::max(s, std::abs(v));
    out[r] = s;
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Law of sup_x |S_n(x)| on the lattice against the Kolmogorov law (d=1
// indicator bases) or a simulated Gaussian reference field.
inline SupLaw sup_statistic_law(const FieldModel& base, std::size_t n, const Lattice& lattice,
                                std::size_t replicates, std::uint64_t master_seed, unsigned workers = 1) {
  if (replicates < 100) throw ArgumentError("sup_statistic_law: need at least 100 replicates");
  const FieldModel model = FieldModel::partial_sum(base, n);
  SupLaw law;
  law.samples = detail::sup_samples(model, lattice, replicates, derive_seed(master_seed, 0), workers);
  const double rr = static_cast<double>(replicates);
  if (lattice.dim() == 1 && base.kind() == ModelKind::centered_indicator) {
    law.kind = SupReference::kolmogorov;
    for (std::size_t i = 0; i < replicates; ++i) {
      const double k = kolmogorov_cdf(law.samples[i]);
      const double lo = std::abs(k - static_cast<double>(i) / rr), hi = std::abs(static_cast<double>(i + 1) / rr - k);
      if (std::max(lo, hi) > law.discrepancy) {
        law.discrepancy = std::max(lo, hi);
        law.at = law.samples[i];
      }
    }
    return law;
  }
  law.kind = SupReference::gaussian_simulation;
  const FieldModel ref = gaussian_reference(exact_covariance(base, lattice));
  law.reference = detail::sup_samples(ref, lattice, replicates, derive_seed(master_seed, 1), workers);
  std::vector<double> all = law.samples;
  all.insert(all.end(), law.reference.begin(), law.reference.end());
  std::sort(all.begin(), all.end());
  for (double u : all) {
    const double diff = std::abs(law.empirical_cdf(u) - law.reference_cdf(u));
    if (diff > law.discrepancy) {
      law.discrepancy = diff;
      law.at = u;
    }
  }
  return law;
}

struct UniformTailTable {
  std::vector<double> h_grid, u_grid;
  std::vector<std::size_t> n_list;
  std::vector<double> mc;     // [h][u], max over n
  std::vector<double> se;     // SE of the maximizing cell
  std::vector<double> bound;  // [h][u]
  std::size_t replicates = 0;
  std::size_t certified_cells = 0;  // cells with bound < 1
  std::size_t violations = 0;
  bool pass = true;

  std::size_t index(std::size_t h, std::size_t u) const { return h * u_grid.size() + u; }
};

// sup_n P-hat(kappa[S_n](h) > u) against a bound table indexed [h][u].
inline UniformTailTable uniform_tail_check(const FieldModel& base, std::vector<std::size_t> n_list,
                                           const Lattice& lattice, const ModulusEngine& engine,
                                           const std::vector<double>& h_grid, const std::vector<double>& u_grid,
                                           std::size_t replicates, std::uint64_t master_seed,
                                           const std::vector<double>& bound, unsigned workers = 1) {
  check_increasing(h_grid, "uniform_tail_check");
  check_increasing(u_grid, "uniform_tail_check");
  if (bound.size() != h_grid.size() * u_grid.size()) throw ArgumentError("uniform_tail_check: bound table shape");
  UniformTailTable t{h_grid, u_grid, n_list, std::vector<double>(bound.size(), 0.0),
                     std::vector<double>(bound.size(), 0.0), bound, replicates};
  const double rr = static_cast<double>(replicates);
  for (std::size_t n : n_list) {
    const FieldModel model = base.kind() == ModelKind::constant ? base : FieldModel::partial_sum(base, n);
    const auto ks = kappa_samples(model, lattice, engine, h_grid, replicates, derive_seed(master_seed, n), workers);
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
      const auto tail = tail_from_samples(ks, k, u_grid);
      for (std::size_t j = 0; j < u_grid.size(); ++j) {
        const auto i = t.index(k, j);
        if (tail.prob[j] >= t.mc[i]) {
          t.mc[i] = tail.prob[j];
          t.se[i] = std::sqrt(tail.prob[j] * (1 - tail.prob[j]) / rr);
        }
      }
    }
  }
  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (!(bound[i] < 1.0)) continue;
    ++t.certified_cells;
    if (t.mc[i] + 4 * t.se[i] > bound[i]) ++t.violations;
  }
  t.pass = t.violations == 0;
  return t;
}

enum class SummandKind { rademacher, uniform_centered, gaussian };

inline std::string to_string(SummandKind k) {
  switch (k) {
    case SummandKind::rademacher: return "rademacher";
    case SummandKind::uniform_centered: return "uniform-centered";
    case SummandKind::gaussian: return "gaussian";
  }
  return "?";
}

// |iota|_p for one summand.
inline double summand_norm(SummandKind k, double p) {
  switch (k) {
    case SummandKind::rademacher: return 1.0;
    case SummandKind::uniform_centered: return 0.5 * std::pow(p + 1, -1.0 / p);
    case SummandKind::gaussian: return gaussian_abs_moment_norm(p);
  }
  return 1.0;
}

struct RosenthalTable {
  SummandKind kind = SummandKind::rademacher;
  std::vector<double> p_list;
  std::vector<std::size_t> n_list;
  std::vector<double> ratio;  // [n][p]: |S_n|_p / |iota|_p
  std::vector<double> se;
  std::vector<double> c_r_by_n;  // max_p ratio ln p / p
  double c_r = 0.0;              // minimal C_R over the whole table
  std::vector<double> trend_slope, trend_se;  // ratio vs ln n, per p
  std::size_t replicates = 0;

  double at(std::size_t n_index, std::size_t p_index) const { return ratio[n_index * p_list.size() + p_index]; }
};

inline RosenthalTable rosenthal_empirical(SummandKind kind, const std::vector<double>& p_list,
                                          const std::vector<std::size_t> n_list, std::size_t replicates,
                                          std::uint64_t master_seed, unsigned workers = 1) {
  for (double p : p_list)
    if (!(p >= 2)) throw DomainError("rosenthal_empirical: p must be >= 2");
  if (replicates < 100) throw ArgumentError("rosenthal_empirical: need at least 100 replicates");
  RosenthalTable t;
  t.kind = kind;
  t.p_list = p_list;
  t.n_list = n_list;
  t.replicates = replicates;
  const double rr = static_cast<double>(replicates);
  const std::size_t np = p_list.size();
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::size_t n = n_list[ni];
    if (n == 0) throw ArgumentError("rosenthal_empirical: n must be positive");
    const std::uint64_t seed = derive_seed(master_seed, n);
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> s(replicates);
    parallel_for(replicates, workers, [&](std::size_t r) {
      StreamRng rng(StreamKey(SeedSpec{seed, r}));
      switch (kind) {
        case SummandKind::rademacher: {
          std::binomial_distribution<long> bin(static_cast<long>(n), 0.5);
          s[r] = (2.0 * static_cast<double>(bin(rng)) - static_cast<double>(n)) / root_n;
          break;
        }
        case SummandKind::uniform_centered: {
          double acc = 0;
          for (std::size_t i = 0; i < n; ++i) acc += rng.uniform() - 0.5;
          s[r] = acc / root_n;
          break;
        }
        case SummandKind::gaussian: {
          std::normal_distribution<double> normal;
          s[r] = normal(rng);
          break;
        }
      }
    });
    double c = 0;
    for (double p : p_list) {
      double m = 0, m2 = 0;
      for (double v : s) {
        const double a = std::pow(std::abs(v), p);
        m += a;
        m2 += a * a;
      }
      m /= rr;
      const double var = std::max(m2 / rr - m * m, 0.0);
      const double norm = std::pow(m, 1.0 / p) / summand_norm(kind, p);
      t.ratio.push_back(norm);
      t.se.push_back(m > 0 ? norm * std::sqrt(var / rr) / (p * m) : 0.0);
      c = std::max(c, norm * std::log(p) / p);
    }
    t.c_r_by_n.push_back(c);
    t.c_r = std::max(t.c_r, c);
  }
  for (std::size_t pi = 0; pi < np; ++pi) {
    std::vector<double> lx, ly;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      lx.push_back(std::log(static_cast<double>(n_list[ni])));
      ly.push_back(t.at(ni, pi));
    }
    if (lx.size() < 3) {
      t.trend_slope.push_back(0.0);
      t.trend_se.push_back(kInf);
      continue;
    }
    const auto fit = least_squares(lx, ly);
    double mx = 0;
    for (double x : lx) mx += x / static_cast<double>(lx.size());
    double sxx = 0;
    for (double x : lx) sxx += (x - mx) * (x - mx);
    const double dof = static_cast<double>(lx.size()) - 2;
    const double s2 = fit.residual * fit.residual * static_cast<double>(lx.size()) / dof;
    t.trend_slope.push_back(fit.slope);
    t.trend_se.push_back(sxx > 0 ? std::sqrt(s2 / sxx) : kInf);
  }
  return t;
}

struct CltReport {
  std::string model_id;
  std::vector<std::size_t> n_list;
  FddReport fdd;
  SupLaw sup_law;
  UniformTailTable tail;
  RosenthalTable rosenthal;
  std::map<std::string, bool> flags;
};

}  // namespace skorokhod
