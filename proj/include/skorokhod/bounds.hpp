#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "modulus.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "quasidist.hpp"
#include "rng.hpp"

namespace skorokhod {

// P-hat(tau >= level) per comparable pair, maximized over x2 and over a model list.
struct PairExceedance {
  std::vector<std::uint32_t> lo, hi;  // pair endpoints
  std::vector<double> levels;         // increasing
  std::vector<double> prob;           // [pair * levels + j]
  std::size_t replicates = 0;

  std::size_t pairs() const { return lo.size(); }
  double at(std::size_t pair, std::size_t j) const { return prob[pair * levels.size() + j]; }
};

inline PairExceedance tau_exceedance(const std::vector<FieldModel>& models, const Lattice& lattice,
                                     std::vector<double> levels, std::size_t replicates, std::uint64_t master_seed,
                                     unsigned workers = 1, InteriorMode mode = InteriorMode::ordered) {
  if (models.empty()) throw ArgumentError("tau_exceedance: empty model list");
  check_increasing(levels, "tau_exceedance");
  const std::size_t nodes = lattice.size(), nm = models.size(), total = nm * replicates;
  // paths stored node-major so one pass over replicates is contiguous
  std::vector<double> v(nodes * total);
  for (std::size_t k = 0; k < nm; ++k) {
    const std::uint64_t seed = derive_seed(master_seed, k);
    parallel_for(replicates, workers, [&](std::size_t r) {
      const auto path = sample_path(models[k], lattice, SeedSpec{seed, r});
      for (std::size_t x = 0; x < nodes; ++x) v[x * total + k * replicates + r] = path.values[x];
    });
  }
  const ModulusEngine engine(lattice, QuasiDistance::power_euclidean(1.0), mode);
  const std::size_t np = engine.pair_count(), nl = levels.size(), masks = engine.mask_count();
  PairExceedance out;
  out.levels = levels;
  out.replicates = replicates;
  out.prob.assign(np * nl, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    out.lo.push_back(static_cast<std::uint32_t>(engine.pair_lo(i)));
    out.hi.push_back(static_cast<std::uint32_t>(engine.pair_hi(i)));
  }
  const double rr = static_cast<double>(replicates);
  parallel_for(np, workers, [&](std::size_t i) {
    const std::uint32_t* z = engine.pair_corners(i);
    std::vector<std::size_t> hist(nl + 1);
    double* best = out.prob.data() + i * nl;
    auto visit = [&](std::size_t b) {
      for (std::size_t k = 0; k < nm; ++k) {
        std::fill(hist.begin(), hist.end(), 0);
        const double* vb = v.data() + b * total + k * replicates;
        for (std::size_t r = 0; r < replicates; ++r) {
          double t = std::abs(vb[r] - v[z[0] * total + k * replicates + r]);
          for (std::size_t m = 1; m < masks; ++m) t = std::min(t, std::abs(vb[r] - v[z[m] * total + k * replicates + r]));
          const auto bin = static_cast<std::size_t>(std::upper_bound(levels.begin(), levels.end(), t) - levels.begin());
          ++hist[bin];
        }
        std::size_t above = 0;
        for (std::size_t j = nl; j-- > 0;) {
          above += hist[j + 1];
          best[j] = std::max(best[j], static_cast<double>(above) / rr);
        }
      }
    };
    const std::size_t a = engine.pair_lo(i), c = engine.pair_hi(i);
    if (mode == InteriorMode::ordered) {
      lattice.for_each_in_box(a, c, visit);
    } else {
      for (std::size_t b = 0; b < nodes; ++b) visit(b);
    }
  });
  return out;
}

struct KeyEstimate {
  Lattice lattice;
  QuasiDistance q = QuasiDistance::power_euclidean(1.0);  // tabulated natural q, normalized
  double q_raw_max = 0.0;
  double q_min_positive = 0.0;
  double u0 = 1.0;
  std::vector<double> u_grid;
  std::vector<double> lambda;      // monotone
  std::vector<double> lambda_raw;  // before the running max
  std::size_t replicates = 0;
  std::size_t model_count = 0;

  // Step function from below on the grid; 0 (no certificate) left of the grid.
  double lambda_at(double u) const {
    auto it = std::upper_bound(u_grid.begin(), u_grid.end(), u * (1 + 1e-12));
    if (it == u_grid.begin()) return 0.0;
    return lambda[static_cast<std::size_t>(it - u_grid.begin()) - 1];
  }
};

inline KeyEstimate key_from_exceedance(const PairExceedance& ex, const Lattice& lattice, double u0,
                                       const std::vector<double>& u_grid, std::size_t model_count) {
  const auto j0 = static_cast<std::size_t>(std::find(ex.levels.begin(), ex.levels.end(), u0) - ex.levels.begin());
  if (j0 >= ex.levels.size()) throw ArgumentError("natural_key_estimate: u0 missing from the level list");
  KeyEstimate key;
  key.lattice = lattice;
  key.u0 = u0;
  key.u_grid = u_grid;
  key.replicates = ex.replicates;
  key.model_count = model_count;
  for (std::size_t i = 0; i < ex.pairs(); ++i) key.q_raw_max = std::max(key.q_raw_max, ex.at(i, j0));
  if (!(key.q_raw_max > 0))
    throw DegenerateError(
        "natural_key_estimate: estimated q is identically zero (degenerate key estimate); lower u0 or use partial "
        "sums");
  const std::size_t n = lattice.size();
  std::vector<double> table(n * n, 0.0);
  key.q_min_positive = kInf;
  for (std::size_t i = 0; i < ex.pairs(); ++i) {
    const double qn = ex.at(i, j0) / key.q_raw_max;
    table[ex.lo[i] * n + ex.hi[i]] = table[ex.hi[i] * n + ex.lo[i]] = qn;
    if (qn > 0) key.q_min_positive = std::min(key.q_min_positive, qn);
  }
  // incomparable pairs: box spanned by the coordinatewise min and max
  if (lattice.dim() > 1)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (!lattice.node_leq(x, y) && !lattice.node_leq(y, x))
          table[x * n + y] = table[lattice.node_min(x, y) * n + lattice.node_max(x, y)];
  key.q = QuasiDistance::tabulated(lattice, std::move(table), "natural");

  for (double u : u_grid) {
    const auto j = static_cast<std::size_t>(std::find(ex.levels.begin(), ex.levels.end(), u) - ex.levels.begin());
    double ratio = 0;
    for (std::size_t i = 0; i < ex.pairs(); ++i) {
      const double p = ex.at(i, j);
      if (p <= 0) continue;
      const double qn = ex.at(i, j0) / key.q_raw_max;
      ratio = qn > 0 ? std::max(ratio, p / qn) : kInf;
      if (ratio == kInf) break;
    }
    key.lambda_raw.push_back(ratio > 0 ? 1.0 / ratio : kInf);
  }
  key.lambda = key.lambda_raw;
  for (std::size_t j = 1; j < key.lambda.size(); ++j) key.lambda[j] = std::max(key.lambda[j], key.lambda[j - 1]);
  return key;
}

inline std::vector<double> merge_levels(const std::vector<double>& u_grid, double u0) {
  std::vector<double> levels = u_grid;
  levels.push_back(u0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// Natural q and lambda. With several models the estimate is uniform over the list.
inline KeyEstimate natural_key_estimate(const std::vector<FieldModel>& models, const Lattice& lattice,
                                        const std::vector<double>& u_grid, std::size_t replicates,
                                        std::uint64_t master_seed, double u0 = 1.0, unsigned workers = 1,
                                        InteriorMode mode = InteriorMode::ordered) {
  if (replicates < 1000) throw ArgumentError("natural_key_estimate: need at least 1000 replicates");
  if (!(u0 > 0)) throw ArgumentError("natural_key_estimate: u0 must be positive");
  check_increasing(u_grid, "natural_key_estimate");
  for (const auto& m : models)
    if (m.kind() == ModelKind::constant)
      throw DegenerateError("natural_key_estimate: constant model has tau = 0 (degenerate key estimate)");
  const auto ex = tau_exceedance(models, lattice, merge_levels(u_grid, u0), replicates, master_seed, workers, mode);
  return key_from_exceedance(ex, lattice, u0, u_grid, models.size());
}

inline KeyEstimate natural_key_estimate(const FieldModel& model, const Lattice& lattice,
                                        const std::vector<double>& u_grid, std::size_t replicates,
                                        std::uint64_t master_seed, double u0 = 1.0, unsigned workers = 1) {
  return natural_key_estimate(std::vector<FieldModel>{model}, lattice, u_grid, replicates, master_seed, u0, workers);
}

struct KeyAudit {
  double worst_excess_se = -kInf;  // max of (P - q/lambda) / SE over audited cells
  std::size_t violations = 0;      // cells with P > q/lambda + 4 SE
  std::size_t cells = 0;
};

// Checks P-hat(tau >= u) <= q/lambda(u) + 4 SE on an independent sample.
inline KeyAudit audit_key_estimate(const KeyEstimate& key, const std::vector<FieldModel>& models,
                                   std::size_t replicates, std::uint64_t master_seed, unsigned workers = 1) {
  const auto ex = tau_exceedance(models, key.lattice, key.u_grid, replicates, master_seed, workers);
  KeyAudit audit;
  const double rr = static_cast<double>(replicates);
  for (std::size_t i = 0; i < ex.pairs(); ++i) {
    const double qn = key.q.between_nodes(key.lattice, ex.lo[i], ex.hi[i]);
    for (std::size_t j = 0; j < ex.levels.size(); ++j) {
      const double p = ex.at(i, j);
      const double lam = key.lambda[j];
      const double bound = lam == kInf ? 0.0 : (lam > 0 ? qn / lam : kInf);
      const double se = std::sqrt(std::max(p * (1 - p), 1.0 / rr) / rr);
      ++audit.cells;
      const double excess = (p - bound) / se;
      audit.worst_excess_se = std::max(audit.worst_excess_se, excess);
      if (p > bound + 4 * se) ++audit.violations;
    }
  }
  return audit;
}

struct PowerLaw {
  double c = 0.0;
  double p = 0.0;

  double operator()(double u) const { return c * std::pow(u, p); }
};

// Power form C u^p below the step function lambda-hat on the grid: slope by
// least squares, C as the lower envelope over [u_j, u_{j+1}).
inline PowerLaw fit_lambda_power(const KeyEstimate& key) {
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < key.u_grid.size(); ++j)
    if (std::isfinite(key.lambda[j]) && key.lambda[j] > 0) {
      lx.push_back(std::log(key.u_grid[j]));
      ly.push_back(std::log(key.lambda[j]));
    }
  if (lx.size() < 2) throw FitError("fit_lambda_power: fewer than two finite lambda values");
  PowerLaw law;
  law.p = std::max(least_squares(lx, ly).slope, 1e-6);
  law.c = kInf;
  for (std::size_t j = 0; j < key.u_grid.size(); ++j) {
    if (!std::isfinite(key.lambda[j]) || !(key.lambda[j] > 0)) continue;
    const double right = j + 1 < key.u_grid.size() ? key.u_grid[j + 1] : key.u_grid[j];
    law.c = std::min(law.c, key.lambda[j] / std::pow(right, law.p));
  }
  if (!(law.c > 0) || !std::isfinite(law.c)) throw FitError("fit_lambda_power: no positive envelope constant");
  return law;
}

// Admissible sequences: eps(k) for k >= 0 with eps(1) = 1, theta(k) with sum 1.
class SequenceFamily {
 public:
  enum class Kind { geometric_eps, geometric_theta, custom };

  // eps(k) = s^(k-1), theta(k) = (1-s) s^k
  static SequenceFamily geometric_eps(double s) { return geometric_theta(s, s, Kind::geometric_eps); }

  // eps(k) = s^(k-1), theta(k) = (1-theta0) theta0^k
  static SequenceFamily geometric_theta(double s, double theta0) {
    return geometric_theta(s, theta0, Kind::geometric_theta);
  }

  // eps(k) = eps_scale * s^k with arbitrary scale; used for the literal theorem sequences
  static SequenceFamily scaled_geometric(double eps_scale, double s, double theta0) {
    auto f = geometric_theta(s, theta0, Kind::geometric_theta);
    f.eps_scale_ = eps_scale;
    return f;
  }

  static SequenceFamily custom(std::vector<double> eps, std::vector<double> theta) {
    if (eps.size() < 2 || theta.size() + 1 != eps.size())
      throw ArgumentError("custom sequences: need eps(0..K) and theta(0..K-1)");
    SequenceFamily f;
    f.kind_ = Kind::custom;
    f.eps_ = std::move(eps);
    f.theta_ = std::move(theta);
    return f;
  }

  Kind kind() const { return kind_; }
  double s() const { return s_; }
  double theta0() const { return theta0_; }

  double eps(std::size_t k) const {
    if (kind_ == Kind::custom) return k < eps_.size() ? eps_[k] : 0.0;
    return eps_scale_ * std::pow(s_, static_cast<double>(k));
  }
  double theta(std::size_t k) const {
    if (kind_ == Kind::custom) return k < theta_.size() ? theta_[k] : 0.0;
    return (1 - theta0_) * std::pow(theta0_, static_cast<double>(k));
  }
  // Number of terms for custom tables; unbounded otherwise.
  std::size_t length() const { return kind_ == Kind::custom ? theta_.size() : static_cast<std::size_t>(-1); }

  // eps(1) = 1, eps decreasing to 0, theta decreasing, sum theta = 1.
  bool admissible() const {
    if (std::abs(eps(1) - 1.0) > 1e-12) return false;
    if (kind_ != Kind::custom) return s_ > 0 && s_ < 1 && theta0_ > 0 && theta0_ < 1;
    double sum = 0;
    for (std::size_t k = 0; k < theta_.size(); ++k) {
      sum += theta_[k];
      if (k && theta_[k] > theta_[k - 1]) return false;
    }
    for (std::size_t k = 1; k < eps_.size(); ++k)
      if (!(eps_[k] < eps_[k - 1])) return false;
    return std::abs(sum - 1.0) < 1e-9;
  }

 private:
  static SequenceFamily geometric_theta(double s, double theta0, Kind kind) {
    if (!(s > 0 && s < 1) || !(theta0 > 0 && theta0 < 1))
      throw ArgumentError("geometric sequences: parameters must lie in (0,1)");
    SequenceFamily f;
    f.kind_ = kind;
    f.s_ = s;
    f.theta0_ = theta0;
    f.eps_scale_ = 1.0 / s;
    return f;
  }

  Kind kind_ = Kind::geometric_eps;
  double s_ = 0.5;
  double theta0_ = 0.5;
  double eps_scale_ = 2.0;
  std::vector<double> eps_, theta_;
};

using EntropyOracle = std::function<double(double)>;
using LambdaOracle = std::function<double(double)>;

struct SeriesValue {
  double value = 0.0;
  bool divergent = false;
  std::size_t terms = 0;
  double remainder = 0.0;  // geometric tail estimate after truncation
};

inline constexpr std::size_t kSeriesMaxTerms = 10000;

// sum_k N(eps(k+1)) eps(k) / lambda(u theta(k)); terms with eps(k) < floor_eps vanish.
inline SeriesValue q_series(const EntropyOracle& N, const LambdaOracle& lambda, double u, const SequenceFamily& family,
                            double tol = 1e-12, double floor_eps = 0.0, std::size_t k_max = kSeriesMaxTerms) {
  if (!(u > 0)) throw ArgumentError("q_series: u must be positive");
  SeriesValue out;
  double prev = -1;
  std::vector<double> ratios;
  const std::size_t len = std::min(family.length(), k_max);
  for (std::size_t k = 0; k < len; ++k) {
    const double e = family.eps(k);
    if (e < floor_eps) {
      out.terms = k;
      return out;
    }
    // eps(k+1) about to underflow: close with the geometric tail of the recent ratios
    if (!(family.eps(k + 1) > 1e-280) && floor_eps <= 0) {
      const double r = ratios.size() >= 5 ? *std::max_element(ratios.end() - 5, ratios.end()) : kInf;
      if (r < 1) {
        out.remainder = prev * r / (1 - r);
        out.value += out.remainder;
      } else {
        out.value = kInf;
        out.divergent = true;
      }
      return out;
    }
    const double lam = lambda(u * family.theta(k));
    double term;
    if (lam == kInf) {
      term = 0.0;
    } else if (!(lam > 0)) {
      term = kInf;
    } else {
      term = N(family.eps(k + 1)) * e / lam;
    }
    if (!std::isfinite(term)) {
      out.value = kInf;
      out.divergent = true;
      out.terms = k + 1;
      return out;
    }
    out.value += term;
    out.terms = k + 1;
    if (prev >= 0) {
      double ratio;
      if (prev > 0) {
        ratio = term / prev;
      } else {
        ratio = term > 0 ? kInf : 0.0;
      }
      ratios.push_back(ratio);
    }
    prev = term;
    if (ratios.size() >= 5) {
      const double r = *std::max_element(ratios.end() - 5, ratios.end());
      if (r < 1 && term <= tol * out.value) {
        out.remainder = term * r / (1 - r);
        return out;
      }
      if (out.value == 0 && r == 0 && k > 64) return out;
    }
  }
  if (family.length() <= k_max) return out;
  out.value = kInf;
  out.divergent = true;
  return out;
}

struct OptimizedQ {
  SeriesValue series;
  double s = 0.5;
  double theta0 = 0.5;
  SequenceFamily::Kind kind = SequenceFamily::Kind::geometric_eps;

  double value() const { return series.value; }
  bool divergent() const { return series.divergent; }
};

inline OptimizedQ q_optimize(const EntropyOracle& N, const LambdaOracle& lambda, double u,
                             SequenceFamily::Kind kind = SequenceFamily::Kind::geometric_eps, double tol = 1e-12,
                             double floor_eps = 0.0) {
  if (kind == SequenceFamily::Kind::custom) throw ArgumentError("q_optimize: custom families have no parameters");
  auto eval = [&](double s, double t0) {
    if (!(s > 0 && s < 1 && t0 > 0 && t0 < 1)) return SeriesValue{kInf, true, 0, 0};
    const auto fam = kind == SequenceFamily::Kind::geometric_eps ? SequenceFamily::geometric_eps(s)
                                                                 : SequenceFamily::geometric_theta(s, t0);
    return q_series(N, lambda, u, fam, tol, floor_eps);
  };
  auto logv = [&](double s, double t0) {
    const auto v = eval(s, t0);
    if (v.divergent) return kInf;
    return v.value > 0 ? std::log(v.value) : -kInf;
  };
  OptimizedQ best;
  best.kind = kind;
  best.series = {kInf, true, 0, 0};
  double best_log = kInf;
  if (kind == SequenceFamily::Kind::geometric_eps) {
    std::vector<double> grid;
    for (int i = 1; i <= 49; ++i) grid.push_back(0.02 * i);
    std::vector<double> fs;
    for (double s : grid) fs.push_back(logv(s, s));
    std::size_t bi = 0;
    for (std::size_t i = 1; i < fs.size(); ++i)
      if (fs[i] < fs[bi]) bi = i;
    if (!(fs[bi] < kInf)) return best;
    double bs = grid[bi];
    best_log = fs[bi];
    if (best_log > -kInf) {
      const double lo = bi > 0 ? grid[bi - 1] : 1e-3, hi = bi + 1 < grid.size() ? grid[bi + 1] : 0.999;
      auto m = golden_section([&](double s) { return logv(s, s); }, lo, hi, 1e-10);
      if (m.f < best_log) {
        best_log = m.f;
        bs = m.x;
      }
    }
    best.s = best.theta0 = bs;
    best.series = eval(bs, bs);
    return best;
  }
  double bs = 0.5, bt = 0.5;
  for (int i = 1; i <= 19; ++i)
    for (int j = 1; j <= 19; ++j) {
      const double f = logv(0.05 * i, 0.05 * j);
      if (f < best_log) {
        best_log = f;
        bs = 0.05 * i;
        bt = 0.05 * j;
      }
    }
  if (!(best_log < kInf)) return best;
  if (best_log > -kInf) {
    auto logit = [](double x) { return std::log(x / (1 - x)); };
    auto expit = [](double y) { return 1 / (1 + std::exp(-y)); };
    auto nm = nelder_mead([&](const std::vector<double>& y) { return logv(expit(y[0]), expit(y[1])); },
                          {logit(bs), logit(bt)}, 0.2, 1e-10, 600);
    if (nm.f < best_log) {
      bs = expit(nm.x[0]);
      bt = expit(nm.x[1]);
    }
  }
  best.s = bs;
  best.theta0 = bt;
  best.series = eval(bs, bt);
  return best;
}

inline double theorem31_w(double gamma) {
  if (!(gamma > 0 && gamma < 1)) throw DomainError("W(gamma): gamma must lie in (0,1)");
  return 1.0 / (1.0 - std::pow(2.0, -(1.0 - gamma) / 2.0));
}

inline double theorem31_bound(double c_n, double c_lambda, double gamma, double p, double u) {
  if (!(gamma > 0 && gamma < 1)) throw DomainError("theorem31_bound: gamma must lie in (0,1)");
  if (!(p > 0)) throw DomainError("theorem31_bound: p must be positive");
  if (!(u >= 1)) throw DomainError("theorem31_bound: u must be >= 1");
  if (!(c_n > 0) || !(c_lambda > 0)) throw ArgumentError("theorem31_bound: constants must be positive");
  return 2.0 * c_n / c_lambda * std::pow(theorem31_w(gamma), p + 1) * std::pow(u, -p);
}

inline double theorem31_theta0(double gamma, double p) { return std::pow(2.0, (gamma - 1) / (2 * p)); }

// The prescribed sequences eps(k) = 2^-k; eps(1) = 1/2, so not admissible.
inline SequenceFamily theorem31_literal_sequences(double gamma, double p) {
  return SequenceFamily::scaled_geometric(1.0, 0.5, theorem31_theta0(gamma, p));
}

// Same theta with eps shifted to eps(k) = 2^(1-k).
inline SequenceFamily theorem31_shifted_sequences(double gamma, double p) {
  return SequenceFamily::geometric_theta(0.5, theorem31_theta0(gamma, p));
}

// Displayed closed form of the optimized Example 2.1 series at parameter s, taken literally.
inline double example21_closed_form(double c_n, double gamma, double rho, double s, double u) {
  return c_n * std::pow(s, -gamma) * std::pow(1 - s, -2 * rho) / (1 - std::pow(s, 1 - std::pow(s, 1 - gamma - 2 * rho))) *
         std::pow(u, -2 * rho);
}

struct AssembledBound {
  double value = kInf;
  double q = kInf;
  double sigma = 0.0;
  bool vacuous = true;
  bool divergent = false;
  bool non_certifying = false;  // sigma does not vanish as h -> 0
};

inline AssembledBound assemble_kappa_bound(const SeriesValue& q, double sigma_2h, bool sigma_decays = true) {
  if (!(sigma_2h >= 0)) throw ArgumentError("assemble_kappa_bound: sigma must be nonnegative");
  AssembledBound b;
  b.q = q.value;
  b.sigma = sigma_2h;
  b.non_certifying = !sigma_decays;
  if (q.divergent) {
    b.divergent = true;
    return b;
  }
  b.value = q.value * sigma_2h;
  b.vacuous = !(b.value < 1.0);
  return b;
}

inline AssembledBound assemble_kappa_bound(double q, double sigma_2h, bool sigma_decays = true) {
  return assemble_kappa_bound(SeriesValue{q, !std::isfinite(q), 0, 0}, sigma_2h, sigma_decays);
}

inline AssembledBound assemble_kappa_bound(const SeriesValue& q, const SigmaCurve& sigma, double h) {
  return assemble_kappa_bound(q, sigma(2 * h), sigma.decays());
}

struct EnvelopeResult {
  double value = kInf;
  double log_value = kInf;
  double argmin = 0.0;
  bool vacuous = true;
};

namespace detail {

template <class F>
EnvelopeResult minimize_log_1d(F&& f, double lo, double hi, std::size_t points) {
  const auto grid = logspace(lo, hi, points);
  std::size_t bi = 0;
  std::vector<double> fs;
  for (double x : grid) fs.push_back(f(x));
  for (std::size_t i = 1; i < fs.size(); ++i)
    if (fs[i] < fs[bi]) bi = i;
  if (!(fs[bi] < kInf)) throw NoFiniteBoundError("envelope bound: objective infinite on the whole range");
  EnvelopeResult r;
  r.argmin = grid[bi];
  r.log_value = fs[bi];
  auto m = golden_section([&](double y) { return f(std::exp(y)); }, std::log(grid[bi > 0 ? bi - 1 : 0]),
                          std::log(grid[std::min(bi + 1, grid.size() - 1)]), 1e-13);
  if (m.f < r.log_value) {
    r.log_value = m.f;
    r.argmin = std::exp(m.x);
  }
  r.value = std::exp(r.log_value);
  r.vacuous = !(r.value < 1.0);
  return r;
}

}  // namespace detail

using LogOracle = std::function<double(double)>;

// inf over q > 0 of K(q) u^-q, with ln K supplied.
inline EnvelopeResult gls_envelope_example51(const LogOracle& log_k, double u, double q_lo = 1e-6,
                                             double q_hi = 1e6) {
  if (!(u >= 1)) throw DomainError("gls_envelope_bound: u must be >= 1");
  const double lu = std::log(u);
  return detail::minimize_log_1d([&](double q) { return log_k(q) - q * lu; }, q_lo, q_hi, 400);
}

// inf over p in [1,b) of upsilon^gamma(p) W^{p+1}(gamma) u^-p, with ln upsilon^gamma supplied.
// Takes ln u so that very large u stay representable.
inline EnvelopeResult gls_envelope_theorem52_log(const LogOracle& log_upsilon_gamma, double gamma, double b,
                                                 double log_u) {
  if (!(log_u >= 0)) throw DomainError("gls_envelope_bound: u must be >= 1");
  const double lw = std::log(theorem31_w(gamma));
  const double hi = std::isfinite(b) ? b * (1 - 1e-9) : 1e5;
  if (!(hi > 1)) throw NoFiniteBoundError("gls_envelope_bound: upsilon support is trivial");
  return detail::minimize_log_1d(
      [&](double p) {
        const double v = log_upsilon_gamma(p);
        return std::isnan(v) ? kInf : v + (p + 1) * lw - p * log_u;
      },
      1.0, hi, 400);
}

inline EnvelopeResult gls_envelope_theorem52(const LogOracle& log_upsilon_gamma, double gamma, double b, double u) {
  if (!(u >= 1)) throw DomainError("gls_envelope_bound: u must be >= 1");
  return gls_envelope_theorem52_log(log_upsilon_gamma, gamma, b, std::log(u));
}

inline double clt_uniform_bound(double c_delta_n, double gamma, double c_delta_lambda, double p, double u,
                                double sigma_2h) {
  if (!(p > 0)) throw DomainError("clt_uniform_bound: p must be positive");
  return theorem31_bound(c_delta_n, c_delta_lambda, gamma, p, u) * sigma_2h;
}

// Structured output pairing a bound curve with its constants and diagnostics.
struct BoundReport {
  std::string bound_kind;
  std::map<std::string, double> constants;
  std::vector<double> h_grid;  // empty unless the bound depends on h
  std::vector<double> u_grid;
  std::vector<double> values;  // [h][u] flattened, or [u]
  std::vector<std::string> flags;
  std::map<std::string, double> argmin;
  std::map<std::string, std::string> provenance;
};

inline std::string bound_flag(const AssembledBound& b) {
  if (b.divergent) return "divergent";
  if (b.vacuous) return "vacuous";
  if (b.non_certifying) return "non-certifying";
  return "ok";
}

// Entropy-series bound built from calibrated constants:
// N(eps) <= min(C_N eps^-gamma, nodes), lambda(u) >= C_lambda u^p.
struct NaturalBound {
  double c_n = 1.0;
  double gamma = 0.5;
  double node_count = 1.0;
  PowerLaw lambda;
  double floor_eps = 0.0;
  SequenceFamily::Kind kind = SequenceFamily::Kind::geometric_theta;

  double entropy(double eps) const {
    if (eps >= 1.0) return 1.0;
    return std::min(node_count, std::max(1.0, c_n * std::pow(eps, -gamma)));
  }

  OptimizedQ q(double u) const {
    return q_optimize([this](double e) { return entropy(e); }, [this](double v) { return lambda(v); }, u, kind, 1e-12,
                      floor_eps);
  }
};

}  // namespace skorokhod
