#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace skorokhod {

inline constexpr double kPsiGridCap = 64.0;
inline constexpr std::size_t kPsiGridSize = 64;

// Generating function p -> psi(p) on [p_min, b) or [p_min, b].
class PsiFunction {
 public:
  using Fn = std::function<double(double)>;

  static PsiFunction closed_form(Fn f, double b, bool b_included, std::string tag, double p_min = 1.0) {
    if (!(b > p_min) && !(b == p_min && b_included)) throw ArgumentError("psi: support must be nonempty");
    if (!(p_min >= 1.0)) throw ArgumentError("psi: support must start at p >= 1");
    PsiFunction psi;
    psi.fn_ = std::move(f);
    psi.b_ = b;
    psi.b_included_ = b_included && std::isfinite(b);
    psi.p_min_ = p_min;
    psi.tag_ = std::move(tag);
    return psi;
  }

  static PsiFunction tabulated(std::vector<double> p, std::vector<double> v, std::string tag = "tabulated") {
    if (p.empty() || p.size() != v.size()) throw ArgumentError("psi: tabulated grid and values must match");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] >= 1.0)) throw ArgumentError("psi: grid must lie in [1, b)");
      if (i && !(p[i] > p[i - 1])) throw ArgumentError("psi: grid must be strictly increasing");
      if (!(v[i] > 0) || !std::isfinite(v[i])) throw ArgumentError("psi: values must be positive and finite");
    }
    PsiFunction psi;
    psi.p_min_ = p.front();
    psi.b_ = p.back();
    psi.b_included_ = true;
    psi.grid_p_ = std::move(p);
    psi.grid_v_ = std::move(v);
    psi.tag_ = std::move(tag);
    return psi;
  }

  // psi_(r): identically 1 on [1, r]
  static PsiFunction degenerate(double r) {
    if (!(r >= 1.0)) throw ArgumentError("psi: degenerate order must be >= 1");
    return closed_form([](double) { return 1.0; }, r, true, "degenerate");
  }

  double operator()(double p) const {
    if (!contains(p)) return kInf;
    if (grid_p_.empty()) return fn_(p);
    auto it = std::lower_bound(grid_p_.begin(), grid_p_.end(), p);
    auto i = static_cast<std::size_t>(it - grid_p_.begin());
    if (i < grid_p_.size() && grid_p_[i] == p) return grid_v_[i];
    const double w = (p - grid_p_[i - 1]) / (grid_p_[i] - grid_p_[i - 1]);
    return grid_v_[i - 1] + w * (grid_v_[i] - grid_v_[i - 1]);
  }

  bool contains(double p) const {
    if (!(p >= p_min_)) return false;
    return b_included_ ? p <= b_ : p < b_;
  }

  double b() const { return b_; }
  bool b_included() const { return b_included_; }
  double p_min() const { return p_min_; }
  bool is_tabulated() const { return !grid_p_.empty(); }
  const std::string& tag() const { return tag_; }
  const std::vector<double>& table_p() const { return grid_p_; }
  const std::vector<double>& table_v() const { return grid_v_; }

  // Largest p used by grids: b when included, else just below min(b, 64).
  double grid_top() const {
    if (b_included_ && b_ <= kPsiGridCap) return b_;
    if (b_ > kPsiGridCap) return kPsiGridCap;
    return b_ * (1.0 - 1e-9);
  }

  std::vector<double> grid(std::size_t n = kPsiGridSize) const {
    if (!grid_p_.empty()) return grid_p_;
    const double top = grid_top();
    if (!(top > p_min_)) return {p_min_};
    return logspace(p_min_, top, n);
  }

 private:
  Fn fn_;
  std::vector<double> grid_p_, grid_v_;
  double b_ = kInf;
  bool b_included_ = false;
  double p_min_ = 1.0;
  std::string tag_;
};

inline double lp_norm(const std::vector<double>& samples, double p) {
  if (samples.empty()) throw ArgumentError("lp_norm: empty sample");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("lp_norm: p must be finite and >= 1");
  double mx = 0;
  for (double x : samples) mx = std::max(mx, std::abs(x));
  if (mx == 0) return 0.0;
  double s = 0;
  for (double x : samples) s += std::pow(std::abs(x) / mx, p);
  return mx * std::pow(s / static_cast<double>(samples.size()), 1.0 / p);
}

// Closed form sqrt(2) (Gamma((p+1)/2) / Gamma(1/2))^(1/p) = |N(0,1)|_p.
inline double gaussian_abs_moment_norm(double p) {
  return std::exp(0.5 * std::log(2.0) + (std::lgamma((p + 1) / 2) - std::lgamma(0.5)) / p);
}

inline PsiFunction gaussian_natural_psi() {
  return PsiFunction::closed_form(gaussian_abs_moment_norm, kInf, false, "gaussian-natural");
}

using NormOracle = std::function<double(std::size_t, double)>;

struct SupportBound {
  double b = kInf;
  bool included = false;
};

struct HolderResult {
  double bound = kInf;
  std::vector<double> a;  // Hölder tuple, sum 1/a = 1
};

// inf over a in A(k) of prod_i norm(i, a_i p_i)^p_i
inline HolderResult holder_mixed_bound(const NormOracle& norm, const std::vector<double>& p,
                                       const std::vector<SupportBound>& support = {}) {
  const std::size_t k = p.size();
  if (k == 0) throw ArgumentError("holder_mixed_bound: empty moment vector");
  for (double v : p)
    if (!(v > 0)) throw ArgumentError("holder_mixed_bound: exponents must be positive");
  std::vector<double> lo(k, 0.0);
  if (!support.empty()) {
    if (support.size() != k) throw ArgumentError("holder_mixed_bound: support size mismatch");
    for (std::size_t i = 0; i < k; ++i)
      if (std::isfinite(support[i].b)) lo[i] = p[i] / support[i].b * (support[i].included ? 1.0 : 1.0 + 1e-12);
  }
  auto objective = [&](const std::vector<double>& t) {
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = norm(i, p[i] / t[i]);
      if (std::isnan(v) || v == kInf) return kInf;
      if (v <= 0) return -kInf;
      s += p[i] * std::log(v);
    }
    return s;
  };
  const auto m = minimize_on_simplex(k, objective, lo);
  if (!(m.value < kInf)) throw NoFiniteBoundError("holder_mixed_bound: oracle infinite on the whole simplex");
  HolderResult r;
  r.bound = std::exp(m.value);
  for (double t : m.t) r.a.push_back(1.0 / t);
  return r;
}

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t argmax = 0;  // node achieving the sup, when relevant
};

// sup over lattice x2 in [x1,x3] of E prod_M |Delta(M)|^s(M); s indexed by mask bits.
inline MonteCarloEstimate beta_distance(const FieldModel& model, const Lattice& lattice, const Point& x1,
                                        const Point& x3, const std::vector<double>& s, std::size_t replicates,
                                        std::uint64_t master_seed, unsigned workers = 1) {
  if (!leq(x1, x3)) throw PreconditionError("beta_distance: x1 is not <= x3");
  const std::size_t masks = std::size_t{1} << lattice.dim();
  if (s.size() != masks) throw ArgumentError("beta_distance: need one exponent per mask");
  for (double v : s)
    if (!(v > 0)) throw ArgumentError("beta_distance: exponents must be positive");
  if (replicates < 2) throw EstimationError("beta_distance: need at least 2 replicates");
  const std::size_t a = lattice.node_of(x1), c = lattice.node_of(x3);
  std::vector<std::size_t> corner(masks), interior;
  for (std::size_t m = 0; m < masks; ++m) corner[m] = lattice.corner_node(a, c, SubsetMask(static_cast<std::uint32_t>(m)));
  lattice.for_each_in_box(a, c, [&](std::size_t b) { interior.push_back(b); });
  const std::size_t nb = interior.size();
  std::vector<double> prod(replicates * nb);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const auto path = sample_path(model, lattice, SeedSpec{master_seed, r});
    for (std::size_t i = 0; i < nb; ++i) {
      double v = 1.0;
      for (std::size_t m = 0; m < masks; ++m)
        v *= std::pow(std::abs(path.values[interior[i]] - path.values[corner[m]]), s[m]);
      prod[r * nb + i] = v;
    }
  });
  MonteCarloEstimate best{-1.0, 0.0, interior.front()};
  const double rr = static_cast<double>(replicates);
  for (std::size_t i = 0; i < nb; ++i) {
    double sum = 0, sq = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
      sum += prod[r * nb + i];
      sq += prod[r * nb + i] * prod[r * nb + i];
    }
    const double mean = sum / rr;
    if (mean > best.value) {
      const double var = std::max(0.0, sq / rr - mean * mean) * rr / (rr - 1);
      best = {mean, std::sqrt(var / rr), interior[i]};
    }
  }
  return best;
}

struct GlsNorm {
  double value = 0.0;
  double argmax_p = 1.0;
  bool infinite = false;
};

using ScalarNormOracle = std::function<double(double)>;

inline GlsNorm gls_norm(const ScalarNormOracle& norm, const PsiFunction& psi) {
  const auto grid = psi.grid();
  GlsNorm out{-1.0, grid.front(), false};
  std::vector<double> ratios;
  for (double p : grid) {
    const double r = norm(p) / psi(p);
    if (std::isnan(r) || r == kInf) return {kInf, p, true};
    ratios.push_back(r);
    if (r > out.value) out = {r, p, false};
  }
  // growth toward an open end of the support signals an infinite norm
  if (!psi.b_included() && ratios.size() >= 4) {
    const std::size_t n = ratios.size();
    const bool rising = ratios[n - 1] > ratios[n - 2] && ratios[n - 2] > ratios[n - 3] && ratios[n - 3] > ratios[n - 4];
    if (rising && ratios[n - 1] > 1.01 * ratios[n - 4]) out.infinite = true;
  }
  return out;
}

inline GlsNorm gls_norm(const std::vector<double>& samples, const PsiFunction& psi) {
  return gls_norm([&](double p) { return lp_norm(samples, p); }, psi);
}

inline PsiFunction natural_psi(const ScalarNormOracle& norm, const std::vector<double>& p_grid,
                               std::string tag = "natural") {
  if (p_grid.empty()) throw ArgumentError("natural_psi: empty grid");
  std::vector<double> ps, vs;
  for (double p : p_grid) {
    const double v = norm(p);
    if (!std::isfinite(v)) {
      if (ps.empty()) throw ModelError("natural_psi: family is not in any GLS (infinite norm at the smallest p)");
      break;
    }
    ps.push_back(p);
    vs.push_back(v);
  }
  return PsiFunction::tabulated(std::move(ps), std::move(vs), std::move(tag));
}

// Natural function of a finite family given by samples of each member.
inline PsiFunction natural_psi(const std::vector<std::vector<double>>& family, const std::vector<double>& p_grid) {
  if (family.empty()) throw ArgumentError("natural_psi: empty family");
  return natural_psi(
      [&](double p) {
        double best = 0;
        for (const auto& f : family) best = std::max(best, lp_norm(f, p));
        return best;
      },
      p_grid);
}

struct YfTail {
  double value = 1.0;
  double vstar = 0.0;
  double argmax_p = 1.0;
};

// exp(-v*(ln(y/K))) with v(p) = p ln psi(p)
inline YfTail yf_tail(const PsiFunction& psi, double K, double y) {
  if (!(K > 0)) throw ArgumentError("yf_tail: K must be positive");
  if (y < std::exp(1.0) * K * (1 - 1e-12)) throw DomainError("yf_tail: y below the threshold e*K");
  const double w = std::log(y / K);
  auto g = [&](double p) {
    const double v = psi(p);
    return std::isfinite(v) ? p * w - p * std::log(v) : -kInf;
  };
  const auto grid = psi.grid();
  std::size_t best = 0;
  std::vector<double> gv;
  for (double p : grid) gv.push_back(g(p));
  for (std::size_t i = 1; i < gv.size(); ++i)
    if (gv[i] > gv[best]) best = i;
  YfTail out{1.0, gv[best], grid[best]};
  if (grid.size() > 2) {
    const double lo = grid[best > 0 ? best - 1 : 0];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    auto m = golden_section([&](double p) { return -g(p); }, lo, hi, 1e-12);
    if (-m.f > out.vstar) out = {1.0, -m.f, m.x};
  }
  out.value = std::min(1.0, std::exp(-out.vstar));
  return out;
}

struct MinTail {
  double value = kInf;
  std::vector<double> p;
  std::vector<double> a;
  bool vacuous = true;
};

// inf over p of Y({norm_i psi_i}, p) / u^{sum p}
inline MinTail min_tail_bound(const std::vector<PsiFunction>& psis, const std::vector<double>& norms, double u) {
  const std::size_t k = psis.size();
  if (k == 0 || norms.size() != k) throw ArgumentError("min_tail_bound: need one norm per psi");
  if (!(u > 0)) throw ArgumentError("min_tail_bound: u must be positive");
  std::vector<SupportBound> support(k);
  for (std::size_t i = 0; i < k; ++i) support[i] = {psis[i].b(), psis[i].b_included()};
  NormOracle oracle = [&](std::size_t i, double p) { return norms[i] * psis[i](p); };
  const double lu = std::log(u);

  auto log_bound = [&](const std::vector<double>& p) {
    try {
      const auto h = holder_mixed_bound(oracle, p, support);
      double s = 0;
      for (double v : p) s += v;
      return std::log(h.bound) - s * lu;
    } catch (const NoFiniteBoundError&) {
      return kInf;
    }
  };
  // Feasible range for coordinate i given the others: sum p_j / b_j <= 1.
  auto range = [&](const std::vector<double>& p, std::size_t i) {
    double used = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i && std::isfinite(psis[j].b())) used += p[j] / psis[j].b();
    double hi = std::isfinite(psis[i].b()) ? psis[i].b() * (1.0 - used) : psis[i].grid_top();
    if (std::isfinite(psis[i].b()) && !psis[i].b_included()) hi *= 1.0 - 1e-9;
    hi = std::min(hi, psis[i].grid_top());
    return std::pair{psis[i].p_min(), hi};
  };

  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = psis[i].p_min();
  double cur = log_bound(p);
  for (int pass = 0; pass < 30; ++pass) {
    const double before = cur;
    for (std::size_t i = 0; i < k; ++i) {
      auto [lo, hi] = range(p, i);
      if (!(hi >= lo)) continue;
      auto probe = [&](double x) {
        auto q = p;
        q[i] = x;
        return log_bound(q);
      };
      std::vector<double> xs = hi > lo ? logspace(lo, hi, 24) : std::vector<double>{lo};
      std::size_t bi = 0;
      std::vector<double> fs;
      for (double x : xs) fs.push_back(probe(x));
      for (std::size_t j = 1; j < fs.size(); ++j)
        if (fs[j] < fs[bi]) bi = j;
      double bx = xs[bi], bf = fs[bi];
      if (xs.size() > 2) {
        auto m = golden_section(probe, xs[bi > 0 ? bi - 1 : 0], xs[std::min(bi + 1, xs.size() - 1)], 1e-12);
        if (m.f < bf) {
          bx = m.x;
          bf = m.f;
        }
      }
      if (bf < cur) {
        p[i] = bx;
        cur = bf;
      }
    }
    if (!(before - cur > 1e-12)) break;
  }
  if (!(cur < kInf)) throw NoFiniteBoundError("min_tail_bound: no finite Y found");
  MinTail out;
  out.value = std::exp(cur);
  out.p = p;
  out.a = holder_mixed_bound(oracle, p, support).a;
  out.vacuous = out.value >= 1.0;
  return out;
}

inline double rosenthal_factor(double p, double c_r) { return c_r * p / std::log(p); }

struct RosenthalTransform {
  PsiFunction psi;
  bool trimmed = false;
};

inline RosenthalTransform rosenthal_transform(const PsiFunction& psi, double c_r) {
  if (!(c_r > 0)) throw ArgumentError("rosenthal_transform: C_R must be positive");
  if (psi.is_tabulated()) {
    std::vector<double> ps, vs;
    for (std::size_t i = 0; i < psi.table_p().size(); ++i) {
      const double p = psi.table_p()[i];
      if (p < 2.0) continue;
      ps.push_back(p);
      vs.push_back(rosenthal_factor(p, c_r) * psi.table_v()[i]);
    }
    if (ps.empty()) throw ArgumentError("rosenthal_transform: no grid point with p >= 2");
    const bool trimmed = ps.size() != psi.table_p().size();
    return {PsiFunction::tabulated(std::move(ps), std::move(vs), psi.tag() + "-rosenthal"), trimmed};
  }
  const double lo = std::max(2.0, psi.p_min());
  if (!psi.contains(lo)) throw ArgumentError("rosenthal_transform: support does not reach p = 2");
  auto base = psi;
  return {PsiFunction::closed_form([base, c_r](double p) { return rosenthal_factor(p, c_r) * base(p); }, psi.b(),
                                   psi.b_included(), psi.tag() + "-rosenthal", lo),
          psi.p_min() < 2.0};
}

struct DeltaPlus {
  double value = kInf;
  std::vector<double> alpha;  // per mask
};

using MaskNormOracle = std::function<double(std::size_t, double)>;

// inf over alpha in A(T) of prod_M [K_R(alpha_M s_M) U(M, alpha_M s_M)]^s(M)
inline DeltaPlus delta_plus(const MaskNormOracle& U, const std::vector<double>& s, double c_r) {
  const std::size_t k = s.size();
  if (k == 0) throw ArgumentError("delta_plus: empty moment vector");
  if (!(c_r > 0)) throw ArgumentError("delta_plus: C_R must be positive");
  std::vector<double> hi(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(s[i] > 0)) throw ArgumentError("delta_plus: exponents must be positive");
    hi[i] = std::min(1.0, s[i] / 2.0);  // alpha_M s_M >= 2
  }
  auto objective = [&](const std::vector<double>& t) {
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = s[i] / t[i];
      const double v = rosenthal_factor(p, c_r) * U(i, p);
      if (std::isnan(v) || v == kInf) return kInf;
      if (v <= 0) return -kInf;
      sum += s[i] * std::log(v);
    }
    return sum;
  };
  const auto m = minimize_on_simplex(k, objective, {}, hi);
  if (!(m.value < kInf)) throw NoFiniteBoundError("delta_plus: no finite value on the admissible simplex");
  DeltaPlus out{std::exp(m.value), {}};
  for (double t : m.t) out.alpha.push_back(1.0 / t);
  return out;
}

// Same product at a fixed tuple alpha.
inline double delta_tilde(const MaskNormOracle& U, const std::vector<double>& s, double c_r,
                          const std::vector<double>& alpha) {
  if (alpha.size() != s.size()) throw ArgumentError("delta_tilde: tuple size mismatch");
  double sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = alpha[i] * s[i];
    if (p < 2.0) throw DomainError("delta_tilde: alpha(M) s(M) must be >= 2");
    const double v = rosenthal_factor(p, c_r) * U(i, p);
    if (v <= 0) return 0.0;
    sum += s[i] * std::log(v);
  }
  return std::exp(sum);
}

}  // namespace skorokhod
