#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "clt.hpp"
#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "glspace.hpp"
#include "io.hpp"
#include "modulus.hpp"
#include "quasidist.hpp"
#include "rng.hpp"

namespace skorokhod {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::map<std::string, double> metrics;
  double seconds = 0.0;
};

struct AcceptanceSettings {
  std::uint64_t seed = 20261015;
  unsigned workers = 1;
  std::size_t tail_replicates = 2000;       // criterion 4
  std::size_t key_replicates = 2000;        // criterion 4
  std::size_t rosenthal_replicates = 20000;  // criterion 8
  std::size_t sup_replicates = 2000;        // criterion 9
  std::size_t arctan_replicates = 1000;     // criterion 10
  double u0 = 0.25;                         // criterion 4
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// Straight triple loop over coordinates, independent of the engine's pair tables.
inline double naive_kappa(const Lattice& lat, const std::vector<double>& v, const QuasiDistance& q, double h,
                          InteriorMode mode) {
  const std::size_t n = lat.size(), d = lat.dim();
  double best = 0;
  std::vector<std::size_t> ia(d), ic(d), ib(d);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      bool ordered = true;
      for (std::size_t j = 0; j < d; ++j) {
        ia[j] = lat.axis_index(a, j);
        ic[j] = lat.axis_index(c, j);
        ordered = ordered && ia[j] <= ic[j];
      }
      if (!ordered) continue;
      if (q(lat.point(a), lat.point(c)) > h + kWindowTol) continue;
      for (std::size_t b = 0; b < n; ++b) {
        bool inside = true;
        for (std::size_t j = 0; j < d; ++j) {
          ib[j] = lat.axis_index(b, j);
          inside = inside && ia[j] <= ib[j] && ib[j] <= ic[j];
        }
        if (mode == InteriorMode::ordered && !inside) continue;
        double t = kInf;
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
          std::size_t z = 0;
          for (std::size_t j = d; j-- > 0;) z = z * lat.per_axis() + ((mask >> j) & 1 ? ic[j] : ia[j]);
          t = std::min(t, std::abs(v[b] - v[z]));
        }
        best = std::max(best, t);
      }
    }
  return best;
}

template <class F>
CriterionResult timed(int id, std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

// 1. Single-jump indicator paths have zero modulus for every window.
inline CriterionResult criterion_single_jump(const AcceptanceSettings&) {
  return detail::timed(1, "modulus of single-jump paths is zero", [&](CriterionResult& r) {
    double worst = 0;
    std::size_t checked = 0;
    for (std::size_t m : {51, 101, 201}) {
      const Lattice lat(1, m);
      for (const auto& q : {normalize(QuasiDistance::power_euclidean(1.0), lat),
                            normalize(QuasiDistance::anisotropic_sum({2.0}), lat)}) {
        const ModulusEngine engine(lat, q);
        std::vector<double> h_grid = default_h_grid(m);
        h_grid.push_back(1.0);
        for (std::size_t jump = 0; jump <= m; ++jump)
          for (double height : {1.0, -2.5}) {
            std::vector<double> v(m);
            for (std::size_t k = 0; k < m; ++k) v[k] = k >= jump ? height : 0.0;
            for (double kap : engine.kappa_curve(v.data(), h_grid)) worst = std::max(worst, kap);
            if (m == 51) worst = std::max(worst, detail::naive_kappa(lat, v, q, 1.0, InteriorMode::ordered));
            ++checked;
          }
      }
    }
    r.metrics = {{"paths", static_cast<double>(checked)}, {"max_kappa", worst}};
    r.pass = worst == 0.0;
    r.detail = std::to_string(checked) + " paths, max kappa " + detail::fmt(worst);
  });
}

// 2. Production modulus equals the naive triple loop.
inline CriterionResult criterion_oracle_equivalence(const AcceptanceSettings& s) {
  return detail::timed(2, "ps_modulus equals naive triple loop", [&](CriterionResult& r) {
    std::size_t mismatches = 0, comparisons = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      StreamRng rng(StreamKey(SeedSpec{derive_seed(s.seed, 2), i}));
      const std::size_t d = i % 2 ? 2 : 1;
      const std::size_t m = d == 1 ? 6 + rng() % 7 : 3 + rng() % 6;
      const Lattice lat(d, m);
      const auto q = i % 3 == 0 ? normalize(QuasiDistance::power_euclidean(1.0 + static_cast<double>(i % 4) * 0.5), lat)
                                : normalize(QuasiDistance::anisotropic_sum(std::vector<double>(d, 1.0 + static_cast<double>(i % 3))), lat);
      const InteriorMode mode = i % 5 == 4 ? InteriorMode::unrestricted : InteriorMode::ordered;
      std::normal_distribution<double> normal;
      std::vector<double> v(lat.size());
      for (auto& x : v) x = i % 4 == 3 ? std::floor(3 * rng.uniform()) : normal(rng);
      const ModulusEngine engine(lat, q, mode);
      std::vector<double> h_grid;
      for (std::size_t k = 0; k < engine.pair_count(); ++k)
        if (engine.pair_q(k) > 0 && (h_grid.empty() || engine.pair_q(k) > h_grid.back())) h_grid.push_back(engine.pair_q(k));
      const auto prod = engine.kappa_curve(v.data(), h_grid);
      for (std::size_t k = 0; k < h_grid.size(); ++k) {
        ++comparisons;
        if (prod[k] != detail::naive_kappa(lat, v, q, h_grid[k], mode)) ++mismatches;
      }
    }
    r.metrics = {{"comparisons", static_cast<double>(comparisons)}, {"mismatches", static_cast<double>(mismatches)}};
    r.pass = mismatches == 0;
    r.detail = std::to_string(comparisons) + " (path, h) comparisons, " + std::to_string(mismatches) + " mismatches";
  });
}

// 3. Entropy exponents d/alpha and sum 1/alpha(j).
inline CriterionResult criterion_entropy(const AcceptanceSettings&) {
  return detail::timed(3, "entropy exponent recovery", [&](CriterionResult& r) {
    struct Case {
      std::string tag;
      QuasiDistance q;
      Lattice lat;
      double target;
    };
    std::vector<Case> cases = {
        {"d1_a1", QuasiDistance::power_euclidean(1.0), Lattice(1, 1024), 1.0},
        {"d1_a2", QuasiDistance::power_euclidean(2.0), Lattice(1, 1024), 0.5},
        {"d2_a1", QuasiDistance::power_euclidean(1.0), Lattice(2, 128), 2.0},
        {"d2_aniso_1_2", QuasiDistance::anisotropic_sum({1.0, 2.0}), Lattice(2, 128), 1.5},
    };
    r.pass = true;
    std::ostringstream os;
    for (const auto& c : cases) {
      const auto q = normalize(c.q, c.lat);
      const auto rep = entropy_fit(q, c.lat, default_eps_grid(q, c.lat));
      const double rel = rep.fitted_gamma / c.target - 1;
      r.metrics["gamma_" + c.tag] = rep.fitted_gamma;
      r.metrics["rel_err_" + c.tag] = rel;
      r.pass = r.pass && std::abs(rel) <= 0.15;
      os << c.tag << " " << detail::fmt(rep.fitted_gamma) << " (target " << detail::fmt(c.target) << ") ";
      if (c.tag == "d2_aniso_1_2") {
        const double harmonic = 1.0 / (1.0 / 1.0 + 1.0 / 2.0);
        r.metrics["alt_target_reciprocal_form"] = harmonic;
        os << "reciprocal form " << detail::fmt(harmonic) << " "
           << (std::abs(rep.fitted_gamma - c.target) < std::abs(rep.fitted_gamma - harmonic) ? "rejected" : "favoured");
      }
    }
    r.detail = os.str();
  });
}

struct SeriesValidityResult {
  KeyEstimate key;
  PowerLaw lambda;
  CoveringReport cover;
  UniformTailTable table;
  KeyAudit audit;
  std::vector<double> q_values;
};

// Headline pipeline: natural key estimate -> Q series -> Q sigma(2h) vs Monte Carlo.
inline SeriesValidityResult series_validity(const AcceptanceSettings& s, std::size_t m = 200,
                                            std::vector<std::size_t> n_list = {10, 50, 250}) {
  const Lattice lat(1, m);
  const auto base = FieldModel::uniform_indicator(1, true);
  std::vector<FieldModel> models;
  for (auto n : n_list) models.push_back(FieldModel::partial_sum(base, n));
  SeriesValidityResult out;
  out.key = natural_key_estimate(models, lat, logspace(s.u0, 8.0, 24), s.key_replicates, derive_seed(s.seed, 401),
                                 s.u0, s.workers);
  out.audit = audit_key_estimate(out.key, models, s.key_replicates, derive_seed(s.seed, 402), s.workers);
  out.lambda = fit_lambda_power(out.key);
  out.cover = entropy_fit(out.key.q, lat, logspace(0.5, 0.01, 12));
  const SigmaCurve sigma(out.key.q, lat);
  NaturalBound nb;
  nb.c_n = out.cover.cn_envelope;
  nb.gamma = out.cover.fitted_gamma;
  nb.node_count = static_cast<double>(lat.size());
  nb.lambda = out.lambda;
  nb.floor_eps = out.key.q_min_positive;
  const auto h_grid = default_h_grid(m);
  const auto u_grid = logspace(1.0, 16.0, 12);
  std::vector<double> bound;
  for (double u : u_grid) out.q_values.push_back(nb.q(u).value());
  for (double h : h_grid)
    for (std::size_t j = 0; j < u_grid.size(); ++j)
      bound.push_back(assemble_kappa_bound(out.q_values[j], sigma(2 * h), sigma.decays()).value);
  const ModulusEngine engine(lat, QuasiDistance::power_euclidean(1.0));
  out.table = uniform_tail_check(base, n_list, lat, engine, h_grid, u_grid, s.tail_replicates,
                                 derive_seed(s.seed, 403), bound, s.workers);
  return out;
}

// 4. Assembled bound dominates the Monte Carlo tail wherever it is below 1.
inline CriterionResult criterion_series_validity(const AcceptanceSettings& s) {
  return detail::timed(4, "series bound dominates MC tail", [&](CriterionResult& r) {
    const auto res = series_validity(s);
    const auto& t = res.table;
    double min_gap = kInf;
    for (std::size_t i = 0; i < t.bound.size(); ++i)
      if (t.bound[i] < 1.0) min_gap = std::min(min_gap, t.bound[i] - (t.mc[i] + 4 * t.se[i]));
    r.metrics = {{"certified_cells", static_cast<double>(t.certified_cells)},
                 {"violations", static_cast<double>(t.violations)},
                 {"min_gap", min_gap},
                 {"lambda_c", res.lambda.c},
                 {"lambda_p", res.lambda.p},
                 {"entropy_gamma", res.cover.fitted_gamma},
                 {"key_audit_violations", static_cast<double>(res.audit.violations)}};
    r.pass = t.violations == 0 && t.certified_cells > 0;
    r.detail = std::to_string(t.certified_cells) + " cells with bound < 1, " + std::to_string(t.violations) +
               " violations, smallest margin " + detail::fmt(min_gap) + "; key audit " +
               std::to_string(res.audit.violations) + "/" + std::to_string(res.audit.cells) + " cells above 4 SE";
  });
}

// 5. Log-log slopes and the divergence boundary.
inline CriterionResult criterion_power_laws(const AcceptanceSettings&) {
  return detail::timed(5, "power-law exponents and divergence", [&](CriterionResult& r) {
    const double gamma = 0.3, rho = 0.2, p = 2.0;
    const auto us = logspace(1.0, 1e4, 9);
    std::vector<double> lx, lq, lt;
    for (double u : us) {
      const auto q = q_optimize([&](double e) { return std::pow(e, -gamma); },
                                [&](double v) { return std::pow(v, 2 * rho); }, u);
      lx.push_back(std::log(u));
      lq.push_back(std::log(q.value()));
      lt.push_back(std::log(theorem31_bound(1.0, 1.0, 0.5, p, u)));
    }
    const double slope_q = least_squares(lx, lq).slope, slope_t = least_squares(lx, lt).slope;
    std::size_t wrong = 0;
    const std::vector<std::pair<double, double>> pairs = {{0.3, 0.2}, {0.5, 0.2},  {0.5, 0.24}, {0.5, 0.25},
                                                          {0.5, 0.26}, {0.2, 0.45}, {0.6, 0.3}, {0.1, 0.1}};
    for (auto [g, rh] : pairs) {
      const auto q = q_optimize([&](double e) { return std::pow(e, -g); },
                                [&](double v) { return std::pow(v, 2 * rh); }, 4.0);
      if (q.divergent() != (g + 2 * rh >= 1.0)) ++wrong;
    }
    r.metrics = {{"slope_q", slope_q}, {"target_q", -2 * rho}, {"slope_thm31", slope_t}, {"target_thm31", -p},
                 {"divergence_misclassified", static_cast<double>(wrong)}};
    r.pass = std::abs(slope_q + 2 * rho) <= 0.05 && std::abs(slope_t + p) <= 0.05 && wrong == 0;
    r.detail = "Q slope " + detail::fmt(slope_q) + " (target " + detail::fmt(-2 * rho) + "), bound slope " +
               detail::fmt(slope_t) + " (target " + detail::fmt(-p) + "), " + std::to_string(wrong) + "/" +
               std::to_string(pairs.size()) + " divergence flags wrong";
  });
}

// 6. Closed-form spot values.
inline CriterionResult criterion_spot_values(const AcceptanceSettings&) {
  return detail::timed(6, "closed-form spot values", [&](CriterionResult& r) {
    const double t31 = theorem31_bound(1, 1, 0.5, 2, 10);
    const double qs = q_series([](double e) { return std::pow(e, -0.5); }, [](double u) { return std::pow(u, 0.25); },
                               16.0, SequenceFamily::geometric_eps(0.5))
                          .value;
    const double env = gls_envelope_example51([](double q) { return q * std::log(q); }, std::exp(2.0)).value;
    const double env_target = std::exp(-std::numbers::e);
    r.metrics = {{"theorem31", t31}, {"q_series", qs}, {"envelope", env}, {"envelope_target", env_target}};
    r.pass = std::abs(t31 - 4.966) <= 0.001 && std::abs(qs - 7.4746) <= 0.0005 && std::abs(env - env_target) <= 1e-4;
    r.detail = "theorem31 " + detail::fmt(t31, 6) + ", q_series " + detail::fmt(qs, 6) + ", envelope " +
               detail::fmt(env, 6) + " vs " + detail::fmt(env_target, 6);
  });
}

// 7. Young-Fenchel tail dominates the Gaussian tail.
inline CriterionResult criterion_gls_tail(const AcceptanceSettings&) {
  return detail::timed(7, "GLS tail dominates Gaussian tail", [&](CriterionResult& r) {
    const auto psi = gaussian_natural_psi();
    const auto norm = gls_norm([](double p) { return gaussian_abs_moment_norm(p); }, psi);
    double min_margin = kInf;
    for (double y : linspace(std::numbers::e, 8.0, 20)) {
      const double tail = std::erfc(y / std::numbers::sqrt2);
      min_margin = std::min(min_margin, yf_tail(psi, norm.value, y).value - tail);
    }
    r.metrics = {{"norm", norm.value}, {"min_margin", min_margin}};
    r.pass = min_margin >= 0;
    r.detail = "norm " + detail::fmt(norm.value) + ", smallest margin " + detail::fmt(min_margin);
  });
}

// 8. Rademacher Rosenthal table.
inline CriterionResult criterion_rosenthal(const AcceptanceSettings& s) {
  return detail::timed(8, "Rosenthal dominance and stable C_R", [&](CriterionResult& r) {
    std::vector<std::size_t> ns;
    for (std::size_t n = 2; n <= 1024; n *= 2) ns.push_back(n);
    const auto t = rosenthal_empirical(SummandKind::rademacher, {2, 4, 6, 8}, ns, s.rosenthal_replicates,
                                       derive_seed(s.seed, 8), s.workers);
    double worst_z = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double exact = std::pow(3.0 - 2.0 / static_cast<double>(ns[i]), 0.25);
      worst_z = std::max(worst_z, std::abs(t.at(i, 1) - exact) / t.se[i * 4 + 1]);
    }
    const auto [lo, hi] = std::minmax_element(t.c_r_by_n.begin(), t.c_r_by_n.end());
    const double spread = *hi / *lo;
    r.metrics = {{"worst_z_p4", worst_z}, {"c_r_min", *lo}, {"c_r_max", *hi}, {"c_r_spread", spread}};
    r.pass = worst_z <= 4.0 && spread <= 1.1 / 0.9;
    r.detail = "p=4 worst |z| " + detail::fmt(worst_z) + ", C_R(n) in [" + detail::fmt(*lo) + ", " + detail::fmt(*hi) +
               "]";
  });
}

// 9. Sup statistic against the Kolmogorov law.
inline CriterionResult criterion_sup_law(const AcceptanceSettings& s) {
  return detail::timed(9, "sup statistic vs Kolmogorov law", [&](CriterionResult& r) {
    const auto law = sup_statistic_law(FieldModel::uniform_indicator(1, true), 1000, Lattice(1, 200),
                                       s.sup_replicates, derive_seed(s.seed, 9), s.workers);
    r.metrics = {{"discrepancy", law.discrepancy}, {"at", law.at}};
    r.pass = law.discrepancy <= 0.05;
    r.detail = "discrepancy " + detail::fmt(law.discrepancy) + " at u=" + detail::fmt(law.at) + " (limit 0.05)";
  });
}

// 10. E arctan kappa shrinks with the window.
inline CriterionResult criterion_arctan(const AcceptanceSettings& s) {
  return detail::timed(10, "arctan membership trend", [&](CriterionResult& r) {
    const std::size_t m = 200;
    const Lattice lat(1, m);
    const auto c = arctan_criterion({FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 50)}, lat,
                                    QuasiDistance::power_euclidean(1.0), default_h_grid(m), s.arctan_replicates,
                                    derive_seed(s.seed, 10), s.workers);
    std::size_t inversions = 0, bad = 0;
    for (std::size_t k = 0; k + 1 < c.h_grid.size(); ++k) {
      const double drop = c.max_mean[k] - c.max_mean[k + 1];
      if (drop > 0) {
        ++inversions;
        if (drop > 1.96 * std::hypot(c.max_se[k], c.max_se[k + 1])) ++bad;
      }
    }
    const double ratio = c.max_mean.front() / c.max_mean.back();
    r.metrics = {{"ratio", ratio}, {"inversions", static_cast<double>(inversions)},
                 {"smallest_h", c.max_mean.front()}, {"largest_h", c.max_mean.back()}};
    r.pass = inversions <= 1 && bad == 0 && ratio < 0.2;
    r.detail = "ratio " + detail::fmt(ratio) + ", " + std::to_string(inversions) + " inversions";
  });
}

}  // namespace skorokhod
