#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "bounds.hpp"
#include "clt.hpp"
#include "config.hpp"
#include "fields.hpp"
#include "glspace.hpp"
#include "io.hpp"
#include "modulus.hpp"
#include "quasidist.hpp"

namespace skorokhod {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitRefused = 3 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "entropy", "modulus", "gls", "bound", "clt", "verify"};
  return names;
}

// Collects report files for one run and writes the manifest last.
class ReportSink {
 public:
  explicit ReportSink(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void csv(const std::string& name, const CsvTable& t) { put(name, t.str()); }
  void json(const std::string& name, const Json& j) { put(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

  void manifest(const std::string& command, const ExperimentConfig& cfg, int exit_code, Json extra,
                bool timestamp = true) const {
    Json m;
    m["command"] = command;
    m["config_hash"] = config_hash(cfg);
    m["seed"] = cfg.seed;
    m["workers"] = cfg.workers;
    if (timestamp) m["created_utc"] = utc_now();
    m["status"] = exit_code == kExitPass ? "pass" : "fail";
    m["exit_code"] = exit_code;
    m["files"] = files_;
    Json c;
    for (const auto& k : config_keys()) c[k.name] = k.get(cfg);
    m["config"] = c;
    for (auto it = extra.begin(); extra.is_object() && it != extra.end(); ++it) m[it.key()] = it.value();
    write_text(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  void put(const std::string& name, const std::string& body) {
    write_text(dir_ / name, body);
    files_.push_back(name);
  }

  static std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct RunOptions {
  bool force = false;
  bool timestamp = true;
  // verify only: called after each criterion finishes
  std::function<void(const CriterionResult&)> on_criterion;
};

struct RunResult {
  int exit_code = kExitPass;
  std::string summary;
  std::vector<std::string> files;
};

namespace detail {

inline void check_budget(const ExperimentConfig& cfg, const RunOptions& opt, double triples) {
  if (triples > kTripleBudget && !opt.force)
    throw ResourceError("estimated " + format_number(triples) + " triple evaluations exceed the budget of " +
                        format_number(kTripleBudget) + "; pass --force to run anyway");
  (void)cfg;
}

inline std::vector<std::string> point_header(std::size_t d, const std::string& prefix = "x") {
  std::vector<std::string> h;
  for (std::size_t j = 0; j < d; ++j) h.push_back(prefix + std::to_string(j + 1));
  return h;
}

// Models whose laws the uniform-in-n checks range over.
inline std::vector<FieldModel> model_family(const ExperimentConfig& cfg) {
  if (cfg.model != "partial-sum") return {cfg.field_model()};
  std::vector<FieldModel> out;
  for (auto n : cfg.n_list) out.push_back(cfg.field_model(n));
  return out;
}

inline std::vector<std::string> model_labels(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.model != "partial-sum") return {cfg.field_model().id()};
  for (auto n : cfg.n_list) out.push_back(std::to_string(n));
  return out;
}

inline std::string marker(bool v) { return v ? "1" : "0"; }

// Natural key estimate, entropy fit and assembled bound table [h][u].
struct NaturalPipeline {
  KeyEstimate key;
  PowerLaw lambda;
  CoveringReport cover;
  std::vector<double> h_grid, u_grid, q, sigma, bound;
  std::vector<std::string> flag;
  bool sigma_decays = false;
};

inline NaturalPipeline natural_pipeline(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Lattice lat = cfg.lattice();
  NaturalPipeline out;
  const double u_top = std::max(cfg.bound_u_grid.back(), 2 * cfg.u0);
  out.key = natural_key_estimate(model_family(cfg), lat, logspace(cfg.u0, u_top, 24), cfg.key_replicates, seed,
                                 cfg.u0, cfg.workers, cfg.interior_mode);
  out.lambda = fit_lambda_power(out.key);
  out.cover = entropy_fit(out.key.q, lat, logspace(0.5, 0.01, 12));
  const SigmaCurve sigma(out.key.q, lat);
  out.sigma_decays = sigma.decays();
  NaturalBound nb;
  nb.c_n = out.cover.cn_envelope;
  nb.gamma = out.cover.fitted_gamma;
  nb.node_count = static_cast<double>(lat.size());
  nb.lambda = out.lambda;
  nb.floor_eps = out.key.q_min_positive;
  out.h_grid = cfg.effective_h_grid();
  out.u_grid = cfg.bound_u_grid;
  std::vector<SeriesValue> qs;
  for (double u : out.u_grid) {
    qs.push_back(nb.q(u).series);
    out.q.push_back(qs.back().value);
  }
  for (double h : out.h_grid) {
    out.sigma.push_back(sigma(2 * h));
    for (const auto& qv : qs) {
      const auto b = assemble_kappa_bound(qv, sigma(2 * h), out.sigma_decays);
      out.bound.push_back(b.value);
      out.flag.push_back(bound_flag(b));
    }
  }
  return out;
}

inline int run_simulate(const ExperimentConfig& cfg, ReportSink& sink) {
  const Lattice lat = cfg.lattice();
  const FieldModel model = cfg.field_model();
  std::vector<std::vector<double>> paths;
  for (std::size_t r = 0; r < cfg.paths; ++r) paths.push_back(sample_path(model, lat, SeedSpec{cfg.seed, r}).values);
  auto header = point_header(lat.dim());
  header.insert(header.begin(), "node");
  for (std::size_t r = 0; r < cfg.paths; ++r) header.push_back("path" + std::to_string(r));
  CsvTable t(header);
  for (std::size_t k = 0; k < lat.size(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    const Point x = lat.point(k);
    for (double c : x.coords()) row.push_back(format_number(c));
    for (const auto& p : paths) row.push_back(format_number(p[k]));
    t.row(row);
  }
  sink.csv("paths.csv", t);

  Json j;
  j["model"] = model.id();
  j["nodes"] = lat.size();
  j["paths"] = cfg.paths;
  const bool small = lat.size() <= 400;
  if (small && model.centered()) {
    const auto exact = exact_covariance(model, lat);
    CsvTable c({"node_a", "node_b", "covariance"});
    for (std::size_t a = 0; a < lat.size(); ++a)
      for (std::size_t b = 0; b < lat.size(); ++b)
        c.row({std::to_string(a), std::to_string(b), format_number(exact.values[a * lat.size() + b])});
    sink.csv("covariance.csv", c);
    const double cost = static_cast<double>(cfg.replicates) * static_cast<double>(lat.size()) *
                        static_cast<double>(cfg.model == "partial-sum" ? cfg.n : 1);
    if (cost <= 5e7 && model.kind() != ModelKind::constant) {
      const auto emp = empirical_covariance(model, lat, cfg.replicates, derive_seed(cfg.seed, 101), cfg.workers);
      CsvTable e({"node_a", "node_b", "covariance", "std_error", "exact"});
      double worst_z = 0;
      for (std::size_t a = 0; a < lat.size(); ++a)
        for (std::size_t b = 0; b < lat.size(); ++b) {
          const auto i = a * lat.size() + b;
          e.row({std::to_string(a), std::to_string(b), format_number(emp.values[i]), format_number(emp.std_errors[i]),
                 format_number(exact.values[i])});
          if (emp.std_errors[i] > 0)
            worst_z = std::max(worst_z, std::abs(emp.values[i] - exact.values[i]) / emp.std_errors[i]);
        }
      sink.csv("covariance_empirical.csv", e);
      j["covariance_worst_z"] = json_number(worst_z);
    }
  }
  sink.json("simulate.json", j);
  return kExitPass;
}

inline int run_entropy(const ExperimentConfig& cfg, ReportSink& sink) {
  const Lattice lat = cfg.lattice();
  const auto q = cfg.quasi_distance();
  const auto rep = entropy_fit(q, lat, cfg.effective_eps_grid());
  CsvTable t({"eps", "count", "greedy_count", "envelope"});
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i)
    t.row({format_number(rep.epsilons[i]), format_number(rep.counts[i]), format_number(rep.greedy_counts[i]),
           format_number(rep.entropy_bound(rep.epsilons[i]))});
  sink.csv("entropy.csv", t);
  const SigmaCurve sigma(q, lat);
  CsvTable s({"h", "sigma"});
  for (double h : cfg.effective_h_grid()) s.values({h, sigma(h)});
  sink.csv("sigma.csv", s);
  double reference = 0;
  if (cfg.q == "power-euclidean")
    reference = static_cast<double>(cfg.d) / cfg.alpha.front();
  else
    for (double a : cfg.alpha) reference += 1 / a;
  Json j;
  j["quasi_distance"] = q.describe();
  j["fitted_gamma"] = json_number(rep.fitted_gamma);
  j["fitted_cn"] = json_number(rep.fitted_cn);
  j["cn_envelope"] = json_number(rep.cn_envelope);
  j["fit_residual"] = json_number(rep.fit_residual);
  j["eps_min"] = json_number(rep.eps_min);
  j["degenerate"] = rep.degenerate;
  j["gamma_reference"] = json_number(reference);
  j["sigma_decays"] = sigma.decays();
  sink.json("entropy.json", j);
  return kExitPass;
}

inline int run_modulus(const ExperimentConfig& cfg, ReportSink& sink, const RunOptions& opt) {
  check_budget(cfg, opt, cfg.estimated_triples());
  const Lattice lat = cfg.lattice();
  const auto q = cfg.quasi_distance();
  const auto h_grid = cfg.effective_h_grid();
  const ModulusEngine engine(lat, q, cfg.interior_mode);
  const ClassicalEngine classical(lat);
  const FieldModel model = cfg.field_model();

  CsvTable paths({"path", "h", "kappa", "omega"});
  for (std::size_t r = 0; r < cfg.paths; ++r) {
    const auto p = sample_path(model, lat, SeedSpec{cfg.seed, r});
    const auto k = engine.kappa_curve(p.values.data(), h_grid);
    const auto w = classical.curve(p.values.data(), h_grid);
    for (std::size_t i = 0; i < h_grid.size(); ++i)
      paths.row({std::to_string(r), format_number(h_grid[i]), format_number(k[i]), format_number(w[i])});
  }
  sink.csv("modulus_paths.csv", paths);

  const auto ks = kappa_samples(model, lat, engine, h_grid, cfg.replicates, derive_seed(cfg.seed, 201), cfg.workers);
  CsvTable tail({"h", "u", "prob", "ci_halfwidth"});
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    const auto tc = tail_from_samples(ks, k, cfg.u_grid);
    for (std::size_t j = 0; j < cfg.u_grid.size(); ++j)
      tail.values({h_grid[k], cfg.u_grid[j], tc.prob[j], tc.ci_halfwidth[j]});
  }
  sink.csv("tail.csv", tail);

  const auto labels = model_labels(cfg);
  const auto ac = arctan_criterion(model_family(cfg), lat, q, h_grid, std::max<std::size_t>(cfg.replicates, 100),
                                   derive_seed(cfg.seed, 202), cfg.workers, cfg.interior_mode);
  CsvTable at({"model", "h", "mean", "se"});
  for (std::size_t m = 0; m < labels.size(); ++m)
    for (std::size_t k = 0; k < h_grid.size(); ++k)
      at.row({labels[m], format_number(h_grid[k]), format_number(ac.mean[m][k]), format_number(ac.se[m][k])});
  for (std::size_t k = 0; k < h_grid.size(); ++k)
    at.row({"max", format_number(h_grid[k]), format_number(ac.max_mean[k]), format_number(ac.max_se[k])});
  sink.csv("arctan.csv", at);

  Json j;
  j["model"] = model.id();
  j["quasi_distance"] = q.describe();
  j["pairs"] = engine.pair_count();
  j["replicates"] = cfg.replicates;
  j["h_grid"] = json_array(h_grid);
  j["arctan_ratio"] = json_number(ac.max_mean.front() / ac.max_mean.back());
  sink.json("modulus.json", j);
  return kExitPass;
}

inline int run_gls(const ExperimentConfig& cfg, ReportSink& sink) {
  const auto psi = gaussian_natural_psi();
  const auto ros = rosenthal_transform(psi, cfg.c_r);
  const auto norm = gls_norm([](double p) { return gaussian_abs_moment_norm(p); }, psi);

  CsvTable pt({"p", "psi_gaussian", "psi_rosenthal"});
  for (double p : psi.grid()) pt.values({p, psi(p), ros.psi(p)});
  sink.csv("psi.csv", pt);

  CsvTable yf({"y", "bound", "gaussian_tail", "argmax_p"});
  for (double y : linspace(std::numbers::e * norm.value, 8.0, 40)) {
    const auto b = yf_tail(psi, norm.value, y);
    yf.values({y, b.value, std::erfc(y / std::numbers::sqrt2), b.argmax_p});
  }
  sink.csv("yf.csv", yf);

  CsvTable mt({"u", "bound", "p1", "p2", "vacuous"});
  for (double u : cfg.bound_u_grid) {
    const auto b = min_tail_bound({psi, psi}, {norm.value, norm.value}, u);
    mt.row({format_number(u), format_number(b.value), format_number(b.p.empty() ? 0.0 : b.p[0]),
            format_number(b.p.size() > 1 ? b.p[1] : 0.0), marker(b.vacuous)});
  }
  sink.csv("min_tail.csv", mt);

  // Equal split on two copies of one Gaussian: the Hölder infimum is E|Z|^p.
  CsvTable hd({"p", "bound", "comonotone_moment", "a1", "a2"});
  for (double p : cfg.p_grid) {
    const auto b = holder_mixed_bound([](std::size_t, double r) { return gaussian_abs_moment_norm(r); },
                                      {p / 2, p / 2});
    hd.values({p, b.bound, std::pow(gaussian_abs_moment_norm(p), p), b.a[0], b.a[1]});
  }
  sink.csv("holder.csv", hd);

  Json j;
  j["gaussian_norm"] = json_number(norm.value);
  j["norm_argmax_p"] = json_number(norm.argmax_p);
  j["c_r"] = json_number(cfg.c_r);
  j["rosenthal_trimmed"] = ros.trimmed;
  sink.json("gls.json", j);
  return kExitPass;
}

inline int run_bound(const ExperimentConfig& cfg, ReportSink& sink, const RunOptions& opt) {
  const auto N = [&](double e) { return cfg.c_n * std::pow(e, -cfg.gamma); };
  Json j;

  CsvTable t31({"u", "closed_form", "series_shifted", "series_literal"});
  for (double u : cfg.bound_u_grid) {
    if (u < 1) continue;
    const auto lam = [&](double v) { return cfg.c_lambda * std::pow(v, cfg.power); };
    t31.values({u, theorem31_bound(cfg.c_n, cfg.c_lambda, cfg.gamma, cfg.power, u),
                q_series(N, lam, u, theorem31_shifted_sequences(cfg.gamma, cfg.power), cfg.tol).value,
                q_series(N, lam, u, theorem31_literal_sequences(cfg.gamma, cfg.power), cfg.tol).value});
  }
  sink.csv("theorem31.csv", t31);

  const auto kind = cfg.sequence_family == "geometric-eps" ? SequenceFamily::Kind::geometric_eps
                                                           : SequenceFamily::Kind::geometric_theta;
  CsvTable qs({"u", "value", "s", "theta0", "divergent", "terms", "closed_form"});
  for (double u : cfg.bound_u_grid) {
    const auto q = q_optimize(N, [&](double v) { return std::pow(v, 2 * cfg.rho); }, u, kind, cfg.tol);
    qs.row({format_number(u), format_number(q.value()), format_number(q.s), format_number(q.theta0),
            marker(q.divergent()), format_number(q.series.terms),
            format_number(example21_closed_form(cfg.c_n, cfg.gamma, cfg.rho, q.s, u))});
  }
  sink.csv("qseries.csv", qs);

  // inf over q <= power of the theorem 3.1 constant K(q) u^-q
  CsvTable env({"u", "value", "argmin_q"});
  const auto log_k = [&](double q) { return std::log(theorem31_bound(cfg.c_n, cfg.c_lambda, cfg.gamma, q, 1.0)); };
  for (double u : cfg.bound_u_grid) {
    if (u < 1) continue;
    const auto e = gls_envelope_example51(log_k, u, 1e-3, cfg.power);
    env.values({u, e.value, e.argmin});
  }
  sink.csv("envelope.csv", env);

  check_budget(cfg, opt,
               ordered_triple_count(cfg.d, cfg.m) * static_cast<double>(cfg.key_replicates) *
                   static_cast<double>(model_family(cfg).size()));
  try {
    const auto np = natural_pipeline(cfg, derive_seed(cfg.seed, 301));
    CsvTable key({"u", "lambda", "lambda_raw", "lambda_fit"});
    for (std::size_t i = 0; i < np.key.u_grid.size(); ++i)
      key.values({np.key.u_grid[i], np.key.lambda[i], np.key.lambda_raw[i], np.lambda(np.key.u_grid[i])});
    sink.csv("key.csv", key);
    CsvTable nb({"h", "u", "q", "sigma_2h", "bound", "flag"});
    for (std::size_t k = 0; k < np.h_grid.size(); ++k)
      for (std::size_t i = 0; i < np.u_grid.size(); ++i) {
        const auto c = k * np.u_grid.size() + i;
        nb.row({format_number(np.h_grid[k]), format_number(np.u_grid[i]), format_number(np.q[i]),
                format_number(np.sigma[k]), format_number(np.bound[c]), np.flag[c]});
      }
    sink.csv("natural_bound.csv", nb);
    j["natural"] = {{"lambda_c", json_number(np.lambda.c)},
                    {"lambda_p", json_number(np.lambda.p)},
                    {"entropy_gamma", json_number(np.cover.fitted_gamma)},
                    {"entropy_cn", json_number(np.cover.cn_envelope)},
                    {"q_min_positive", json_number(np.key.q_min_positive)},
                    {"q_raw_max", json_number(np.key.q_raw_max)},
                    {"sigma_decays", np.sigma_decays}};
  } catch (const DegenerateError& e) {
    j["natural"] = {{"error", e.what()}};
  }

  j["constants"] = {{"c_n", cfg.c_n}, {"c_lambda", cfg.c_lambda}, {"gamma", cfg.gamma},
                    {"rho", cfg.rho}, {"power", cfg.power}, {"u0", cfg.u0}};
  j["sequence_family"] = cfg.sequence_family;
  sink.json("bound.json", j);
  return kExitPass;
}

inline int run_clt(const ExperimentConfig& cfg, ReportSink& sink, const RunOptions& opt) {
  check_budget(cfg, opt, cfg.estimated_triples() * static_cast<double>(cfg.n_list.size()));
  const Lattice lat = cfg.lattice();
  const FieldModel base = cfg.base_model();
  const std::size_t reps = std::max<std::size_t>(cfg.replicates, 1000);
  std::map<std::string, bool> flags;

  std::vector<Point> points;
  for (double t : {0.3, 0.5, 0.7}) points.emplace_back(std::vector<double>(cfg.d, t));
  const auto fdd = fdd_check(base, points, cfg.n_list, reps, derive_seed(cfg.seed, 501), cfg.workers);
  CsvTable ft({"n", "point", "mean", "mean_se", "variance", "variance_target", "variance_se", "kurtosis",
               "kurtosis_se"});
  for (const auto& m : fdd.moments)
    ft.values({static_cast<double>(m.n), static_cast<double>(m.point), m.mean, m.mean_se, m.variance,
               m.variance_target, m.variance_se, m.kurtosis, m.kurtosis_se});
  sink.csv("fdd.csv", ft);
  CsvTable fc({"n", "point_a", "point_b", "covariance", "target", "se"});
  for (const auto& c : fdd.pairs)
    fc.values({static_cast<double>(c.n), static_cast<double>(c.a), static_cast<double>(c.b), c.covariance, c.target,
               c.se});
  sink.csv("fdd_covariance.csv", fc);
  flags["fdd"] = fdd.pass;

  const auto law = sup_statistic_law(base, cfg.n_list.back(), lat, reps, derive_seed(cfg.seed, 502), cfg.workers);
  CsvTable st({"u", "empirical_cdf", "reference_cdf"});
  for (double u : linspace(0.0, law.samples.back(), 101)) st.values({u, law.empirical_cdf(u), law.reference_cdf(u)});
  sink.csv("suplaw.csv", st);
  flags["sup_law"] = law.discrepancy <= cfg.sup_tolerance;

  std::vector<double> ps;
  for (double p : cfg.p_grid)
    if (p > 1) ps.push_back(p);
  const auto ros = rosenthal_empirical(SummandKind::rademacher, ps, cfg.n_list, reps, derive_seed(cfg.seed, 503),
                                       cfg.workers);
  CsvTable rt({"n", "p", "ratio", "se"});
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
    for (std::size_t k = 0; k < ps.size(); ++k)
      rt.values({static_cast<double>(cfg.n_list[i]), ps[k], ros.at(i, k), ros.se[i * ps.size() + k]});
  sink.csv("rosenthal.csv", rt);
  const auto [lo, hi] = std::minmax_element(ros.c_r_by_n.begin(), ros.c_r_by_n.end());
  flags["rosenthal_stable"] = *hi / *lo <= 1.1 / 0.9;

  Json j;
  j["model"] = FieldModel::partial_sum(base, cfg.n_list.back()).id();
  j["n_list"] = cfg.n_list;
  j["sup_discrepancy"] = json_number(law.discrepancy);
  j["sup_at"] = json_number(law.at);
  j["sup_reference"] = law.kind == SupReference::kolmogorov ? "kolmogorov" : "gaussian-simulation";
  j["c_r"] = json_number(ros.c_r);

  ExperimentConfig kc = cfg;
  kc.model = "partial-sum";
  try {
    const auto np = natural_pipeline(kc, derive_seed(cfg.seed, 504));
    const ModulusEngine engine(lat, QuasiDistance::power_euclidean(1.0), cfg.interior_mode);
    const auto tab = uniform_tail_check(base, cfg.n_list, lat, engine, np.h_grid, np.u_grid, cfg.replicates,
                                        derive_seed(cfg.seed, 505), np.bound, cfg.workers);
    CsvTable ut({"h", "u", "mc", "se", "bound"});
    for (std::size_t k = 0; k < tab.h_grid.size(); ++k)
      for (std::size_t i = 0; i < tab.u_grid.size(); ++i) {
        const auto c = tab.index(k, i);
        ut.values({tab.h_grid[k], tab.u_grid[i], tab.mc[c], tab.se[c], tab.bound[c]});
      }
    sink.csv("uniform_tail.csv", ut);
    flags["uniform_tail"] = tab.pass;
    j["certified_cells"] = tab.certified_cells;
    j["violations"] = tab.violations;
  } catch (const DegenerateError& e) {
    j["uniform_tail_error"] = e.what();
  }

  Json f;
  bool all = true;
  for (const auto& [k, v] : flags) {
    f[k] = v;
    all = all && v;
  }
  j["flags"] = f;
  sink.json("clt.json", j);
  return all ? kExitPass : kExitFail;
}

}  // namespace detail

inline CriterionResult criterion_determinism(const AcceptanceSettings& s);

inline std::vector<CriterionResult> run_acceptance(const AcceptanceSettings& s,
                                                   const std::function<void(const CriterionResult&)>& report = {}) {
  using Fn = CriterionResult (*)(const AcceptanceSettings&);
  const Fn all[] = {criterion_single_jump, criterion_oracle_equivalence, criterion_entropy,
                    criterion_series_validity, criterion_power_laws, criterion_spot_values,
                    criterion_gls_tail, criterion_rosenthal, criterion_sup_law,
                    criterion_arctan, criterion_determinism};
  std::vector<CriterionResult> out;
  for (Fn f : all) {
    out.push_back(f(s));
    if (report) report(out.back());
  }
  return out;
}

namespace detail {

inline int run_verify(const ExperimentConfig& cfg, ReportSink& sink, const RunOptions& opt, Json& extra) {
  AcceptanceSettings s;
  s.seed = cfg.seed;
  s.workers = cfg.workers;
  const auto results = run_acceptance(s, opt.on_criterion);
  CsvTable t({"id", "name", "pass", "detail"});
  Json list = Json::array(), full = Json::array();
  bool all = true;
  for (const auto& r : results) {
    t.row({std::to_string(r.id), r.name, marker(r.pass), r.detail});
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}});
    Json m;
    for (const auto& [k, v] : r.metrics) m[k] = json_number(v);
    full.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"metrics", m}});
    all = all && r.pass;
  }
  sink.csv("criteria.csv", t);
  sink.json("criteria.json", full);
  extra["criteria"] = list;
  return all ? kExitPass : kExitFail;
}

}  // namespace detail

// Runs one subcommand and writes its reports plus manifest.json into out_dir.
// Throws ConfigError for usage problems and ResourceError for refusals.
inline RunResult run_subcommand(const std::string& command, const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir, const RunOptions& opt = {}) {
  validate(cfg);
  ReportSink sink(out_dir);
  Json extra = Json::object();
  int code = kExitPass;
  if (command == "simulate")
    code = detail::run_simulate(cfg, sink);
  else if (command == "entropy")
    code = detail::run_entropy(cfg, sink);
  else if (command == "modulus")
    code = detail::run_modulus(cfg, sink, opt);
  else if (command == "gls")
    code = detail::run_gls(cfg, sink);
  else if (command == "bound")
    code = detail::run_bound(cfg, sink, opt);
  else if (command == "clt")
    code = detail::run_clt(cfg, sink, opt);
  else if (command == "verify")
    code = detail::run_verify(cfg, sink, opt, extra);
  else
    throw ConfigError("unknown subcommand '" + command + "'");
  sink.manifest(command, cfg, code, extra, opt.timestamp);
  RunResult r{code, command + ": " + (code == kExitPass ? "pass" : "fail"), sink.files()};
  r.files.push_back("manifest.json");
  return r;
}

// Small configuration used to exercise every report subcommand quickly.
inline ExperimentConfig determinism_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.m = 41;
  c.n = 20;
  c.n_list = {5, 20};
  c.replicates = 1000;
  c.key_replicates = 1000;
  c.paths = 2;
  c.seed = seed;
  c.sup_tolerance = 1.0;
  return c;
}

// 11. Identical CSV bytes across reruns and worker counts.
inline CriterionResult criterion_determinism(const AcceptanceSettings& s) {
  return detail::timed(11, "byte-identical reruns and worker counts", [&](CriterionResult& r) {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("skorokhod-determinism-" + hex64(s.seed));
    fs::remove_all(root);
    const std::vector<std::pair<std::string, unsigned>> runs = {{"a", 1}, {"b", 1}, {"c", 8}};
    std::size_t compared = 0, differing = 0, orphans = 0;
    for (const auto& [tag, workers] : runs) {
      auto cfg = determinism_config(s.seed);
      cfg.workers = workers;
      for (const auto& cmd : subcommands()) {
        if (cmd == "verify") continue;
        const auto res = run_subcommand(cmd, cfg, root / tag / cmd, RunOptions{false, false, {}});
        std::size_t on_disk = 0;
        for (const auto& e : fs::directory_iterator(root / tag / cmd)) {
          (void)e;
          ++on_disk;
        }
        if (on_disk != res.files.size()) ++orphans;
      }
    }
    // Manifests carry the worker count; only CSV bodies are compared.
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
      if (e.path().extension() != ".csv") continue;
      const auto rel = fs::relative(e.path(), root / "a");
      const auto body = read_text(e.path());
      for (const char* other : {"b", "c"}) {
        ++compared;
        if (!fs::exists(root / other / rel) || read_text(root / other / rel) != body) ++differing;
      }
    }
    fs::remove_all(root);
    r.metrics = {{"compared", static_cast<double>(compared)},
                 {"differing", static_cast<double>(differing)},
                 {"orphan_dirs", static_cast<double>(orphans)}};
    r.pass = compared > 0 && differing == 0 && orphans == 0;
    r.detail = std::to_string(compared) + " CSV comparisons (rerun and 8 workers), " + std::to_string(differing) +
               " differ, " + std::to_string(orphans) + " runs with unlisted files";
  });
}

}  // namespace skorokhod
