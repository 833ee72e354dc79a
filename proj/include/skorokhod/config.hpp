#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "io.hpp"
#include "modulus.hpp"
#include "quasidist.hpp"

namespace skorokhod {

inline constexpr double kTripleBudget = 1e9;

struct ExperimentConfig {
  std::size_t d = 1;
  std::size_t m = 101;
  std::string model = "partial-sum";  // indicator | centered-indicator | partial-sum | gaussian-ref | constant
  std::string marginal = "uniform";   // uniform | beta:a:b
  std::size_t n = 50;
  std::vector<std::size_t> n_list{10, 50, 250};
  double constant_value = 0.0;
  std::string q = "power-euclidean";  // power-euclidean | anisotropic-sum
  std::vector<double> alpha{1.0};
  InteriorMode interior_mode = InteriorMode::ordered;
  std::vector<double> h_grid;    // empty: default grid for m
  std::vector<double> eps_grid;  // empty: default radii
  std::vector<double> u_grid{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  std::vector<double> p_grid{2, 4, 6, 8};
  std::vector<double> bound_u_grid{1, 2, 4, 8, 16};
  std::size_t replicates = 1000;
  std::size_t key_replicates = 1000;
  std::size_t paths = 3;
  std::uint64_t seed = 20261015;
  unsigned workers = 1;
  double gamma = 0.5;
  double rho = 0.2;
  double c_n = 1.0;
  double c_lambda = 1.0;
  double power = 2.0;
  double c_r = 0.5;
  double u0 = 0.25;
  double tol = 1e-12;
  double sup_tolerance = 0.05;
  std::string sequence_family = "geometric-theta";  // geometric-eps | geometric-theta

  Lattice lattice() const { return Lattice(d, m); }

  std::vector<Marginal> marginals() const {
    if (marginal == "uniform") return std::vector<Marginal>(d, Marginal::uniform());
    double a = 0, b = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(marginal.substr(marginal.find(':') == std::string::npos ? 0 : 4));
    if (marginal.rfind("beta", 0) == 0 && (is >> c1 >> a >> c2 >> b) && c1 == ':' && c2 == ':')
      return std::vector<Marginal>(d, Marginal::beta(a, b));
    throw ConfigError("config field 'marginal': expected uniform or beta:a:b, got '" + marginal + "'");
  }

  // Summand model for partial sums and the CLT harness.
  FieldModel base_model() const { return FieldModel::centered_indicator(marginals()); }

  FieldModel field_model(std::size_t n_override = 0) const {
    if (model == "indicator") return FieldModel::indicator(marginals());
    if (model == "centered-indicator") return base_model();
    if (model == "partial-sum") return FieldModel::partial_sum(base_model(), n_override ? n_override : n);
    if (model == "constant") return FieldModel::constant(d, constant_value);
    if (model == "gaussian-ref") return gaussian_reference(exact_covariance(base_model(), lattice()));
    throw ConfigError("config field 'model': unknown model '" + model + "'");
  }

  QuasiDistance quasi_distance() const {
    if (q == "power-euclidean") return normalize(QuasiDistance::power_euclidean(alpha.front()), lattice());
    if (q == "anisotropic-sum") return normalize(QuasiDistance::anisotropic_sum(alpha), lattice());
    throw ConfigError("config field 'q': unknown quasi-distance '" + q + "'");
  }

  std::vector<double> effective_h_grid() const { return h_grid.empty() ? default_h_grid(m) : h_grid; }

  // Decreasing radii as entropy_fit expects.
  std::vector<double> effective_eps_grid() const {
    if (eps_grid.empty()) return default_eps_grid(quasi_distance(), lattice());
    return std::vector<double>(eps_grid.rbegin(), eps_grid.rend());
  }

  double estimated_triples() const {
    return ordered_triple_count(d, m) * static_cast<double>(std::max<std::size_t>(replicates, 1));
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

[[noreturn]] inline void bad_field(const std::string& key, const std::string& want, const std::string& got) {
  throw ConfigError("config field '" + key + "': expected " + want + ", got '" + got + "'");
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) bad_field(key, "a real number", v);
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_field(key, "a nonnegative integer", v);
  return out;
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_real(key, s));
  if (out.empty()) bad_field(key, "a nonempty comma-separated list", v);
  return out;
}

inline std::vector<double> parse_grid(const std::string& key, const std::string& v) {
  if (v == "auto") return {};
  auto g = parse_reals(key, v);
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) bad_field(key, "a strictly increasing list", v);
  return g;
}

inline std::string join(const std::vector<double>& v) {
  if (v.empty()) return "auto";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

inline std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string doc;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = ExperimentConfig;
  using namespace detail;
  static const std::vector<ConfigKey> keys = {
      {"d", "dimension (1..8)", [](C& c, const std::string& v) { c.d = parse_uint("d", v); },
       [](const C& c) { return std::to_string(c.d); }},
      {"m", "lattice nodes per axis (>= 2)", [](C& c, const std::string& v) { c.m = parse_uint("m", v); },
       [](const C& c) { return std::to_string(c.m); }},
      {"model", "indicator | centered-indicator | partial-sum | gaussian-ref | constant",
       [](C& c, const std::string& v) { c.model = v; }, [](const C& c) { return c.model; }},
      {"marginal", "uniform | beta:a:b (same on every axis)", [](C& c, const std::string& v) { c.marginal = v; },
       [](const C& c) { return c.marginal; }},
      {"n", "summands for the partial-sum model", [](C& c, const std::string& v) { c.n = parse_uint("n", v); },
       [](const C& c) { return std::to_string(c.n); }},
      {"n_list", "summand counts for uniform-in-n checks",
       [](C& c, const std::string& v) {
         c.n_list.clear();
         for (const auto& s : split_list(v)) c.n_list.push_back(parse_uint("n_list", s));
         if (c.n_list.empty()) bad_field("n_list", "a nonempty list", v);
       },
       [](const C& c) { return join(c.n_list); }},
      {"constant_value", "value of the constant model",
       [](C& c, const std::string& v) { c.constant_value = parse_real("constant_value", v); },
       [](const C& c) { return format_number(c.constant_value); }},
      {"q", "power-euclidean | anisotropic-sum", [](C& c, const std::string& v) { c.q = v; },
       [](const C& c) { return c.q; }},
      {"alpha", "exponent (one value, or d values for anisotropic-sum)",
       [](C& c, const std::string& v) { c.alpha = parse_reals("alpha", v); }, [](const C& c) { return join(c.alpha); }},
      {"interior_mode", "ordered (x2 in [x1,x3]) | unrestricted",
       [](C& c, const std::string& v) {
         if (v == "ordered") {
           c.interior_mode = InteriorMode::ordered;
         } else if (v == "unrestricted") {
           c.interior_mode = InteriorMode::unrestricted;
         } else {
           bad_field("interior_mode", "ordered or unrestricted", v);
         }
       },
       [](const C& c) { return to_string(c.interior_mode); }},
      {"h_grid", "increasing window sizes, or auto", [](C& c, const std::string& v) { c.h_grid = parse_grid("h_grid", v); },
       [](const C& c) { return join(c.h_grid); }},
      {"eps_grid", "increasing covering radii, or auto",
       [](C& c, const std::string& v) { c.eps_grid = parse_grid("eps_grid", v); },
       [](const C& c) { return join(c.eps_grid); }},
      {"u_grid", "increasing thresholds for tail curves",
       [](C& c, const std::string& v) { c.u_grid = parse_grid("u_grid", v); }, [](const C& c) { return join(c.u_grid); }},
      {"p_grid", "increasing moment orders", [](C& c, const std::string& v) { c.p_grid = parse_grid("p_grid", v); },
       [](const C& c) { return join(c.p_grid); }},
      {"bound_u_grid", "increasing thresholds (>= 1) for bound curves",
       [](C& c, const std::string& v) { c.bound_u_grid = parse_grid("bound_u_grid", v); },
       [](const C& c) { return join(c.bound_u_grid); }},
      {"replicates", "Monte Carlo replicates", [](C& c, const std::string& v) { c.replicates = parse_uint("replicates", v); },
       [](const C& c) { return std::to_string(c.replicates); }},
      {"key_replicates", "replicates for the natural key estimate",
       [](C& c, const std::string& v) { c.key_replicates = parse_uint("key_replicates", v); },
       [](const C& c) { return std::to_string(c.key_replicates); }},
      {"paths", "sample paths exported by simulate", [](C& c, const std::string& v) { c.paths = parse_uint("paths", v); },
       [](const C& c) { return std::to_string(c.paths); }},
      {"seed", "master seed", [](C& c, const std::string& v) { c.seed = parse_uint("seed", v); },
       [](const C& c) { return std::to_string(c.seed); }},
      {"workers", "worker threads (0 = all cores)",
       [](C& c, const std::string& v) { c.workers = static_cast<unsigned>(parse_uint("workers", v)); },
       [](const C& c) { return std::to_string(c.workers); }},
      {"gamma", "entropy exponent", [](C& c, const std::string& v) { c.gamma = parse_real("gamma", v); },
       [](const C& c) { return format_number(c.gamma); }},
      {"rho", "lambda(u) = u^(2 rho) exponent", [](C& c, const std::string& v) { c.rho = parse_real("rho", v); },
       [](const C& c) { return format_number(c.rho); }},
      {"c_n", "entropy constant C_N", [](C& c, const std::string& v) { c.c_n = parse_real("c_n", v); },
       [](const C& c) { return format_number(c.c_n); }},
      {"c_lambda", "lambda constant C_lambda", [](C& c, const std::string& v) { c.c_lambda = parse_real("c_lambda", v); },
       [](const C& c) { return format_number(c.c_lambda); }},
      {"power", "lambda power p for the power-law bound", [](C& c, const std::string& v) { c.power = parse_real("power", v); },
       [](const C& c) { return format_number(c.power); }},
      {"c_r", "Rosenthal constant", [](C& c, const std::string& v) { c.c_r = parse_real("c_r", v); },
       [](const C& c) { return format_number(c.c_r); }},
      {"u0", "threshold defining the natural q", [](C& c, const std::string& v) { c.u0 = parse_real("u0", v); },
       [](const C& c) { return format_number(c.u0); }},
      {"tol", "series truncation tolerance", [](C& c, const std::string& v) { c.tol = parse_real("tol", v); },
       [](const C& c) { return format_number(c.tol); }},
      {"sup_tolerance", "largest accepted sup-statistic discrepancy in clt",
       [](C& c, const std::string& v) { c.sup_tolerance = parse_real("sup_tolerance", v); },
       [](const C& c) { return format_number(c.sup_tolerance); }},
      {"sequence_family", "geometric-eps | geometric-theta",
       [](C& c, const std::string& v) { c.sequence_family = v; }, [](const C& c) { return c.sequence_family; }},
  };
  return keys;
}

inline void validate(const ExperimentConfig& c) {
  using detail::bad_field;
  if (c.d < 1 || c.d > kMaxDimension) bad_field("d", "1..8", std::to_string(c.d));
  if (c.m < 2) bad_field("m", "an integer >= 2", std::to_string(c.m));
  if (std::pow(static_cast<double>(c.m), static_cast<double>(c.d)) > static_cast<double>(1u << 24))
    bad_field("m", "at most 2^24 lattice nodes", std::to_string(c.m));
  static const std::vector<std::string> models{"indicator", "centered-indicator", "partial-sum", "gaussian-ref",
                                               "constant"};
  if (std::find(models.begin(), models.end(), c.model) == models.end())
    bad_field("model", "one of indicator, centered-indicator, partial-sum, gaussian-ref, constant", c.model);
  (void)c.marginals();
  if (c.n < 1) bad_field("n", "a positive integer", "0");
  for (std::size_t i = 0; i < c.n_list.size(); ++i)
    if (c.n_list[i] < 1 || (i && c.n_list[i] <= c.n_list[i - 1]))
      bad_field("n_list", "a strictly increasing list of positive integers", detail::join(c.n_list));
  if (c.q == "power-euclidean") {
    if (c.alpha.size() != 1) bad_field("alpha", "one exponent for power-euclidean", detail::join(c.alpha));
  } else if (c.q == "anisotropic-sum") {
    if (c.alpha.size() != c.d) bad_field("alpha", "d exponents for anisotropic-sum", detail::join(c.alpha));
  } else {
    bad_field("q", "power-euclidean or anisotropic-sum", c.q);
  }
  for (double a : c.alpha)
    if (!(a > 0)) bad_field("alpha", "positive exponents", detail::join(c.alpha));
  for (double h : c.h_grid)
    if (!(h > 0)) bad_field("h_grid", "positive values", detail::join(c.h_grid));
  for (double e : c.eps_grid)
    if (!(e > 0 && e < 1)) bad_field("eps_grid", "values in (0,1)", detail::join(c.eps_grid));
  if (c.eps_grid.size() == 1 || c.eps_grid.size() == 2) bad_field("eps_grid", "at least 3 radii", detail::join(c.eps_grid));
  if (c.u_grid.empty()) bad_field("u_grid", "a nonempty list", "auto");
  if (c.u_grid.front() <= 0) bad_field("u_grid", "positive values", detail::join(c.u_grid));
  if (c.p_grid.empty() || c.p_grid.front() < 1) bad_field("p_grid", "values >= 1", detail::join(c.p_grid));
  if (c.bound_u_grid.empty() || c.bound_u_grid.front() < 1)
    bad_field("bound_u_grid", "values >= 1", detail::join(c.bound_u_grid));
  if (c.replicates < 100) bad_field("replicates", "at least 100", std::to_string(c.replicates));
  if (c.key_replicates < 1000) bad_field("key_replicates", "at least 1000", std::to_string(c.key_replicates));
  if (!(c.gamma > 0 && c.gamma < 1)) bad_field("gamma", "a value in (0,1)", format_number(c.gamma));
  if (!(c.rho > 0)) bad_field("rho", "a positive value", format_number(c.rho));
  if (!(c.c_n > 0)) bad_field("c_n", "a positive value", format_number(c.c_n));
  if (!(c.c_lambda > 0)) bad_field("c_lambda", "a positive value", format_number(c.c_lambda));
  if (!(c.power > 0)) bad_field("power", "a positive value", format_number(c.power));
  if (!(c.c_r > 0)) bad_field("c_r", "a positive value", format_number(c.c_r));
  if (!(c.u0 > 0)) bad_field("u0", "a positive value", format_number(c.u0));
  if (!(c.tol > 0 && c.tol < 1)) bad_field("tol", "a value in (0,1)", format_number(c.tol));
  if (!(c.sup_tolerance > 0)) bad_field("sup_tolerance", "a positive value", format_number(c.sup_tolerance));
  if (c.sequence_family != "geometric-eps" && c.sequence_family != "geometric-theta")
    bad_field("sequence_family", "geometric-eps or geometric-theta", c.sequence_family);
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
  ExperimentConfig c;
  const auto& keys = config_keys();
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == keys.end()) throw ConfigError(where + ": unknown config field '" + key + "'");
    if (seen.count(key)) throw ConfigError(where + ": config field '" + key + "' set twice");
    seen[key] = lineno;
    try {
      it->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_text(path), path.filename().string());
}

// Every effective value, one key per line, in registry order. The worker
// count does not change results and is left out.
inline std::string canonical(const ExperimentConfig& c) {
  std::string s;
  for (const auto& k : config_keys())
    if (k.name != "workers") s += k.name + " = " + k.get(c) + "\n";
  return s;
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(canonical(c))); }

}  // namespace skorokhod
