#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "core.hpp"
#include "domain.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace skorokhod {

struct UniformMarginal {};

struct BetaMarginal {
  double a = 1.0;
  double b = 1.0;
};

// Piecewise-linear CDF through (x[i], F[i]); x runs from 0 to 1, F from 0 to 1.
struct TabulatedMarginal {
  std::vector<double> x;
  std::vector<double> F;
};

class Marginal {
 public:
  static Marginal uniform() { return Marginal(UniformMarginal{}); }

  static Marginal beta(double a, double b) {
    if (!(a > 0) || !(b > 0)) throw ArgumentError("beta marginal: shape parameters must be positive");
    return Marginal(BetaMarginal{a, b});
  }

  static Marginal tabulated(std::vector<double> x, std::vector<double> F) {
    if (x.size() < 2 || x.size() != F.size()) throw ArgumentError("tabulated marginal: need matching grids of size >= 2");
    if (x.front() != 0.0 || x.back() != 1.0) throw ArgumentError("tabulated marginal: grid must run from 0 to 1");
    if (F.front() != 0.0 || F.back() != 1.0) throw ArgumentError("tabulated marginal: CDF must run from 0 to 1");
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (!(x[i] > x[i - 1])) throw ArgumentError("tabulated marginal: grid must be strictly increasing");
      if (F[i] < F[i - 1]) throw ArgumentError("tabulated marginal: CDF must be nondecreasing");
    }
    return Marginal(TabulatedMarginal{std::move(x), std::move(F)});
  }

  double cdf(double t) const {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    if (std::holds_alternative<UniformMarginal>(form_)) return t;
    if (auto* b = std::get_if<BetaMarginal>(&form_)) return boost::math::ibeta(b->a, b->b, t);
    const auto& tab = std::get<TabulatedMarginal>(form_);
    auto it = std::upper_bound(tab.x.begin(), tab.x.end(), t);
    const auto i = static_cast<std::size_t>(it - tab.x.begin());
    const double w = (t - tab.x[i - 1]) / (tab.x[i] - tab.x[i - 1]);
    return tab.F[i - 1] + w * (tab.F[i] - tab.F[i - 1]);
  }

  double quantile(double u) const {
    if (std::holds_alternative<UniformMarginal>(form_)) return u;
    if (auto* b = std::get_if<BetaMarginal>(&form_)) return boost::math::ibeta_inv(b->a, b->b, u);
    const auto& tab = std::get<TabulatedMarginal>(form_);
    auto it = std::lower_bound(tab.F.begin(), tab.F.end(), u);
    auto i = static_cast<std::size_t>(it - tab.F.begin());
    if (i == 0) return 0.0;
    if (i >= tab.F.size()) return 1.0;
    const double w = (u - tab.F[i - 1]) / (tab.F[i] - tab.F[i - 1]);
    return tab.x[i - 1] + w * (tab.x[i] - tab.x[i - 1]);
  }

  bool is_uniform() const { return std::holds_alternative<UniformMarginal>(form_); }

  std::string describe() const {
    std::ostringstream os;
    if (is_uniform()) {
      os << "uniform";
    } else if (auto* b = std::get_if<BetaMarginal>(&form_)) {
      os << "beta(" << b->a << "," << b->b << ")";
    } else {
      os << "tabulated(" << std::get<TabulatedMarginal>(form_).x.size() << ")";
    }
    return os.str();
  }

 private:
  using Form = std::variant<UniformMarginal, BetaMarginal, TabulatedMarginal>;
  explicit Marginal(Form f) : form_(std::move(f)) {}
  Form form_;
};

struct CovarianceTable {
  Lattice lattice;
  std::vector<double> values;      // N x N row-major
  std::vector<double> std_errors;  // empty for exact tables

  double at(std::size_t a, std::size_t b) const { return values[a * lattice.size() + b]; }
};

struct GaussianFactor {
  Lattice lattice;
  Eigen::MatrixXd factor;  // R = factor * factor^T
  CovarianceTable covariance;
  std::size_t clipped = 0;  // eigenvalues set to zero
};

enum class ModelKind { indicator, centered_indicator, partial_sum, gaussian_ref, constant };

class FieldModel {
 public:
  static FieldModel indicator(std::vector<Marginal> marginals) {
    return indicator_kind(ModelKind::indicator, std::move(marginals));
  }
  static FieldModel centered_indicator(std::vector<Marginal> marginals) {
    return indicator_kind(ModelKind::centered_indicator, std::move(marginals));
  }
  static FieldModel uniform_indicator(std::size_t d, bool centered) {
    return centered ? centered_indicator(std::vector<Marginal>(d, Marginal::uniform()))
                    : indicator(std::vector<Marginal>(d, Marginal::uniform()));
  }

  static FieldModel partial_sum(const FieldModel& base, std::size_t n) {
    if (n < 1) throw ArgumentError("partial-sum: n must be at least 1");
    if (!base.centered()) throw ModelError("partial-sum: base model is not centered");
    FieldModel m;
    m.kind_ = ModelKind::partial_sum;
    m.d_ = base.d_;
    m.base_ = std::make_shared<const FieldModel>(base);
    m.n_ = n;
    return m;
  }

  static FieldModel constant(std::size_t d, double value) {
    if (d < 1 || d > kMaxDimension) throw ArgumentError("constant model: bad dimension");
    FieldModel m;
    m.kind_ = ModelKind::constant;
    m.d_ = d;
    m.value_ = value;
    return m;
  }

  static FieldModel gaussian_ref(std::shared_ptr<const GaussianFactor> factor) {
    FieldModel m;
    m.kind_ = ModelKind::gaussian_ref;
    m.d_ = factor->lattice.dim();
    m.gauss_ = std::move(factor);
    return m;
  }

  ModelKind kind() const { return kind_; }
  std::size_t dim() const { return d_; }
  std::size_t n() const { return n_; }
  const FieldModel& base() const { return *base_; }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const GaussianFactor& gaussian() const { return *gauss_; }
  double constant_value() const { return value_; }

  bool centered() const {
    switch (kind_) {
      case ModelKind::indicator: return false;
      case ModelKind::constant: return value_ == 0.0;
      default: return true;
    }
  }

  bool indicator_based() const { return kind_ == ModelKind::indicator || kind_ == ModelKind::centered_indicator; }

  // F(x) = P(eta < x) for indicator-based models.
  double cdf(const Point& x) const {
    if (x.dim() != d_) throw ArgumentError("cdf: dimension mismatch");
    double f = 1.0;
    for (std::size_t j = 0; j < d_; ++j) f *= marginals_[j].cdf(x[j]);
    return f;
  }

  std::string id() const {
    std::ostringstream os;
    switch (kind_) {
      case ModelKind::indicator:
      case ModelKind::centered_indicator:
        os << (kind_ == ModelKind::indicator ? "indicator(" : "centered-indicator(");
        for (std::size_t j = 0; j < d_; ++j) os << (j ? "," : "") << marginals_[j].describe();
        os << ")";
        break;
      case ModelKind::partial_sum: os << "partial-sum(" << base_->id() << ",n=" << n_ << ")"; break;
      case ModelKind::gaussian_ref:
        os << "gaussian-ref(d=" << d_ << ",m=" << gauss_->lattice.per_axis() << ")";
        break;
      case ModelKind::constant: os << "constant(" << value_ << ")"; break;
    }
    return os.str();
  }

 private:
  static FieldModel indicator_kind(ModelKind kind, std::vector<Marginal> marginals) {
    if (marginals.empty() || marginals.size() > kMaxDimension) throw ArgumentError("indicator model: bad dimension");
    FieldModel m;
    m.kind_ = kind;
    m.d_ = marginals.size();
    m.marginals_ = std::move(marginals);
    return m;
  }

  ModelKind kind_ = ModelKind::constant;
  std::size_t d_ = 1;
  std::vector<Marginal> marginals_;
  std::shared_ptr<const FieldModel> base_;
  std::size_t n_ = 1;
  std::shared_ptr<const GaussianFactor> gauss_;
  double value_ = 0.0;
};

struct SamplePath {
  Lattice lattice;
  std::vector<double> values;
  std::string model_id;
  SeedSpec seed;

  double at(std::size_t node) const { return values[node]; }
  double at(const Point& x) const { return values[lattice.node_of(x)]; }
};

namespace detail {

inline std::vector<double> node_cdf(const FieldModel& model, const Lattice& lattice) {
  std::vector<std::vector<double>> axis(lattice.dim(), std::vector<double>(lattice.per_axis()));
  for (std::size_t j = 0; j < lattice.dim(); ++j)
    for (std::size_t k = 0; k < lattice.per_axis(); ++k) axis[j][k] = model.marginals()[j].cdf(lattice.coord(k));
  std::vector<double> out(lattice.size());
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    double f = 1.0;
    for (std::size_t j = 0; j < lattice.dim(); ++j) f *= axis[j][lattice.axis_index(node, j)];
    out[node] = f;
  }
  return out;
}

inline void draw_eta(const FieldModel& model, StreamKey key, double* eta) {
  StreamRng rng(key);
  for (std::size_t j = 0; j < model.dim(); ++j) eta[j] = model.marginals()[j].quantile(rng.open_uniform());
}

// First axis index k with coord(k) > t, or m when none.
inline std::size_t first_above(const Lattice& lattice, double t) {
  const std::size_t m = lattice.per_axis();
  auto k = static_cast<std::size_t>(std::clamp(std::floor(t * static_cast<double>(m - 1)), 0.0, double(m - 1)));
  while (k > 0 && lattice.coord(k - 1) > t) --k;
  while (k < m && lattice.coord(k) <= t) ++k;
  return k;
}

inline void sample_into(const FieldModel& model, const Lattice& lattice, StreamKey key, std::vector<double>& out);

inline void sample_indicator(const FieldModel& model, const Lattice& lattice, StreamKey key, std::vector<double>& out,
                             const std::vector<double>* cdf) {
  double eta[kMaxDimension];
  draw_eta(model, key, eta);
  std::size_t kstar[kMaxDimension];
  for (std::size_t j = 0; j < lattice.dim(); ++j) kstar[j] = first_above(lattice, eta[j]);
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    bool on = true;
    for (std::size_t j = 0; j < lattice.dim() && on; ++j) on = lattice.axis_index(node, j) >= kstar[j];
    out[node] = on ? 1.0 : 0.0;
    if (cdf) out[node] -= (*cdf)[node];
  }
}

inline void sample_partial_sum(const FieldModel& model, const Lattice& lattice, StreamKey key,
                               std::vector<double>& out) {
  const FieldModel& base = model.base();
  const std::size_t n = model.n();
  const double root_n = std::sqrt(static_cast<double>(n));
  if (base.kind() == ModelKind::centered_indicator) {
    // Count the summands with eta < x through a cumulative histogram.
    std::vector<double> count(lattice.size(), 0.0);
    double eta[kMaxDimension];
    for (std::size_t i = 0; i < n; ++i) {
      draw_eta(base, key.child(i), eta);
      std::size_t node = 0;
      bool inside = true;
      for (std::size_t j = 0; j < lattice.dim(); ++j) {
        const std::size_t k = first_above(lattice, eta[j]);
        if (k >= lattice.per_axis()) inside = false;
        node += k * lattice.stride(j);
      }
      if (inside) count[node] += 1.0;
    }
    for (std::size_t j = 0; j < lattice.dim(); ++j)
      for (std::size_t node = 0; node < lattice.size(); ++node)
        if (lattice.axis_index(node, j) > 0) count[node] += count[node - lattice.stride(j)];
    const auto cdf = node_cdf(base, lattice);
    const double nn = static_cast<double>(n);
    for (std::size_t node = 0; node < lattice.size(); ++node) out[node] = (count[node] - nn * cdf[node]) / root_n;
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> term(lattice.size());
  for (std::size_t i = 0; i < n; ++i) {
    sample_into(base, lattice, key.child(i), term);
    for (std::size_t node = 0; node < lattice.size(); ++node) out[node] += term[node];
  }
  for (auto& v : out) v /= root_n;
}

inline void sample_into(const FieldModel& model, const Lattice& lattice, StreamKey key, std::vector<double>& out) {
  if (model.dim() != lattice.dim()) throw ArgumentError("sample_path: model dimension differs from lattice");
  out.resize(lattice.size());
  switch (model.kind()) {
    case ModelKind::indicator: sample_indicator(model, lattice, key, out, nullptr); return;
    case ModelKind::centered_indicator: {
      const auto cdf = node_cdf(model, lattice);
      sample_indicator(model, lattice, key, out, &cdf);
      return;
    }
    case ModelKind::partial_sum: sample_partial_sum(model, lattice, key, out); return;
    case ModelKind::constant: std::fill(out.begin(), out.end(), model.constant_value()); return;
    case ModelKind::gaussian_ref: {
      const auto& g = model.gaussian();
      if (!(g.lattice == lattice)) throw ArgumentError("gaussian-ref: lattice differs from the covariance lattice");
      StreamRng rng(key);
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(static_cast<Eigen::Index>(lattice.size()));
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
      const Eigen::VectorXd v = g.factor * z;
      for (std::size_t i = 0; i < lattice.size(); ++i) out[i] = v[static_cast<Eigen::Index>(i)];
      return;
    }
  }
}

}  // namespace detail

inline SamplePath sample_path(const FieldModel& model, const Lattice& lattice, StreamKey key) {
  SamplePath path{lattice, {}, model.id(), {}};
  detail::sample_into(model, lattice, key, path.values);
  return path;
}

inline SamplePath sample_path(const FieldModel& model, const Lattice& lattice, const SeedSpec& seed) {
  SamplePath path = sample_path(model, lattice, StreamKey(seed));
  path.seed = seed;
  return path;
}

inline SamplePath partial_sum_path(const FieldModel& base, std::size_t n, const Lattice& lattice,
                                   const SeedSpec& seed) {
  return sample_path(FieldModel::partial_sum(base, n), lattice, seed);
}

// Values at arbitrary points; matches sample_path at lattice nodes.
inline std::vector<double> sample_points(const FieldModel& model, const std::vector<Point>& points, StreamKey key) {
  std::vector<double> out(points.size());
  for (const auto& p : points)
    if (p.dim() != model.dim()) throw ArgumentError("sample_points: dimension mismatch");
  switch (model.kind()) {
    case ModelKind::constant: std::fill(out.begin(), out.end(), model.constant_value()); break;
    case ModelKind::indicator:
    case ModelKind::centered_indicator: {
      double eta[kMaxDimension];
      detail::draw_eta(model, key, eta);
      for (std::size_t i = 0; i < points.size(); ++i) {
        bool on = true;
        for (std::size_t j = 0; j < model.dim(); ++j) on = on && eta[j] < points[i][j];
        out[i] = on ? 1.0 : 0.0;
        if (model.kind() == ModelKind::centered_indicator) out[i] -= model.cdf(points[i]);
      }
      break;
    }
    case ModelKind::partial_sum: {
      const FieldModel& base = model.base();
      const double root_n = std::sqrt(static_cast<double>(model.n()));
      if (base.kind() == ModelKind::centered_indicator) {
        std::vector<double> count(points.size(), 0.0);
        double eta[kMaxDimension];
        for (std::size_t s = 0; s < model.n(); ++s) {
          detail::draw_eta(base, key.child(s), eta);
          for (std::size_t i = 0; i < points.size(); ++i) {
            bool on = true;
            for (std::size_t j = 0; j < model.dim(); ++j) on = on && eta[j] < points[i][j];
            count[i] += on ? 1.0 : 0.0;
          }
        }
        const double nn = static_cast<double>(model.n());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = (count[i] - nn * base.cdf(points[i])) / root_n;
      } else {
        for (std::size_t s = 0; s < model.n(); ++s) {
          const auto term = sample_points(base, points, key.child(s));
          for (std::size_t i = 0; i < points.size(); ++i) out[i] += term[i];
        }
        for (auto& v : out) v /= root_n;
      }
      break;
    }
    case ModelKind::gaussian_ref: {
      const auto& lat = model.gaussian().lattice;
      const auto path = sample_path(model, lat, key);
      for (std::size_t i = 0; i < points.size(); ++i) out[i] = path.values[lat.nearest_node(points[i])];
      break;
    }
  }
  return out;
}

// Exact R(x,y) = E xi(x) xi(y) of the centred version of the model.
inline double model_covariance(const FieldModel& model, const Point& x, const Point& y) {
  require_same_dim(x, y);
  switch (model.kind()) {
    case ModelKind::constant: return 0.0;
    case ModelKind::partial_sum: return model_covariance(model.base(), x, y);
    case ModelKind::gaussian_ref: {
      const auto& g = model.gaussian();
      return g.covariance.at(g.lattice.nearest_node(x), g.lattice.nearest_node(y));
    }
    default: {
      std::vector<double> lo(x.dim());
      for (std::size_t j = 0; j < x.dim(); ++j) lo[j] = std::min(x[j], y[j]);
      return model.cdf(Point(lo)) - model.cdf(x) * model.cdf(y);
    }
  }
}

inline CovarianceTable exact_covariance(const FieldModel& model, const Lattice& lattice) {
  CovarianceTable t{lattice, std::vector<double>(lattice.size() * lattice.size()), {}};
  std::vector<Point> pts;
  for (std::size_t a = 0; a < lattice.size(); ++a) pts.push_back(lattice.point(a));
  for (std::size_t a = 0; a < lattice.size(); ++a)
    for (std::size_t b = a; b < lattice.size(); ++b)
      t.values[a * lattice.size() + b] = t.values[b * lattice.size() + a] = model_covariance(model, pts[a], pts[b]);
  return t;
}

inline CovarianceTable empirical_covariance(const FieldModel& model, const Lattice& lattice, std::size_t replicates,
                                            std::uint64_t master_seed, unsigned workers = 1) {
  if (!model.centered()) throw ModelError("empirical_covariance: model is not centered");
  if (replicates < 2) throw EstimationError("empirical_covariance: need at least 2 replicates");
  const std::size_t n = lattice.size();
  std::vector<double> paths(replicates * n);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const auto p = sample_path(model, lattice, SeedSpec{master_seed, r});
    std::copy(p.values.begin(), p.values.end(), paths.begin() + static_cast<std::ptrdiff_t>(r * n));
  });
  CovarianceTable t{lattice, std::vector<double>(n * n), std::vector<double>(n * n)};
  const double rr = static_cast<double>(replicates);
  std::vector<double> sum(n * n, 0.0), sum2(n * n, 0.0);
  for (std::size_t r = 0; r < replicates; ++r) {
    const double* v = paths.data() + r * n;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) {
        const double prod = v[a] * v[b];
        sum[a * n + b] += prod;
        sum2[a * n + b] += prod * prod;
      }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double mean = sum[a * n + b] / rr;
      const double var = std::max(0.0, sum2[a * n + b] / rr - mean * mean) * rr / (rr - 1);
      t.values[a * n + b] = t.values[b * n + a] = mean;
      t.std_errors[a * n + b] = t.std_errors[b * n + a] = std::sqrt(var / rr);
    }
  return t;
}

inline FieldModel gaussian_reference(const CovarianceTable& cov) {
  const std::size_t n = cov.lattice.size();
  if (cov.values.size() != n * n) throw ArgumentError("gaussian_reference: table size does not match lattice");
  double scale = 0, trace = 0;
  for (double v : cov.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) trace += cov.values[i * n + i];
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (std::abs(cov.values[a * n + b] - cov.values[b * n + a]) > 1e-12 * std::max(scale, 1e-300))
        throw CovarianceError("gaussian_reference: covariance table is not symmetric");
  if (trace < 0) throw CovarianceError("gaussian_reference: negative trace");
  const double eps_psd = 1e-10 * trace;
  Eigen::MatrixXd R(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = cov.values[a * n + b];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  if (eig.info() != Eigen::Success) throw CovarianceError("gaussian_reference: eigendecomposition failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  auto g = std::make_shared<GaussianFactor>();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -eps_psd) throw CovarianceError("gaussian_reference: covariance is not positive semidefinite");
    if (lam[i] < eps_psd) {
      lam[i] = 0.0;
      ++g->clipped;
    }
  }
  g->lattice = cov.lattice;
  g->factor = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  g->covariance = cov;
  return FieldModel::gaussian_ref(std::move(g));
}

}  // namespace skorokhod
