#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"
#include "domain.hpp"

namespace skorokhod {

struct PowerEuclidean {
  double alpha = 1.0;
  double c = 1.0;
};

struct AnisotropicSum {
  std::vector<double> alpha;
  double c = 1.0;
};

// Values on all node pairs of a lattice, row-major N x N.
struct TabulatedQ {
  Lattice lattice;
  std::shared_ptr<const std::vector<double>> values;
  std::string origin;
};

class QuasiDistance {
 public:
  using Family = std::variant<PowerEuclidean, AnisotropicSum, TabulatedQ>;

  static QuasiDistance power_euclidean(double alpha, double c = 1.0) {
    if (!(alpha > 0) || !(c > 0)) throw ArgumentError("power-euclidean: alpha and C must be positive");
    return QuasiDistance(PowerEuclidean{alpha, c});
  }

  static QuasiDistance anisotropic_sum(std::vector<double> alpha, double c = 1.0) {
    if (alpha.empty()) throw ArgumentError("anisotropic-sum: empty exponent list");
    for (double a : alpha)
      if (!(a > 0)) throw ArgumentError("anisotropic-sum: exponents must be positive");
    if (!(c > 0)) throw ArgumentError("anisotropic-sum: C must be positive");
    return QuasiDistance(AnisotropicSum{std::move(alpha), c});
  }

  static QuasiDistance tabulated(const Lattice& lattice, std::vector<double> values, std::string origin = "tabulated") {
    const std::size_t n = lattice.size();
    if (values.size() != n * n) throw ArgumentError("tabulated q: table size does not match lattice");
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i * n + i] != 0.0) throw ArgumentError("tabulated q: nonzero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        const double v = values[i * n + j];
        if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("tabulated q: negative or non-finite value");
        if (v != values[j * n + i]) throw ArgumentError("tabulated q: table is not symmetric");
      }
    }
    return QuasiDistance(
        TabulatedQ{lattice, std::make_shared<const std::vector<double>>(std::move(values)), std::move(origin)});
  }

  double operator()(const Point& x, const Point& y) const {
    require_same_dim(x, y);
    return scale_ * raw(x, y);
  }

  // Value between two nodes of a lattice.
  double between_nodes(const Lattice& lattice, std::size_t a, std::size_t b) const {
    if (auto* t = std::get_if<TabulatedQ>(&family_); t && t->lattice == lattice)
      return scale_ * (*t->values)[a * lattice.size() + b];
    return (*this)(lattice.point(a), lattice.point(b));
  }

  double scale() const { return scale_; }
  const Family& family() const { return family_; }

  QuasiDistance scaled(double factor) const {
    if (!(factor > 0) || !std::isfinite(factor)) throw ArgumentError("QuasiDistance: scale factor must be positive");
    QuasiDistance out = *this;
    out.scale_ *= factor;
    return out;
  }

  bool translation_invariant() const { return !std::holds_alternative<TabulatedQ>(family_); }

  std::string describe() const {
    std::ostringstream os;
    if (auto* p = std::get_if<PowerEuclidean>(&family_)) {
      os << "power-euclidean(alpha=" << p->alpha << ",C=" << p->c << ")";
    } else if (auto* a = std::get_if<AnisotropicSum>(&family_)) {
      os << "anisotropic-sum(alpha=";
      for (std::size_t j = 0; j < a->alpha.size(); ++j) os << (j ? ":" : "") << a->alpha[j];
      os << ",C=" << a->c << ")";
    } else {
      os << "tabulated(" << std::get<TabulatedQ>(family_).origin << ")";
    }
    os << "*" << scale_;
    return os.str();
  }

 private:
  explicit QuasiDistance(Family f) : family_(std::move(f)) {}

  double raw(const Point& x, const Point& y) const {
    if (auto* p = std::get_if<PowerEuclidean>(&family_)) {
      double s = 0;
      for (std::size_t j = 0; j < x.dim(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
      return p->c * std::pow(std::sqrt(s), p->alpha);
    }
    if (auto* a = std::get_if<AnisotropicSum>(&family_)) {
      if (a->alpha.size() != x.dim()) throw ArgumentError("anisotropic-sum: exponent count differs from dimension");
      double s = 0;
      for (std::size_t j = 0; j < x.dim(); ++j) s += std::pow(std::abs(x[j] - y[j]), a->alpha[j]);
      return a->c * s;
    }
    const auto& t = std::get<TabulatedQ>(family_);
    if (x.dim() != t.lattice.dim()) throw ArgumentError("tabulated q: dimension mismatch");
    // Off-lattice queries use the nearest node; symmetry and q(x,x)=0 survive.
    const std::size_t a = t.lattice.nearest_node(x), b = t.lattice.nearest_node(y);
    return (*t.values)[a * t.lattice.size() + b];
  }

  Family family_;
  double scale_ = 1.0;
};

// Fast q lookup on the nodes of one lattice. Translation-invariant families go
// through a table indexed by the per-axis absolute offset.
class PairEvaluator {
 public:
  PairEvaluator(const QuasiDistance& q, const Lattice& lattice) : lattice_(lattice) {
    if (auto* t = std::get_if<TabulatedQ>(&q.family())) {
      if (!(t->lattice == lattice)) throw ArgumentError("tabulated q: lattice mismatch");
      tab_ = t->values;
      tab_scale_ = q.scale();
      return;
    }
    const Point origin(std::vector<double>(lattice.dim(), 0.0));
    offsets_.resize(lattice.size());
    for (std::size_t k = 0; k < lattice.size(); ++k) offsets_[k] = q(origin, lattice.point(k));
  }

  double operator()(std::size_t a, std::size_t b) const {
    if (tab_) return tab_scale_ * (*tab_)[a * lattice_.size() + b];
    return offsets_[offset_index(a, b)];
  }

  std::size_t offset_index(std::size_t a, std::size_t b) const {
    std::size_t k = 0;
    for (std::size_t j = 0; j < lattice_.dim(); ++j) {
      const std::size_t ia = lattice_.axis_index(a, j), ib = lattice_.axis_index(b, j);
      k += (ia > ib ? ia - ib : ib - ia) * lattice_.stride(j);
    }
    return k;
  }

  bool tabulated() const { return static_cast<bool>(tab_); }
  const std::vector<double>& offset_values() const { return offsets_; }
  const Lattice& lattice() const { return lattice_; }

  double max_value() const {
    if (!tab_) return *std::max_element(offsets_.begin(), offsets_.end());
    return tab_scale_ * *std::max_element(tab_->begin(), tab_->end());
  }

  // Smallest q between axis neighbours; balls below this radius hold one node.
  double min_neighbour_value() const {
    double best = kInf;
    for (std::size_t a = 0; a < lattice_.size(); ++a)
      for (std::size_t j = 0; j < lattice_.dim(); ++j) {
        if (lattice_.axis_index(a, j) + 1 >= lattice_.per_axis()) continue;
        best = std::min(best, (*this)(a, a + lattice_.stride(j)));
        if (!tab_) return best;
      }
    return best;
  }

 private:
  Lattice lattice_;
  std::vector<double> offsets_;
  std::shared_ptr<const std::vector<double>> tab_;
  double tab_scale_ = 1.0;
};

inline QuasiDistance normalize(const QuasiDistance& q, const Lattice& lattice) {
  const double mx = PairEvaluator(q, lattice).max_value();
  if (!(mx > 0)) throw DegenerateError("normalize: q is identically zero on the lattice (degenerate distance)");
  return q.scaled(1.0 / mx);
}

inline std::vector<NodeTriple> enumerate_triples(const Lattice& lattice, const QuasiDistance& q, double h,
                                                 InteriorMode mode = InteriorMode::ordered) {
  const PairEvaluator pq(q, lattice);
  std::vector<NodeTriple> out;
  for_each_triple(lattice, pq, h, [&](const NodeTriple& t) { out.push_back(t); }, mode);
  return out;
}

namespace detail {

class BallCover {
 public:
  BallCover(const PairEvaluator& pq, double eps) : pq_(pq), lattice_(pq.lattice()), eps_(eps) {
    if (pq.tabulated()) return;
    // Signed offsets whose absolute offset lies in the ball.
    const auto& table = pq.offset_values();
    const std::size_t d = lattice_.dim(), m = lattice_.per_axis();
    for (std::size_t k = 0; k < table.size(); ++k) {
      if (table[k] > eps_ + kWindowTol) continue;
      std::vector<long> base(d);
      for (std::size_t j = 0; j < d; ++j) base[j] = static_cast<long>(lattice_.axis_index(k, j));
      for (std::uint32_t signs = 0; signs < (1u << d); ++signs) {
        bool dup = false;
        std::vector<long> off(base);
        for (std::size_t j = 0; j < d; ++j)
          if ((signs >> j) & 1u) {
            if (off[j] == 0) dup = true;
            off[j] = -off[j];
          }
        if (!dup) offsets_.push_back(std::move(off));
      }
    }
    (void)m;
  }

  template <class Fn>
  void for_each_member(std::size_t c, Fn&& fn) const {
    const std::size_t n = lattice_.size();
    if (pq_.tabulated()) {
      for (std::size_t x = 0; x < n; ++x)
        if (pq_(c, x) <= eps_ + kWindowTol) fn(x);
      return;
    }
    const std::size_t d = lattice_.dim();
    const long m = static_cast<long>(lattice_.per_axis());
    for (const auto& off : offsets_) {
      std::size_t node = 0;
      bool inside = true;
      for (std::size_t j = 0; j < d && inside; ++j) {
        const long k = static_cast<long>(lattice_.axis_index(c, j)) + off[j];
        if (k < 0 || k >= m) inside = false;
        node += static_cast<std::size_t>(k) * lattice_.stride(j);
      }
      if (inside) fn(node);
    }
  }

 private:
  const PairEvaluator& pq_;
  Lattice lattice_;
  double eps_;
  std::vector<std::vector<long>> offsets_;
};

inline std::size_t greedy_cover(const PairEvaluator& pq, double eps) {
  const std::size_t n = pq.lattice().size();
  if (eps >= pq.max_value() - kWindowTol) return 1;
  const BallCover balls(pq, eps);
  std::vector<char> covered(n, 0);
  std::size_t remaining = n;
  auto gain = [&](std::size_t c) {
    std::size_t g = 0;
    balls.for_each_member(c, [&](std::size_t x) { g += covered[x] ? 0 : 1; });
    return g;
  };
  // Max gain first, lowest index on ties.
  using Entry = std::pair<std::size_t, std::size_t>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (std::size_t c = 0; c < n; ++c) heap.emplace(gain(c), c);
  std::size_t count = 0;
  while (remaining > 0 && !heap.empty()) {
    auto [g, c] = heap.top();
    heap.pop();
    const std::size_t fresh = gain(c);
    if (fresh != g) {
      if (fresh > 0) heap.emplace(fresh, c);
      continue;
    }
    if (fresh == 0) continue;
    balls.for_each_member(c, [&](std::size_t x) {
      if (!covered[x]) {
        covered[x] = 1;
        --remaining;
      }
    });
    ++count;
  }
  return count;
}

}  // namespace detail

// Greedy max-coverage cover of the lattice by closed q-balls centred on nodes.
inline std::size_t covering_number(const QuasiDistance& q, const Lattice& lattice, double eps) {
  if (!(eps > 0)) throw ArgumentError("covering_number: eps must be positive");
  return detail::greedy_cover(PairEvaluator(q, lattice), eps);
}

struct CoveringReport {
  std::vector<double> epsilons;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> greedy_counts;  // before the monotone running minimum
  double fitted_gamma = 0.0;
  double fitted_cn = 0.0;
  double fit_residual = 0.0;
  double cn_envelope = 0.0;  // smallest C with counts <= C eps^-gamma on the grid
  double eps_min = 0.0;      // below this radius balls hold a single node
  bool degenerate = false;   // counts constant over the grid

  double entropy_bound(double eps) const { return cn_envelope * std::pow(eps, -fitted_gamma); }
};

inline CoveringReport entropy_fit(const QuasiDistance& q, const Lattice& lattice, const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 3) throw FitError("entropy_fit: need at least 3 radii");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0)) throw ArgumentError("entropy_fit: radii must be positive");
    if (i && !(eps_grid[i] < eps_grid[i - 1])) throw ArgumentError("entropy_fit: radii must be strictly decreasing");
  }
  const PairEvaluator pq(q, lattice);
  CoveringReport rep;
  rep.epsilons = eps_grid;
  rep.eps_min = pq.min_neighbour_value();
  for (double e : eps_grid) rep.greedy_counts.push_back(detail::greedy_cover(pq, e));
  rep.counts = rep.greedy_counts;
  // Grid is decreasing; a cover at a smaller radius also covers at a larger one.
  for (std::size_t i = rep.counts.size() - 1; i-- > 0;) rep.counts[i] = std::min(rep.counts[i], rep.counts[i + 1]);

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    lx.push_back(std::log(eps_grid[i]));
    ly.push_back(std::log(static_cast<double>(rep.counts[i])));
  }
  rep.degenerate = rep.counts.front() == rep.counts.back();
  const LinearFit fit = least_squares(lx, ly);
  rep.fitted_gamma = std::max(0.0, -fit.slope);
  rep.fitted_cn = std::exp(fit.intercept);
  rep.fit_residual = fit.residual;
  rep.cn_envelope = 0;
  for (std::size_t i = 0; i < eps_grid.size(); ++i)
    rep.cn_envelope =
        std::max(rep.cn_envelope, static_cast<double>(rep.counts[i]) * std::pow(eps_grid[i], rep.fitted_gamma));
  return rep;
}

// sigma[q](h) = h^-d * max q over node pairs with Euclidean distance <= 2h.
// Default radii for entropy_fit: from q at three lattice spacings to q at
// Euclidean offset 0.2, each taken as the largest value over the axes.
inline std::vector<double> default_eps_grid(const QuasiDistance& q, const Lattice& lattice, std::size_t count = 10) {
  auto axis_q = [&](double r) {
    double e = 0;
    for (std::size_t j = 0; j < lattice.dim(); ++j) {
      std::vector<double> a(lattice.dim(), 0.0), b(lattice.dim(), 0.0);
      b[j] = std::min(r, 1.0);
      e = std::max(e, q(Point(a), Point(b)));
    }
    return e;
  };
  const double lo = axis_q(3 * lattice.spacing()), hi = axis_q(0.2);
  if (!(hi > lo) || !(lo > 0)) throw ArgumentError("default_eps_grid: lattice too coarse for the radius range");
  return logspace(hi, lo, count);
}

class SigmaCurve {
 public:
  SigmaCurve(const QuasiDistance& q, const Lattice& lattice) : d_(lattice.dim()) {
    const PairEvaluator pq(q, lattice);
    std::vector<std::pair<double, double>> pts;  // (distance, q)
    if (!pq.tabulated()) {
      for (std::size_t k = 0; k < lattice.size(); ++k)
        pts.emplace_back(std::sqrt(lattice.squared_distance(0, k)), pq.offset_values()[k]);
    } else {
      for (std::size_t a = 0; a < lattice.size(); ++a)
        for (std::size_t b = a; b < lattice.size(); ++b)
          pts.emplace_back(std::sqrt(lattice.squared_distance(a, b)), pq(a, b));
    }
    std::sort(pts.begin(), pts.end());
    double running = 0;
    for (auto& [dist, v] : pts) {
      running = std::max(running, v);
      if (!dist_.empty() && dist_.back() == dist) {
        best_.back() = running;
      } else {
        dist_.push_back(dist);
        best_.push_back(running);
      }
    }
    spacing_ = lattice.spacing();
  }

  double operator()(double h) const {
    if (!(h > 0)) throw ArgumentError("sigma: h must be positive");
    auto it = std::upper_bound(dist_.begin(), dist_.end(), 2 * h + kWindowTol);
    const auto idx = static_cast<std::size_t>(it - dist_.begin());
    if (idx < 2) throw DegenerateError("sigma: no lattice pair within 2h (degenerate window)");
    return best_[idx - 1] / std::pow(h, static_cast<double>(d_));
  }

  double min_h() const { return spacing_ / 2; }

  // Log-log slope of sigma over [min_h, 1/4]; positive means sigma -> 0 as h -> 0.
  double decay_slope() const {
    const double lo = std::max(min_h() * 2, 1e-6);
    const double hi = 0.25;
    if (!(hi > lo)) return 0.0;
    auto hs = logspace(lo, hi, 12);
    std::vector<double> lx, ly;
    for (double h : hs) {
      h = std::max(1.0, std::round(2 * h / spacing_)) * spacing_ / 2;  // 2h on the lattice spacing
      const double s = (*this)(h);
      if (s > 0) {
        lx.push_back(std::log(h));
        ly.push_back(std::log(s));
      }
    }
    if (lx.size() < 2) return 0.0;
    return least_squares(lx, ly).slope;
  }

  bool decays() const { return decay_slope() > 0.05; }

 private:
  std::size_t d_;
  double spacing_ = 0;
  std::vector<double> dist_;
  std::vector<double> best_;
};

inline double sigma(const QuasiDistance& q, const Lattice& lattice, double h) { return SigmaCurve(q, lattice)(h); }

}  // namespace skorokhod
