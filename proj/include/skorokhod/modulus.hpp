#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"
#include "domain.hpp"
#include "fields.hpp"
#include "parallel.hpp"
#include "quasidist.hpp"
#include "rng.hpp"

namespace skorokhod {

struct Increments {
  std::vector<double> by_mask;  // indexed by SubsetMask::bits()

  double operator[](SubsetMask m) const { return by_mask.at(m.bits()); }
  std::size_t size() const { return by_mask.size(); }
};

inline Increments increments(const SamplePath& path, const OrderedTriple& t) {
  const auto& lat = path.lattice;
  const std::size_t a = lat.node_of(t.x1), b = lat.node_of(t.x2), c = lat.node_of(t.x3);
  Increments inc;
  for (auto mask : enumerate_masks(lat.dim())) inc.by_mask.push_back(path.values[b] - path.values[lat.corner_node(a, c, mask)]);
  return inc;
}

inline double tau(const SamplePath& path, const OrderedTriple& t) {
  const auto inc = increments(path, t);
  double best = kInf;
  for (double v : inc.by_mask) best = std::min(best, std::abs(v));
  return best;
}

inline std::vector<double> default_h_grid(std::size_t m) { return logspace(2.0 / static_cast<double>(m - 1), 0.5, 8); }

struct ModulusCurve {
  std::vector<double> h_grid;
  std::vector<double> values;
};

// Comparable node pairs sorted by q; per pair the max of tau over x2.
// kappa(h) is then a running max over the prefix of pairs with q <= h.
class ModulusEngine {
 public:
  ModulusEngine(const Lattice& lattice, const QuasiDistance& q, InteriorMode mode = InteriorMode::ordered)
      : lattice_(lattice), mode_(mode), masks_(std::size_t{1} << lattice.dim()) {
    if (lattice.size() > (std::size_t{1} << 31)) throw ConfigError("ModulusEngine: lattice too large");
    const PairEvaluator pq(q, lattice);
    struct Raw {
      double q;
      std::uint32_t a, c;
    };
    std::vector<Raw> raw;
    for_each_ordered_pair(lattice, [&](std::size_t a, std::size_t c) {
      raw.push_back({pq(a, c), static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(c)});
    });
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.q < y.q; });
    q_.reserve(raw.size());
    lo_.reserve(raw.size());
    hi_.reserve(raw.size());
    corners_.reserve(raw.size() * masks_);
    min_open_q_ = kInf;
    for (const auto& r : raw) {
      q_.push_back(r.q);
      lo_.push_back(r.a);
      hi_.push_back(r.c);
      for (std::uint32_t b = 0; b < masks_; ++b)
        corners_.push_back(static_cast<std::uint32_t>(lattice.corner_node(r.a, r.c, SubsetMask(b))));
      if (r.a != r.c) min_open_q_ = std::min(min_open_q_, r.q);
    }
  }

  const Lattice& lattice() const { return lattice_; }
  InteriorMode mode() const { return mode_; }
  std::size_t pair_count() const { return q_.size(); }
  double pair_q(std::size_t i) const { return q_[i]; }
  std::size_t pair_lo(std::size_t i) const { return lo_[i]; }
  std::size_t pair_hi(std::size_t i) const { return hi_[i]; }
  const std::uint32_t* pair_corners(std::size_t i) const { return corners_.data() + i * masks_; }
  std::size_t mask_count() const { return masks_; }

  std::size_t pairs_within(double h) const {
    return static_cast<std::size_t>(std::upper_bound(q_.begin(), q_.end(), h + kWindowTol) - q_.begin());
  }

  void check_window(double h) const {
    if (!(h > 0)) throw ArgumentError("modulus: h must be positive");
    if (!(min_open_q_ <= h + kWindowTol))
      throw DegenerateError("modulus: window below lattice resolution (degenerate window)");
  }

  double tau_nodes(const double* v, std::size_t b, std::size_t pair) const {
    const std::uint32_t* z = pair_corners(pair);
    double best = std::abs(v[b] - v[z[0]]);
    for (std::size_t k = 1; k < masks_; ++k) best = std::min(best, std::abs(v[b] - v[z[k]]));
    return best;
  }

  // max over x2 of tau for one pair
  double pair_max(const double* v, std::size_t pair) const {
    double best = 0;
    const std::size_t a = lo_[pair], c = hi_[pair];
    if (mode_ == InteriorMode::unrestricted) {
      for (std::size_t b = 0; b < lattice_.size(); ++b) best = std::max(best, tau_nodes(v, b, pair));
      return best;
    }
    if (lattice_.dim() == 1) {
      const double va = v[a], vc = v[c];
      for (std::size_t b = a; b <= c; ++b) best = std::max(best, std::min(std::abs(v[b] - va), std::abs(v[b] - vc)));
      return best;
    }
    lattice_.for_each_in_box(a, c, [&](std::size_t b) { best = std::max(best, tau_nodes(v, b, pair)); });
    return best;
  }

  double kappa(const double* v, double h) const {
    check_window(h);
    const std::size_t limit = pairs_within(h);
    double best = 0;
    for (std::size_t i = 0; i < limit; ++i) best = std::max(best, pair_max(v, i));
    return best;
  }

  // kappa at each h of an increasing grid, one pass over the pairs.
  std::vector<double> kappa_curve(const double* v, const std::vector<double>& h_grid) const {
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
      check_window(h_grid[k]);
      if (k && !(h_grid[k] > h_grid[k - 1])) throw ArgumentError("modulus: h grid must be increasing");
    }
    std::vector<double> out(h_grid.size());
    double best = 0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
      const std::size_t limit = pairs_within(h_grid[k]);
      for (; i < limit; ++i) best = std::max(best, pair_max(v, i));
      out[k] = best;
    }
    return out;
  }

 private:
  Lattice lattice_;
  InteriorMode mode_;
  std::size_t masks_;
  std::vector<double> q_;
  std::vector<std::uint32_t> lo_, hi_;
  std::vector<std::uint32_t> corners_;
  double min_open_q_ = kInf;
};

inline double ps_modulus(const SamplePath& path, const QuasiDistance& q, double h,
                         InteriorMode mode = InteriorMode::ordered) {
  const ModulusEngine engine(path.lattice, q, mode);
  return engine.kappa(path.values.data(), h);
}

inline ModulusCurve kappa_curve(const SamplePath& path, const QuasiDistance& q, const std::vector<double>& h_grid,
                                InteriorMode mode = InteriorMode::ordered) {
  const ModulusEngine engine(path.lattice, q, mode);
  return {h_grid, engine.kappa_curve(path.values.data(), h_grid)};
}

// Unordered node pairs sorted by Euclidean distance.
class ClassicalEngine {
 public:
  explicit ClassicalEngine(const Lattice& lattice) : lattice_(lattice) {
    struct Raw {
      double dist;
      std::uint32_t a, b;
    };
    std::vector<Raw> raw;
    for (std::size_t a = 0; a < lattice.size(); ++a)
      for (std::size_t b = a + 1; b < lattice.size(); ++b)
        raw.push_back({std::sqrt(lattice.squared_distance(a, b)), static_cast<std::uint32_t>(a),
                       static_cast<std::uint32_t>(b)});
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.dist < y.dist; });
    for (const auto& r : raw) {
      dist_.push_back(r.dist);
      a_.push_back(r.a);
      b_.push_back(r.b);
    }
  }

  void check_window(double h) const {
    if (!(h > 0)) throw ArgumentError("classical_modulus: h must be positive");
    if (dist_.empty() || dist_.front() > h + kWindowTol)
      throw DegenerateError("classical_modulus: window below lattice resolution (degenerate window)");
  }

  std::vector<double> curve(const double* v, const std::vector<double>& h_grid) const {
    std::vector<double> out(h_grid.size());
    double best = 0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
      check_window(h_grid[k]);
      if (k && !(h_grid[k] > h_grid[k - 1])) throw ArgumentError("classical_modulus: h grid must be increasing");
      const auto limit =
          static_cast<std::size_t>(std::upper_bound(dist_.begin(), dist_.end(), h_grid[k] + kWindowTol) - dist_.begin());
      for (; i < limit; ++i) best = std::max(best, std::abs(v[a_[i]] - v[b_[i]]));
      out[k] = best;
    }
    return out;
  }

 private:
  Lattice lattice_;
  std::vector<double> dist_;
  std::vector<std::uint32_t> a_, b_;
};

inline double classical_modulus(const SamplePath& path, double h) {
  return ClassicalEngine(path.lattice).curve(path.values.data(), {h}).front();
}

inline ModulusCurve omega_curve(const SamplePath& path, const std::vector<double>& h_grid) {
  return {h_grid, ClassicalEngine(path.lattice).curve(path.values.data(), h_grid)};
}

// kappa(h) per replicate and h: values[r * h_grid.size() + k].
struct KappaSamples {
  std::vector<double> h_grid;
  std::size_t replicates = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t k) const { return values[r * h_grid.size() + k]; }
};

inline KappaSamples kappa_samples(const FieldModel& model, const Lattice& lattice, const ModulusEngine& engine,
                                  const std::vector<double>& h_grid, std::size_t replicates, std::uint64_t master_seed,
                                  unsigned workers = 1) {
  for (double h : h_grid) engine.check_window(h);
  KappaSamples s{h_grid, replicates, std::vector<double>(replicates * h_grid.size())};
  parallel_for(replicates, workers, [&](std::size_t r) {
    const auto path = sample_path(model, lattice, SeedSpec{master_seed, r});
    const auto curve = engine.kappa_curve(path.values.data(), h_grid);
    std::copy(curve.begin(), curve.end(), s.values.begin() + static_cast<std::ptrdiff_t>(r * h_grid.size()));
  });
  return s;
}

struct TailCurve {
  std::vector<double> u_grid;
  std::vector<double> prob;
  std::vector<double> ci_halfwidth;
  std::size_t replicates = 0;

  double std_error(std::size_t i) const {
    return std::sqrt(prob[i] * (1 - prob[i]) / static_cast<double>(replicates));
  }
};

inline void check_increasing(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw ArgumentError(std::string(what) + ": empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ArgumentError(std::string(what) + ": grid must be increasing");
}

inline TailCurve tail_from_samples(const KappaSamples& s, std::size_t h_index, const std::vector<double>& u_grid) {
  check_increasing(u_grid, "tail curve");
  TailCurve t{u_grid, {}, {}, s.replicates};
  const double rr = static_cast<double>(s.replicates);
  for (double u : u_grid) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < s.replicates; ++r) hits += s.at(r, h_index) > u ? 1 : 0;
    const double p = static_cast<double>(hits) / rr;
    t.prob.push_back(p);
    t.ci_halfwidth.push_back(1.96 * std::sqrt(p * (1 - p) / rr));
  }
  return t;
}

inline TailCurve tail_curve_mc(const FieldModel& model, const Lattice& lattice, const QuasiDistance& q, double h,
                               const std::vector<double>& u_grid, std::size_t replicates, std::uint64_t master_seed,
                               unsigned workers = 1, InteriorMode mode = InteriorMode::ordered) {
  if (replicates < 100) throw ArgumentError("tail_curve_mc: need at least 100 replicates");
  check_increasing(u_grid, "tail_curve_mc");
  const ModulusEngine engine(lattice, q, mode);
  const auto s = kappa_samples(model, lattice, engine, {h}, replicates, master_seed, workers);
  return tail_from_samples(s, 0, u_grid);
}

struct ArctanCurve {
  std::vector<double> h_grid;
  std::vector<std::vector<double>> mean;  // [model][h]
  std::vector<std::vector<double>> se;    // [model][h]
  std::vector<double> max_mean;           // max over models per h
  std::vector<double> max_se;             // SE of the maximizing model
  std::vector<std::size_t> argmax;
};

inline ArctanCurve arctan_from_samples(const std::vector<KappaSamples>& per_model) {
  ArctanCurve c;
  c.h_grid = per_model.front().h_grid;
  const std::size_t nh = c.h_grid.size();
  for (const auto& s : per_model) {
    std::vector<double> mean(nh, 0.0), sq(nh, 0.0), se(nh);
    const double rr = static_cast<double>(s.replicates);
    for (std::size_t r = 0; r < s.replicates; ++r)
      for (std::size_t k = 0; k < nh; ++k) {
        const double a = std::atan(s.at(r, k));
        mean[k] += a;
        sq[k] += a * a;
      }
    for (std::size_t k = 0; k < nh; ++k) {
      mean[k] /= rr;
      const double var = std::max(0.0, sq[k] / rr - mean[k] * mean[k]) * rr / std::max(rr - 1, 1.0);
      se[k] = std::sqrt(var / rr);
    }
    c.mean.push_back(mean);
    c.se.push_back(se);
  }
  c.max_mean.assign(nh, -kInf);
  c.max_se.assign(nh, 0);
  c.argmax.assign(nh, 0);
  for (std::size_t i = 0; i < c.mean.size(); ++i)
    for (std::size_t k = 0; k < nh; ++k)
      if (c.mean[i][k] > c.max_mean[k]) {
        c.max_mean[k] = c.mean[i][k];
        c.max_se[k] = c.se[i][k];
        c.argmax[k] = i;
      }
  return c;
}

inline ArctanCurve arctan_criterion(const std::vector<FieldModel>& models, const Lattice& lattice,
                                    const QuasiDistance& q, const std::vector<double>& h_grid, std::size_t replicates,
                                    std::uint64_t master_seed, unsigned workers = 1,
                                    InteriorMode mode = InteriorMode::ordered) {
  if (models.empty()) throw ArgumentError("arctan_criterion: empty model list");
  if (replicates < 100) throw ArgumentError("arctan_criterion: need at least 100 replicates");
  check_increasing(h_grid, "arctan_criterion");
  const ModulusEngine engine(lattice, q, mode);
  std::vector<KappaSamples> per_model;
  for (std::size_t i = 0; i < models.size(); ++i)
    per_model.push_back(kappa_samples(models[i], lattice, engine, h_grid, replicates, derive_seed(master_seed, i), workers));
  return arctan_from_samples(per_model);
}

}  // namespace skorokhod
