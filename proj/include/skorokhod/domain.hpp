#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace skorokhod {

class Point {
 public:
  Point() = default;

  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ArgumentError("Point: dimension must be at least 1");
    if (coords_.size() > kMaxDimension) throw ConfigError("Point: dimension exceeds cap");
    for (double c : coords_)
      if (!(c >= 0.0 && c <= 1.0)) throw ArgumentError("Point: coordinate outside [0,1]");
  }
  Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t j) const { return coords_[j]; }
  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

inline void require_same_dim(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw ArgumentError("dimension mismatch");
}

inline bool leq(const Point& x, const Point& y) {
  require_same_dim(x, y);
  for (std::size_t j = 0; j < x.dim(); ++j)
    if (x[j] > y[j]) return false;
  return true;
}

// Subset of the axes {0,...,d-1}; bit j set means axis j belongs to M.
class SubsetMask {
 public:
  constexpr SubsetMask() = default;
  constexpr explicit SubsetMask(std::uint32_t bits) : bits_(bits) {}

  static SubsetMask from_axes(std::initializer_list<std::size_t> axes) {
    std::uint32_t bits = 0;
    for (auto a : axes) {
      if (a >= kMaxDimension) throw ArgumentError("SubsetMask: axis out of range");
      bits |= 1u << a;
    }
    return SubsetMask(bits);
  }

  constexpr bool contains(std::size_t axis) const { return (bits_ >> axis) & 1u; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr SubsetMask complement(std::size_t d) const { return SubsetMask(~bits_ & ((1u << d) - 1u)); }

  friend constexpr bool operator==(SubsetMask, SubsetMask) = default;
  friend constexpr auto operator<=>(SubsetMask, SubsetMask) = default;

 private:
  std::uint32_t bits_ = 0;
};

inline std::vector<SubsetMask> enumerate_masks(std::size_t d, std::size_t cap = kMaxDimension) {
  if (d < 1) throw ArgumentError("enumerate_masks: d must be at least 1");
  if (d > cap || d > kMaxDimension) throw ConfigError("enumerate_masks: d exceeds the mask cap");
  std::vector<SubsetMask> masks;
  masks.reserve(std::size_t{1} << d);
  for (std::uint32_t b = 0; b < (1u << d); ++b) masks.emplace_back(b);
  return masks;
}

inline Point corner_vector(const Point& x1, const Point& x3, SubsetMask mask) {
  if (!leq(x1, x3)) throw PreconditionError("corner_vector: x1 is not <= x3");
  std::vector<double> z(x1.dim());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = mask.contains(j) ? x3[j] : x1[j];
  return Point(std::move(z));
}

struct OrderedTriple {
  Point x1, x2, x3;

  OrderedTriple(Point a, Point b, Point c) : x1(std::move(a)), x2(std::move(b)), x3(std::move(c)) {
    if (!leq(x1, x2) || !leq(x2, x3)) throw PreconditionError("OrderedTriple: points are not ordered");
  }
};

// Triple of lattice node indices.
struct NodeTriple {
  std::size_t x1, x2, x3;
  friend bool operator==(const NodeTriple&, const NodeTriple&) = default;
};

enum class InteriorMode { ordered, unrestricted };

inline std::string to_string(InteriorMode mode) {
  return mode == InteriorMode::ordered ? "ordered" : "unrestricted";
}

// Regular grid {0, 1/(m-1), ..., 1}^d. Node index runs with axis 0 fastest.
class Lattice {
 public:
  static constexpr std::size_t kMaxNodes = std::size_t{1} << 24;

  Lattice() = default;
  Lattice(std::size_t d, std::size_t m) : d_(d), m_(m) {
    if (d < 1) throw ArgumentError("Lattice: d must be at least 1");
    if (d > kMaxDimension) throw ConfigError("Lattice: d exceeds cap");
    if (m < 2) throw ArgumentError("Lattice: m must be at least 2");
    size_ = 1;
    for (std::size_t j = 0; j < d; ++j) {
      strides_[j] = size_;
      if (size_ > kMaxNodes / m) throw ConfigError("Lattice: node count exceeds cap");
      size_ *= m;
    }
  }

  std::size_t dim() const { return d_; }
  std::size_t per_axis() const { return m_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 1.0 / static_cast<double>(m_ - 1); }
  std::size_t stride(std::size_t j) const { return strides_[j]; }

  double coord(std::size_t k) const {
    return k + 1 == m_ ? 1.0 : static_cast<double>(k) / static_cast<double>(m_ - 1);
  }
  std::size_t axis_index(std::size_t node, std::size_t j) const { return (node / strides_[j]) % m_; }

  Point point(std::size_t node) const {
    std::vector<double> c(d_);
    for (std::size_t j = 0; j < d_; ++j) c[j] = coord(axis_index(node, j));
    return Point(std::move(c));
  }

  std::optional<std::size_t> find_node(const Point& x) const {
    if (x.dim() != d_) return std::nullopt;
    std::size_t node = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double scaled = x[j] * static_cast<double>(m_ - 1);
      const double k = std::round(scaled);
      if (std::abs(scaled - k) > 1e-9) return std::nullopt;
      node += static_cast<std::size_t>(k) * strides_[j];
    }
    return node;
  }

  std::size_t node_of(const Point& x) const {
    if (x.dim() != d_) throw ArgumentError("Lattice: dimension mismatch");
    auto node = find_node(x);
    if (!node) throw ArgumentError("Lattice: point is not a lattice node");
    return *node;
  }

  std::size_t nearest_node(const Point& x) const {
    if (x.dim() != d_) throw ArgumentError("Lattice: dimension mismatch");
    std::size_t node = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      auto k = static_cast<std::size_t>(std::lround(x[j] * static_cast<double>(m_ - 1)));
      node += std::min(k, m_ - 1) * strides_[j];
    }
    return node;
  }

  bool node_leq(std::size_t a, std::size_t b) const {
    for (std::size_t j = 0; j < d_; ++j)
      if (axis_index(a, j) > axis_index(b, j)) return false;
    return true;
  }

  // Node of the box spanned by the coordinatewise min (or max) of a and b.
  std::size_t node_min(std::size_t a, std::size_t b) const {
    std::size_t node = 0;
    for (std::size_t j = 0; j < d_; ++j) node += std::min(axis_index(a, j), axis_index(b, j)) * strides_[j];
    return node;
  }
  std::size_t node_max(std::size_t a, std::size_t b) const {
    std::size_t node = 0;
    for (std::size_t j = 0; j < d_; ++j) node += std::max(axis_index(a, j), axis_index(b, j)) * strides_[j];
    return node;
  }

  std::size_t corner_node(std::size_t lo, std::size_t hi, SubsetMask mask) const {
    std::size_t node = 0;
    for (std::size_t j = 0; j < d_; ++j) node += axis_index(mask.contains(j) ? hi : lo, j) * strides_[j];
    return node;
  }

  double squared_distance(std::size_t a, std::size_t b) const {
    double s = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double t = coord(axis_index(a, j)) - coord(axis_index(b, j));
      s += t * t;
    }
    return s;
  }

  // Visits every node of the box [lo, hi] (lo <= hi assumed) in increasing node order.
  template <class Fn>
  void for_each_in_box(std::size_t lo, std::size_t hi, Fn&& fn) const {
    std::array<std::size_t, kMaxDimension> from{}, to{}, cur{};
    for (std::size_t j = 0; j < d_; ++j) {
      from[j] = axis_index(lo, j);
      to[j] = axis_index(hi, j);
      cur[j] = from[j];
    }
    const std::size_t run = to[0] - from[0] + 1;
    while (true) {
      std::size_t base = 0;
      for (std::size_t j = 1; j < d_; ++j) base += cur[j] * strides_[j];
      for (std::size_t k = 0; k < run; ++k) fn(base + from[0] + k);
      std::size_t j = 1;
      for (; j < d_; ++j) {
        if (cur[j] < to[j]) {
          ++cur[j];
          break;
        }
        cur[j] = from[j];
      }
      if (j >= d_) return;
    }
  }

  friend bool operator==(const Lattice& a, const Lattice& b) { return a.d_ == b.d_ && a.m_ == b.m_; }

 private:
  std::size_t d_ = 1;
  std::size_t m_ = 2;
  std::size_t size_ = 2;
  std::array<std::size_t, kMaxDimension> strides_{1};
};

// Every comparable node pair (a <= c), a ascending, then c ascending.
template <class Fn>
void for_each_ordered_pair(const Lattice& lattice, Fn&& fn) {
  const std::size_t top = lattice.size() - 1;
  for (std::size_t a = 0; a < lattice.size(); ++a)
    lattice.for_each_in_box(a, top, [&](std::size_t c) { fn(a, c); });
}

// Visits ordered lattice triples. pair_q(a, c) gives the window distance; pairs
// with pair_q > h are skipped.
template <class PairQ, class Fn>
void for_each_triple(const Lattice& lattice, PairQ&& pair_q, double h, Fn&& fn,
                     InteriorMode mode = InteriorMode::ordered) {
  if (h < 0) throw ArgumentError("enumerate_triples: window must be nonnegative");
  for_each_ordered_pair(lattice, [&](std::size_t a, std::size_t c) {
    if (pair_q(a, c) > h + kWindowTol) return;
    if (mode == InteriorMode::ordered) {
      lattice.for_each_in_box(a, c, [&](std::size_t b) { fn(NodeTriple{a, b, c}); });
    } else {
      for (std::size_t b = 0; b < lattice.size(); ++b) fn(NodeTriple{a, b, c});
    }
  });
}

template <class Fn>
void for_each_triple(const Lattice& lattice, Fn&& fn, InteriorMode mode = InteriorMode::ordered) {
  for_each_triple(lattice, [](std::size_t, std::size_t) { return 0.0; }, 0.0, fn, mode);
}

inline std::vector<NodeTriple> enumerate_triples(const Lattice& lattice, InteriorMode mode = InteriorMode::ordered) {
  std::vector<NodeTriple> out;
  for_each_triple(lattice, [&](const NodeTriple& t) { out.push_back(t); }, mode);
  return out;
}

// Triples per path for the ordered mode: C(m+2,3)^d.
inline double ordered_triple_count(std::size_t d, std::size_t m) {
  const double per_axis = static_cast<double>(m) * (m + 1) * (m + 2) / 6.0;
  return std::pow(per_axis, static_cast<double>(d));
}

}  // namespace skorokhod
