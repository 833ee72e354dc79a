#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "skorokhod/modulus.hpp"
#include "skorokhod/quasidist.hpp"

using namespace skorokhod;

namespace {

Point random_point(std::mt19937_64& g, std::size_t d, std::size_t m = 0) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<std::size_t> k(0, m ? m - 1 : 0);
  std::vector<double> c(d);
  for (auto& v : c) v = m ? static_cast<double>(k(g)) / static_cast<double>(m - 1) : u(g);
  return Point(c);
}

}  // namespace

TEST(Point, RejectsCoordinatesOutsideUnitCube) {
  EXPECT_THROW(Point({0.5, 1.5}), ArgumentError);
  EXPECT_THROW(Point({-0.1}), ArgumentError);
  EXPECT_THROW(Point(std::vector<double>{}), ArgumentError);
}

TEST(Leq, Examples) {
  EXPECT_TRUE(leq({0.1, 0.2}, {0.1, 0.2}));
  EXPECT_FALSE(leq({0.1, 0.9}, {0.5, 0.3}));
  EXPECT_TRUE(leq({0, 0}, {1, 1}));
  EXPECT_THROW(leq({0.1}, {0.1, 0.2}), ArgumentError);
}

TEST(Leq, IsAPartialOrder) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 2000; ++i) {
    const auto x = random_point(g, 2, 4), y = random_point(g, 2, 4), z = random_point(g, 2, 4);
    EXPECT_TRUE(leq(x, x));
    if (leq(x, y) && leq(y, x)) {
      EXPECT_EQ(x, y);
    }
    if (leq(x, y) && leq(y, z)) {
      EXPECT_TRUE(leq(x, z));
    }
  }
}

TEST(CornerVector, Examples) {
  const Point x1{0.1, 0.2}, x3{0.5, 0.8};
  EXPECT_EQ(corner_vector(x1, x3, SubsetMask::from_axes({1})), Point({0.1, 0.8}));
  EXPECT_EQ(corner_vector(x1, x3, SubsetMask(0)), x1);
  EXPECT_EQ(corner_vector(x1, x3, SubsetMask(3)), x3);
  EXPECT_THROW(corner_vector(x3, x1, SubsetMask(0)), PreconditionError);
}

TEST(CornerVector, ComplementSwapsEndpoints) {
  std::mt19937_64 g(2);
  for (int i = 0; i < 200; ++i) {
    auto a = random_point(g, 3), b = random_point(g, 3);
    std::vector<double> lo(3), hi(3);
    for (int j = 0; j < 3; ++j) {
      lo[j] = std::min(a[j], b[j]);
      hi[j] = std::max(a[j], b[j]);
    }
    const Point x1(lo), x3(hi);
    for (auto mask : enumerate_masks(3)) {
      const auto z = corner_vector(x1, x3, mask), w = corner_vector(x1, x3, mask.complement(3));
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(z[j], mask.contains(j) ? x3[j] : x1[j]);
        EXPECT_EQ(w[j], mask.contains(j) ? x1[j] : x3[j]);
      }
    }
  }
}

TEST(Masks, Enumeration) {
  const auto m1 = enumerate_masks(1);
  ASSERT_EQ(m1.size(), 2u);
  EXPECT_EQ(m1.front().size(), 0);
  EXPECT_TRUE(m1.back().contains(0));
  EXPECT_EQ(enumerate_masks(2).size(), 4u);
  const auto m3 = enumerate_masks(3);
  EXPECT_EQ(m3.size(), 8u);
  EXPECT_EQ(m3.back().size(), 3);
  EXPECT_THROW(enumerate_masks(9), ConfigError);
}

TEST(Lattice, NodesAndCorners) {
  const Lattice lat(2, 5);
  EXPECT_EQ(lat.size(), 25u);
  EXPECT_EQ(lat.point(0), Point({0, 0}));
  EXPECT_EQ(lat.point(24), Point({1, 1}));
  EXPECT_EQ(lat.point(1), Point({0.25, 0}));  // axis 0 runs fastest
  EXPECT_EQ(lat.node_of({0.5, 0.75}), 2u + 3u * 5u);
  EXPECT_THROW(lat.node_of({0.3, 0.5}), ArgumentError);
  EXPECT_THROW(Lattice(1, 1), ArgumentError);
  EXPECT_THROW(Lattice(9, 2), ConfigError);
}

TEST(EnumerateTriples, Examples) {
  EXPECT_EQ(enumerate_triples(Lattice(1, 3)).size(), 10u);
  EXPECT_EQ(enumerate_triples(Lattice(1, 3), QuasiDistance::power_euclidean(1.0), 0.0).size(), 3u);
  // The count for d=2, m=2 is C(4,3)^2 = 16 by brute force.
  EXPECT_EQ(enumerate_triples(Lattice(2, 2)).size(), 16u);
  EXPECT_THROW(enumerate_triples(Lattice(1, 3), QuasiDistance::power_euclidean(1.0), -0.1), ArgumentError);
}

TEST(EnumerateTriples, MatchesFilteredCube) {
  for (std::size_t d : {1u, 2u}) {
    for (std::size_t m : {2u, 3u, 4u}) {
      const Lattice lat(d, m);
      std::vector<NodeTriple> brute;
      for (std::size_t a = 0; a < lat.size(); ++a)
        for (std::size_t b = 0; b < lat.size(); ++b)
          for (std::size_t c = 0; c < lat.size(); ++c)
            if (leq(lat.point(a), lat.point(b)) && leq(lat.point(b), lat.point(c))) brute.push_back({a, b, c});
      auto got = enumerate_triples(lat);
      auto key = [](const NodeTriple& t) { return std::tuple(t.x1, t.x2, t.x3); };
      std::sort(got.begin(), got.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
      std::sort(brute.begin(), brute.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
      EXPECT_EQ(got, brute) << "d=" << d << " m=" << m;
      EXPECT_DOUBLE_EQ(ordered_triple_count(d, m), static_cast<double>(brute.size()));
    }
  }
}

TEST(EnumerateTriples, DeterministicOrder) {
  const Lattice lat(2, 3);
  EXPECT_EQ(enumerate_triples(lat), enumerate_triples(lat));
}

TEST(EnumerateTriples, UnrestrictedInteriorCoversAllNodes) {
  const Lattice lat(1, 4);
  // 10 comparable pairs times 4 interior nodes
  EXPECT_EQ(enumerate_triples(lat, InteriorMode::unrestricted).size(), 40u);
}

TEST(Tau, ConventionIndependent) {
  // tau from the displayed corner rule equals tau with x1 and x3 exchanged in the corner rule.
  std::mt19937_64 g(3);
  const Lattice lat(2, 4);
  const auto model = FieldModel::uniform_indicator(2, true);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto path = sample_path(model, lat, SeedSpec{5, r});
    for (const auto& t : enumerate_triples(lat)) {
      const OrderedTriple ot(lat.point(t.x1), lat.point(t.x2), lat.point(t.x3));
      double prose = kInf;
      for (auto mask : enumerate_masks(2)) {
        const auto z = corner_vector(ot.x1, ot.x3, mask.complement(2));
        prose = std::min(prose, std::abs(path.values[t.x2] - path.values[lat.node_of(z)]));
      }
      EXPECT_EQ(tau(path, ot), prose);
    }
  }
}
