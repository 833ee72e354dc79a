#include <gtest/gtest.h>

#include <cmath>

#include "skorokhod/fields.hpp"

using namespace skorokhod;

namespace {

struct Moments {
  double mean = 0, se = 0, var = 0, var_se = 0;
};

Moments node_moments(const FieldModel& model, const Lattice& lat, std::size_t node, std::size_t reps,
                     std::uint64_t seed) {
  std::vector<double> v(reps);
  for (std::size_t r = 0; r < reps; ++r) v[r] = sample_path(model, lat, SeedSpec{seed, r}).values[node];
  const double rr = static_cast<double>(reps);
  Moments m;
  for (double x : v) m.mean += x / rr;
  double m4 = 0;
  for (double x : v) {
    m.var += (x - m.mean) * (x - m.mean) / rr;
    m4 += std::pow(x - m.mean, 4) / rr;
  }
  m.se = std::sqrt(m.var / rr);
  m.var_se = std::sqrt(std::max(m4 - m.var * m.var, 0.0) / rr);
  return m;
}

}  // namespace

TEST(SamplePath, IndicatorIsStepAtEta) {
  const Lattice lat(1, 101);
  const auto model = FieldModel::uniform_indicator(1, false);
  for (std::uint64_t r = 0; r < 50; ++r) {
    double eta = 0;
    detail::draw_eta(model, StreamKey(SeedSpec{3, r}), &eta);
    const auto p = sample_path(model, lat, SeedSpec{3, r});
    for (std::size_t k = 0; k < lat.size(); ++k) EXPECT_EQ(p.values[k], eta < lat.coord(k) ? 1.0 : 0.0);
  }
}

TEST(SamplePath, CenteredIndicatorSubtractsCdf) {
  const Lattice lat(1, 11);
  const auto model = FieldModel::uniform_indicator(1, true);
  for (std::uint64_t r = 0; r < 50; ++r) {
    double eta = 0;
    detail::draw_eta(model, StreamKey(SeedSpec{4, r}), &eta);
    const auto p = sample_path(model, lat, SeedSpec{4, r});
    if (eta > 0.5) {
      EXPECT_DOUBLE_EQ(p.at(Point{0.5}), -0.5);
    }
    EXPECT_EQ(p.at(Point{0.0}), 0.0);
    EXPECT_EQ(p.at(Point{1.0}), 0.0);
  }
}

TEST(SamplePath, IndicatorMonotoneAndBinary) {
  const Lattice lat(2, 9);
  const auto model = FieldModel::indicator({Marginal::beta(2, 3), Marginal::uniform()});
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto p = sample_path(model, lat, SeedSpec{5, r});
    for (std::size_t a = 0; a < lat.size(); ++a) {
      EXPECT_TRUE(p.values[a] == 0.0 || p.values[a] == 1.0);
      for (std::size_t j = 0; j < 2; ++j) {
        if (lat.axis_index(a, j) + 1 < lat.per_axis()) {
          EXPECT_LE(p.values[a], p.values[a + lat.stride(j)]);
        }
      }
    }
  }
}

TEST(SamplePath, DeterministicAndDistinctStreams) {
  const Lattice lat(1, 51);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 20);
  const auto a = sample_path(model, lat, SeedSpec{9, 3}), b = sample_path(model, lat, SeedSpec{9, 3});
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, sample_path(model, lat, SeedSpec{9, 4}).values);
  EXPECT_NE(a.values, sample_path(model, lat, SeedSpec{10, 3}).values);
}

TEST(SamplePath, GaussianZeroCovarianceGivesZeroPath) {
  const Lattice lat(1, 8);
  const auto model = gaussian_reference(CovarianceTable{lat, std::vector<double>(64, 0.0), {}});
  for (double v : sample_path(model, lat, SeedSpec{1, 0}).values) EXPECT_EQ(v, 0.0);
}

TEST(SamplePath, GaussianRankOneIsMultipleOfVector) {
  const Lattice lat(1, 6);
  const std::vector<double> v{1, -2, 0.5, 3, 0, 1};
  std::vector<double> R(36);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) R[a * 6 + b] = v[a] * v[b];
  const auto model = gaussian_reference(CovarianceTable{lat, R, {}});
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto p = sample_path(model, lat, SeedSpec{2, r});
    const double c = p.values[0] / v[0];
    for (std::size_t a = 0; a < 6; ++a) EXPECT_NEAR(p.values[a], c * v[a], 1e-9 * (1 + std::abs(c)));
  }
}

TEST(SamplePath, GaussianDiagonalIsIndependent) {
  const Lattice lat(1, 3);
  std::vector<double> R(9, 0.0);
  R[0] = 1;
  R[4] = 4;
  R[8] = 0.25;
  const auto model = gaussian_reference(CovarianceTable{lat, R, {}});
  const auto emp = empirical_covariance(model, lat, 20000, 8);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      EXPECT_NEAR(emp.at(a, b), R[a * 3 + b], 4 * emp.std_errors[a * 3 + b] + 1e-12);
}

TEST(GaussianReference, RejectsIndefiniteAndAsymmetric) {
  const Lattice lat(1, 2);
  EXPECT_THROW(gaussian_reference(CovarianceTable{lat, {1, 2, 2, 1}, {}}), CovarianceError);
  EXPECT_THROW(gaussian_reference(CovarianceTable{lat, {1, 0.5, 0.4, 1}, {}}), CovarianceError);
}

TEST(PartialSum, SingleSummandEqualsBasePath) {
  const Lattice lat(1, 41);
  const auto base = FieldModel::uniform_indicator(1, true);
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto s = partial_sum_path(base, 1, lat, SeedSpec{6, r});
    const auto b = sample_path(base, lat, StreamKey(SeedSpec{6, r}).child(0));
    EXPECT_EQ(s.values, b.values);
  }
}

TEST(PartialSum, RequiresCenteredBase) {
  EXPECT_THROW(FieldModel::partial_sum(FieldModel::uniform_indicator(1, false), 5), ModelError);
  EXPECT_THROW(FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 0), ArgumentError);
}

TEST(PartialSum, ValueAtTopCornerIsZero) {
  const Lattice lat(2, 5);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(2, true), 30);
  for (std::uint64_t r = 0; r < 200; ++r) EXPECT_EQ(sample_path(model, lat, SeedSpec{7, r}).values.back(), 0.0);
}

TEST(PartialSum, VarianceAtMidpoint) {
  const Lattice lat(1, 11);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 50);
  const auto m = node_moments(model, lat, 5, 10000, 11);
  EXPECT_NEAR(m.var, 0.25, 0.01);
  EXPECT_LE(std::abs(m.mean), 4 * m.se);
}

TEST(PartialSum, VarianceDoesNotDependOnN) {
  const Lattice lat(1, 11);
  const auto base = FieldModel::uniform_indicator(1, true);
  for (std::size_t n : {1u, 10u, 100u})
    for (std::size_t node : {2u, 5u, 8u}) {
      const double x = lat.coord(node);
      const auto m = node_moments(FieldModel::partial_sum(base, n), lat, node, 4000, 12 + n);
      EXPECT_NEAR(m.var, x * (1 - x), 4 * m.var_se) << "n=" << n << " x=" << x;
    }
}

TEST(Centered, MeanZeroAtEveryNode) {
  const Lattice lat(2, 5);
  const auto model = FieldModel::centered_indicator({Marginal::beta(2, 2), Marginal::beta(0.5, 1.5)});
  const std::size_t reps = 10000;
  std::vector<double> s(lat.size()), s2(lat.size());
  for (std::size_t r = 0; r < reps; ++r) {
    const auto p = sample_path(model, lat, SeedSpec{13, r});
    for (std::size_t a = 0; a < lat.size(); ++a) {
      s[a] += p.values[a];
      s2[a] += p.values[a] * p.values[a];
    }
  }
  const double rr = static_cast<double>(reps);
  for (std::size_t a = 0; a < lat.size(); ++a) {
    const double mean = s[a] / rr, se = std::sqrt(std::max(s2[a] / rr - mean * mean, 0.0) / rr);
    EXPECT_LE(std::abs(mean), 4 * se + 1e-12) << a;
  }
}

TEST(Covariance, BrownianBridgeForm) {
  const Lattice lat(1, 11);
  const auto model = FieldModel::uniform_indicator(1, true);
  const auto emp = empirical_covariance(model, lat, 20000, 14);
  const auto a = lat.node_of(Point{0.3}), b = lat.node_of(Point{0.7}), c = lat.node_of(Point{0.5});
  EXPECT_NEAR(model_covariance(model, Point{0.3}, Point{0.7}), 0.09, 1e-15);
  EXPECT_NEAR(emp.at(a, b), 0.09, 4 * emp.std_errors[a * lat.size() + b]);
  EXPECT_NEAR(emp.at(c, c), 0.25, 4 * emp.std_errors[c * lat.size() + c]);
  EXPECT_THROW(empirical_covariance(model, lat, 1, 1), EstimationError);
  EXPECT_THROW(empirical_covariance(FieldModel::uniform_indicator(1, false), lat, 10, 1), ModelError);
}

TEST(Covariance, GaussianReferenceReproducesTable) {
  const Lattice lat(1, 9);
  const auto exact = exact_covariance(FieldModel::uniform_indicator(1, true), lat);
  const auto ref = gaussian_reference(exact);
  const auto emp = empirical_covariance(ref, lat, 20000, 15);
  for (std::size_t i = 0; i < exact.values.size(); ++i)
    EXPECT_NEAR(emp.values[i], exact.values[i], 4.5 * emp.std_errors[i] + 1e-12);
}

TEST(Covariance, WorkerCountDoesNotChangeResult) {
  const Lattice lat(1, 21);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 10);
  const auto a = empirical_covariance(model, lat, 500, 16, 1), b = empirical_covariance(model, lat, 500, 16, 4);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.std_errors, b.std_errors);
}

TEST(SamplePoints, MatchesLatticeNodes) {
  const Lattice lat(2, 6);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(2, true), 7);
  std::vector<Point> pts;
  for (std::size_t a = 0; a < lat.size(); ++a) pts.push_back(lat.point(a));
  for (std::uint64_t r = 0; r < 5; ++r) {
    const StreamKey key(SeedSpec{17, r});
    EXPECT_EQ(sample_points(model, pts, key), sample_path(model, lat, key).values);
  }
}

TEST(Marginal, BetaQuantileInvertsCdf) {
  const auto m = Marginal::beta(2.5, 0.7);
  for (double u : {0.01, 0.2, 0.5, 0.9, 0.999}) EXPECT_NEAR(m.cdf(m.quantile(u)), u, 1e-12);
  EXPECT_THROW(Marginal::beta(0, 1), ArgumentError);
}
