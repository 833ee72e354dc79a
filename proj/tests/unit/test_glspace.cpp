#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "skorokhod/glspace.hpp"

using namespace skorokhod;

namespace {

std::vector<double> gaussian_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(g);
  return v;
}

// E |xi(x2)-xi(x1)| |xi(x2)-xi(x3)| for the centered uniform indicator, a = x2-x1, b = x3-x2.
double centered_indicator_beta(double a, double b) { return a * b * (3 - 2 * a - 2 * b); }

}  // namespace

TEST(LpNorm, Examples) {
  EXPECT_DOUBLE_EQ(lp_norm({-2.5, -2.5, -2.5}, 3), 2.5);
  const std::vector<double> rad{1, -1, -1, 1, 1};
  for (double p : {1.0, 2.0, 7.5}) EXPECT_DOUBLE_EQ(lp_norm(rad, p), 1.0);
  const auto z = gaussian_samples(200000, 1);
  EXPECT_NEAR(lp_norm(z, 4), std::pow(3.0, 0.25), 0.01);
  EXPECT_NEAR(gaussian_abs_moment_norm(4), std::pow(3.0, 0.25), 1e-12);
  EXPECT_THROW(lp_norm({}, 2), ArgumentError);
  EXPECT_THROW(lp_norm({1.0}, 0.5), ArgumentError);
}

TEST(HolderMixedBound, GaussianPairIsSharp) {
  const auto r = holder_mixed_bound([](std::size_t, double p) { return gaussian_abs_moment_norm(p); }, {1, 1});
  EXPECT_NEAR(r.bound, 1.0, 1e-6);
  EXPECT_NEAR(r.a[0], 2.0, 1e-3);
  EXPECT_NEAR(r.a[1], 2.0, 1e-3);
}

TEST(HolderMixedBound, BoundedVariablesAndSymmetry) {
  const auto b = holder_mixed_bound([](std::size_t i, double) { return i ? 0.7 : 1.0; }, {1.5, 3});
  EXPECT_LE(b.bound, 1.0);
  const auto s = holder_mixed_bound([](std::size_t, double p) { return gaussian_abs_moment_norm(p); }, {1, 1, 1});
  for (double a : s.a) EXPECT_NEAR(a, 3.0, 1e-2);
  double inv = 0;
  for (double a : s.a) inv += 1 / a;
  EXPECT_NEAR(inv, 1.0, 1e-12);
  EXPECT_THROW(holder_mixed_bound([](std::size_t, double) { return kInf; }, {1, 1}), NoFiniteBoundError);
}

TEST(HolderMixedBound, DominatesEmpiricalMixedMoment) {
  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 8; ++trial) {
    const double rho = -0.9 + 0.25 * trial;
    std::vector<std::vector<double>> x(3, std::vector<double>(4000));
    for (std::size_t r = 0; r < 4000; ++r) {
      const double a = z(g), b = z(g), c = z(g);
      x[0][r] = a;
      x[1][r] = rho * a + std::sqrt(1 - rho * rho) * b;
      x[2][r] = std::exp(0.3 * c) - 1;
    }
    const std::vector<double> p{1.0 + 0.2 * trial, 1.0, 1.3};
    double mixed = 0;
    for (std::size_t r = 0; r < 4000; ++r) {
      double v = 1;
      for (std::size_t i = 0; i < 3; ++i) v *= std::pow(std::abs(x[i][r]), p[i]);
      mixed += v / 4000;
    }
    // Hölder holds exactly for the empirical measure.
    const auto h = holder_mixed_bound([&](std::size_t i, double q) { return lp_norm(x[i], q); }, p);
    EXPECT_GE(h.bound * (1 + 1e-9), mixed) << trial;
  }
}

TEST(BetaDistance, ConstantAndRawIndicatorAreZero) {
  const Lattice lat(1, 11);
  const auto c = beta_distance(FieldModel::constant(1, 2.0), lat, {0.1}, {0.9}, {1, 1}, 50, 1);
  EXPECT_EQ(c.value, 0.0);
  const auto raw = beta_distance(FieldModel::uniform_indicator(1, false), lat, {0.0}, {1.0}, {1, 1}, 2000, 2);
  EXPECT_EQ(raw.value, 0.0);
  EXPECT_THROW(beta_distance(FieldModel::constant(1, 0), lat, {0.9}, {0.1}, {1, 1}, 50, 1), PreconditionError);
}

TEST(BetaDistance, CenteredIndicatorMatchesIntegral) {
  const Lattice lat(1, 11);
  const auto model = FieldModel::uniform_indicator(1, true);
  for (auto [x1, x3] : {std::pair{0.2, 0.8}, std::pair{0.0, 1.0}, std::pair{0.3, 0.5}}) {
    double exact = 0;
    for (std::size_t k = 0; k < lat.size(); ++k) {
      const double x2 = lat.coord(k);
      if (x2 >= x1 - 1e-12 && x2 <= x3 + 1e-12) exact = std::max(exact, centered_indicator_beta(x2 - x1, x3 - x2));
    }
    const auto est = beta_distance(model, lat, {x1}, {x3}, {1, 1}, 20000, 3);
    EXPECT_NEAR(est.value, exact, 4.5 * est.std_error + 1e-12) << x1 << " " << x3;
  }
  EXPECT_EQ(beta_distance(model, lat, {0.4}, {0.4}, {1, 2}, 100, 4).value, 0.0);
}

TEST(BetaDistance, SymmetricUnderMaskComplement) {
  // Swapping s across complementary masks equals reflecting the field.
  const Lattice lat(1, 11);
  const auto model = FieldModel::uniform_indicator(1, true);
  const auto a = beta_distance(model, lat, {0.1}, {0.7}, {1, 2}, 3000, 5);
  const auto b = beta_distance(model, lat, {0.3}, {0.9}, {2, 1}, 3000, 6);
  EXPECT_NEAR(a.value, b.value, 4.5 * std::hypot(a.std_error, b.std_error));
}

TEST(GlsNorm, Examples) {
  const auto z = gaussian_samples(5000, 7);
  const auto deg = gls_norm(z, PsiFunction::degenerate(3));
  EXPECT_NEAR(deg.value, lp_norm(z, 3), 1e-9);
  EXPECT_FALSE(deg.infinite);
  const auto nat = gls_norm(gaussian_abs_moment_norm, gaussian_natural_psi());
  EXPECT_NEAR(nat.value, 1.0, 1e-12);
  EXPECT_FALSE(nat.infinite);
  EXPECT_DOUBLE_EQ(gls_norm({-4.0, -4.0}, PsiFunction::degenerate(5)).value, 4.0);
}

TEST(GlsNorm, DivergentRatioIsFlagged) {
  const auto psi = PsiFunction::closed_form([](double) { return 1.0; }, kInf, false, "one");
  EXPECT_TRUE(gls_norm([](double p) { return p; }, psi).infinite);
  EXPECT_TRUE(gls_norm([](double p) { return p > 3 ? kInf : 1.0; }, psi).infinite);
}

TEST(GlsNorm, NaturalFunctionOfSimulatedFamilyGivesOne) {
  std::vector<std::vector<double>> family;
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto v = gaussian_samples(3000, 20 + s);
    for (auto& x : v) x *= 0.5 + 0.3 * static_cast<double>(s);
    family.push_back(v);
  }
  const auto psi = natural_psi(family, logspace(1, 12, 30));
  double top = 0;
  for (const auto& f : family) top = std::max(top, gls_norm(f, psi).value);
  EXPECT_NEAR(top, 1.0, 1e-9);
}

TEST(NaturalPsi, Examples) {
  const auto g = natural_psi(gaussian_abs_moment_norm, {1, 2, 4});
  EXPECT_NEAR(g(2), 1.0, 1e-12);
  EXPECT_NEAR(g(1), std::sqrt(2 / M_PI), 1e-12);
  const auto rad = natural_psi({{1, -1, 1, -1}}, {1, 3, 9});
  for (double p : rad.table_v()) EXPECT_DOUBLE_EQ(p, 1.0);
  const auto two = natural_psi({{1, 1}, {2, -2}}, {1, 2, 5});
  for (double p : two.table_v()) EXPECT_DOUBLE_EQ(p, 2.0);
  EXPECT_THROW(natural_psi([](double) { return kInf; }, {1, 2}), ModelError);
  const auto cut = natural_psi([](double p) { return p < 3 ? 1.0 : kInf; }, {1, 2, 4});
  EXPECT_EQ(cut.table_p().size(), 2u);
}

TEST(YfTail, Examples) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(yf_tail(PsiFunction::degenerate(2), 1, e * e).value, std::exp(-4.0), 1e-9);
  const auto expo = PsiFunction::closed_form([](double p) { return std::exp(p); }, kInf, false, "exp");
  for (double w : {2.5, 4.0, 9.0}) EXPECT_NEAR(yf_tail(expo, 2.0, 2.0 * std::exp(w)).vstar, w * w / 4, 1e-6);
  EXPECT_THROW(yf_tail(PsiFunction::degenerate(2), 1, 2.0), DomainError);
  EXPECT_THROW(yf_tail(PsiFunction::degenerate(2), 0, 5.0), ArgumentError);
}

TEST(YfTail, GaussianBoundDominatesTrueTail) {
  const auto psi = gaussian_natural_psi();
  for (double y : linspace(std::exp(1.0), 9.0, 40)) {
    const auto t = yf_tail(psi, 1.0, y);
    EXPECT_GT(t.value, 0.0);
    EXPECT_LE(t.value, 1.0);
    EXPECT_GE(t.value, std::erfc(y / std::sqrt(2.0))) << y;
  }
}

TEST(MinTailBound, SingleVariableIsScalarTail) {
  const auto psi = gaussian_natural_psi();
  for (double u : {3.0, 6.0}) {
    double brute = kInf;
    for (double p : linspace(1, 64 * (1 - 1e-9), 20000)) brute = std::min(brute, std::pow(psi(p) / u, p));
    const auto m = min_tail_bound({psi}, {1.0}, u);
    EXPECT_LE(m.value, brute * (1 + 1e-6));
    EXPECT_GE(m.value, brute * (1 - 1e-3));
  }
}

TEST(MinTailBound, DegeneratePairAndVacuous) {
  for (double r : {2.0, 3.0}) {
    const auto m = min_tail_bound({PsiFunction::degenerate(r), PsiFunction::degenerate(r)}, {1, 1}, 2.0);
    EXPECT_NEAR(m.value, std::pow(2.0, -r), 1e-6 * std::pow(2.0, -r));
    EXPECT_FALSE(m.vacuous);
  }
  const auto v = min_tail_bound({PsiFunction::degenerate(2), PsiFunction::degenerate(2)}, {1, 1}, 0.8);
  EXPECT_GE(v.value, 1.0);
  EXPECT_TRUE(v.vacuous);
  EXPECT_THROW(min_tail_bound({PsiFunction::degenerate(2)}, {1, 1}, 2.0), ArgumentError);
}

TEST(MinTailBound, DominatesEmpiricalMinTail) {
  // Two correlated Gaussians with their natural functions.
  std::mt19937_64 g(8);
  std::normal_distribution<double> z;
  std::size_t hits = 0;
  const std::size_t n = 200000;
  for (std::size_t r = 0; r < n; ++r) {
    const double a = z(g), b = 0.8 * a + 0.6 * z(g);
    if (std::min(std::abs(a), std::abs(b)) > 2.5) ++hits;
  }
  const auto m = min_tail_bound({gaussian_natural_psi(), gaussian_natural_psi()}, {1, 1}, 2.5);
  EXPECT_GE(m.value, static_cast<double>(hits) / static_cast<double>(n));
}

TEST(RosenthalTransform, Examples) {
  const auto one = PsiFunction::closed_form([](double) { return 1.0; }, kInf, false, "one");
  const auto t = rosenthal_transform(one, 1.0);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(t.psi(e2), e2 / 2, 1e-12);
  EXPECT_TRUE(t.trimmed);
  EXPECT_EQ(t.psi.p_min(), 2.0);
  const auto tab = rosenthal_transform(PsiFunction::tabulated({1, 1.5, 2, 4, 8}, {1, 1, 1, 2, 3}), 2.0);
  EXPECT_TRUE(tab.trimmed);
  EXPECT_EQ(tab.psi.table_p().size(), 3u);
  EXPECT_NEAR(tab.psi(4), 2 * 4 / std::log(4.0) * 2, 1e-12);
  EXPECT_THROW(rosenthal_transform(one, 0), ArgumentError);
  EXPECT_THROW(rosenthal_transform(PsiFunction::degenerate(1.5), 1), ArgumentError);
}

TEST(RosenthalTransform, RatioBoundedOnFiniteSupportAndIncreasing) {
  const auto psi = PsiFunction::closed_form([](double p) { return 1 + std::log(p); }, 10, true, "log");
  const auto t = rosenthal_transform(psi, 1.0);
  double prev = 0;
  for (double p : linspace(2, 10, 50)) {
    const double ratio = t.psi(p) / psi(p);
    EXPECT_LE(ratio, 10 / std::log(10.0) + 1e-12);
    EXPECT_GE(ratio, std::exp(1.0) - 1e-12);
    if (p >= std::exp(1.0)) {
      EXPECT_GT(ratio, prev);
      prev = ratio;
    }
  }
}

TEST(DeltaPlus, Examples) {
  EXPECT_EQ(delta_plus([](std::size_t m, double) { return m ? 0.0 : 1.0; }, {1, 1}, 1).value, 0.0);
  const auto sym = delta_plus([](std::size_t, double p) { return gaussian_abs_moment_norm(p); }, {1, 1}, 1);
  EXPECT_NEAR(sym.alpha[0], 2.0, 1e-6);
  EXPECT_NEAR(sym.alpha[1], 2.0, 1e-6);
  const auto wide = delta_plus([](std::size_t, double p) { return gaussian_abs_moment_norm(p); }, {3, 3}, 1);
  EXPECT_NEAR(wide.alpha[0], wide.alpha[1], 1e-3);
  EXPECT_NEAR(delta_tilde([](std::size_t, double p) { return gaussian_abs_moment_norm(p); }, {3, 3}, 1, wide.alpha),
              wide.value, 1e-9 * wide.value);
  EXPECT_THROW(delta_tilde([](std::size_t, double) { return 1.0; }, {1, 1}, 1, {1.5, 3}), DomainError);
}

TEST(DeltaPlus, DominatesMonteCarloDelta) {
  const Lattice lat(1, 11);
  const auto base = FieldModel::uniform_indicator(1, true);
  const Point x1{0.2}, x3{0.8};
  const std::size_t reps = 3000, a = lat.node_of(x1), c = lat.node_of(x3);
  // U(M, p) = sup over n and x2 of |Delta(M)|_p, from the same paths.
  std::vector<std::vector<std::vector<double>>> inc(2);
  double delta_mc = 0;
  for (std::size_t n : {1u, 10u, 100u}) {
    const auto model = FieldModel::partial_sum(base, n);
    delta_mc = std::max(delta_mc, beta_distance(model, lat, x1, x3, {1, 1}, reps, 30 + n).value);
    std::vector<SamplePath> paths;
    for (std::size_t r = 0; r < reps; ++r) paths.push_back(sample_path(model, lat, SeedSpec{30 + n, r}));
    for (std::size_t b = a; b <= c; ++b)
      for (std::size_t m = 0; m < 2; ++m) {
        std::vector<double> v(reps);
        for (std::size_t r = 0; r < reps; ++r) v[r] = paths[r].values[b] - paths[r].values[m ? c : a];
        inc[m].push_back(v);
      }
  }
  const auto U = [&](std::size_t m, double p) {
    double best = 0;
    for (const auto& v : inc[m]) best = std::max(best, lp_norm(v, p));
    return best;
  };
  EXPECT_GE(delta_plus(U, {1, 1}, 1.0).value, delta_mc);
}
