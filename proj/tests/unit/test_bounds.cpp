#include <gtest/gtest.h>

#include <cmath>

#include "skorokhod/bounds.hpp"

using namespace skorokhod;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

}  // namespace

TEST(QSeries, GeometricExample) {
  const auto s = q_series([](double e) { return std::pow(e, -0.5); }, [](double u) { return std::pow(u, 0.25); }, 16,
                          SequenceFamily::geometric_eps(0.5));
  // each term is 2^(1/4) 2^(-k/4)
  const double exact = std::pow(2.0, 0.25) / (1 - std::pow(2.0, -0.25));
  EXPECT_NEAR(s.value, exact, 1e-9 * exact);
  EXPECT_NEAR(s.value, 7.4744, 1e-4);
  EXPECT_FALSE(s.divergent);
  EXPECT_LT(s.remainder, 1e-10 * s.value);
}

TEST(QSeries, DivergentSignals) {
  for (double rho : {0.25, 0.4}) {
    const auto s = q_series([](double e) { return std::pow(e, -0.5); }, [&](double u) { return std::pow(u, 2 * rho); },
                            10, SequenceFamily::geometric_eps(0.5));
    EXPECT_TRUE(s.divergent) << rho;
    EXPECT_EQ(s.value, kInf);
  }
  const auto one = q_series([](double) { return 1.0; }, [](double u) { return u * u; }, 10,
                            SequenceFamily::geometric_eps(0.5));
  EXPECT_TRUE(one.divergent);
  const auto zero_lambda = q_series([](double) { return 1.0; }, [](double) { return 0.0; }, 10,
                                    SequenceFamily::geometric_eps(0.5));
  EXPECT_TRUE(zero_lambda.divergent);
  EXPECT_THROW(q_series([](double) { return 1.0; }, [](double) { return 1.0; }, 0, SequenceFamily::geometric_eps(0.5)),
               ArgumentError);
}

TEST(QSeries, CustomTableAndFloor) {
  const auto fam = SequenceFamily::custom({2, 1, 0.5}, {0.5, 0.5});
  EXPECT_TRUE(fam.admissible());
  const auto s = q_series([](double e) { return 1 / e; }, [](double u) { return u; }, 4, fam);
  EXPECT_NEAR(s.value, 1.0 * 2 / 2 + 2.0 * 1 / 2, 1e-15);
  const auto cut = q_series([](double) { return 1.0; }, [](double u) { return u; }, 4,
                            SequenceFamily::geometric_eps(0.5), 1e-12, 0.2);
  EXPECT_EQ(cut.terms, 4u);  // eps(4) = 1/8 < 0.2
  EXPECT_FALSE(cut.divergent);
}

TEST(SequenceFamily, Admissibility) {
  EXPECT_TRUE(SequenceFamily::geometric_eps(0.3).admissible());
  EXPECT_DOUBLE_EQ(SequenceFamily::geometric_theta(0.5, 0.8).eps(1), 1.0);
  EXPECT_FALSE(theorem31_literal_sequences(0.5, 2).admissible());
  EXPECT_TRUE(theorem31_shifted_sequences(0.5, 2).admissible());
  EXPECT_FALSE(SequenceFamily::custom({2, 1, 0.5}, {0.6, 0.3}).admissible());
  EXPECT_FALSE(SequenceFamily::custom({2, 1, 1.5}, {0.5, 0.5}).admissible());
  EXPECT_THROW(SequenceFamily::geometric_eps(1.0), ArgumentError);
  EXPECT_THROW(SequenceFamily::custom({1}, {}), ArgumentError);
}

TEST(QOptimize, ImprovesOnFixedFamily) {
  const EntropyOracle N = [](double e) { return std::pow(e, -0.5); };
  const LambdaOracle lam = [](double u) { return std::pow(u, 0.25); };
  const auto fixed = q_series(N, lam, 16, SequenceFamily::geometric_eps(0.5));
  const auto opt = q_optimize(N, lam, 16);
  EXPECT_LT(opt.value(), fixed.value);
  EXPECT_NE(opt.s, 0.5);
  const auto opt2 = q_optimize(N, lam, 16, SequenceFamily::Kind::geometric_theta);
  EXPECT_LE(opt2.value(), opt.value() * (1 + 1e-9));
  for (double s : {0.2, 0.6, 0.9})
    EXPECT_LE(opt.value(), q_series(N, lam, 16, SequenceFamily::geometric_eps(s)).value * (1 + 1e-12));
  EXPECT_THROW(q_optimize(N, lam, 16, SequenceFamily::Kind::custom), ArgumentError);
}

TEST(QOptimize, DivergentEverywhere) {
  const auto r = q_optimize([](double e) { return std::pow(e, -0.8); }, [](double u) { return std::pow(u, 0.3); }, 10);
  EXPECT_TRUE(r.divergent());
}

TEST(QOptimize, PowerLawExponents) {
  const auto us = logspace(10, 1e4, 8);
  // Example 2.1 regime: gamma = 0.5, 2 rho = 0.25
  std::vector<double> q1, q2;
  for (double u : us) {
    q1.push_back(q_optimize([](double e) { return 2 * std::pow(e, -0.5); }, [](double v) { return std::pow(v, 0.25); },
                            u)
                     .value());
    q2.push_back(q_optimize([](double e) { return std::pow(e, -0.5); }, [](double v) { return std::pow(v, 2.0); }, u,
                            SequenceFamily::Kind::geometric_theta)
                     .value());
  }
  EXPECT_NEAR(slope(us, q1), -0.25, 0.05);
  EXPECT_NEAR(slope(us, q2), -2.0, 0.05);
}

TEST(Theorem31, Examples) {
  EXPECT_NEAR(theorem31_w(0.5), 6.2852, 1e-4);
  EXPECT_NEAR(theorem31_bound(1, 1, 0.5, 2, 10), 4.966, 1e-3);
  EXPECT_NEAR(theorem31_bound(1, 1, 0.5, 2, 20) / theorem31_bound(1, 1, 0.5, 2, 10), 0.25, 1e-12);
  EXPECT_GT(theorem31_bound(1, 1, 0.999, 2, 10), 1e6);
  EXPECT_THROW(theorem31_bound(1, 1, 1.0, 2, 10), DomainError);
  EXPECT_THROW(theorem31_bound(1, 1, 0.0, 2, 10), DomainError);
  EXPECT_THROW(theorem31_bound(1, 1, 0.5, 2, 0.5), DomainError);
}

TEST(Theorem31, PrescribedSequencesAgainstClosedForm) {
  const double gamma = 0.5;
  for (double p : {0.5, 1.0, 2.0}) {
    const EntropyOracle N = [&](double e) { return std::pow(e, -gamma); };
    const LambdaOracle lam = [&](double u) { return std::pow(u, p); };
    for (double u : {2.0, 10.0, 100.0}) {
      const double closed = theorem31_bound(1, 1, gamma, p, u);
      const auto shifted = q_series(N, lam, u, theorem31_shifted_sequences(gamma, p));
      const auto literal = q_series(N, lam, u, theorem31_literal_sequences(gamma, p));
      ASSERT_FALSE(shifted.divergent);
      EXPECT_GT(shifted.value / closed, 0.1);
      EXPECT_LT(shifted.value / closed, 10.0);
      EXPECT_LT(literal.value, shifted.value);
      const auto opt = q_optimize(N, lam, u, SequenceFamily::Kind::geometric_theta);
      EXPECT_LE(opt.value(), shifted.value * (1 + 1e-9));
    }
  }
}

TEST(AssembleKappaBound, Examples) {
  const auto b = assemble_kappa_bound(0.1, 0.4);
  EXPECT_NEAR(b.value, 0.04, 1e-15);
  EXPECT_FALSE(b.vacuous);
  EXPECT_EQ(bound_flag(b), "ok");
  EXPECT_TRUE(assemble_kappa_bound(5.0, 0.4).vacuous);
  EXPECT_EQ(bound_flag(assemble_kappa_bound(5.0, 0.4)), "vacuous");
  const auto div = assemble_kappa_bound(SeriesValue{kInf, true, 3, 0}, 0.4);
  EXPECT_TRUE(div.divergent);
  EXPECT_EQ(bound_flag(div), "divergent");
  const Lattice lat(1, 101);
  const SigmaCurve flat(normalize(QuasiDistance::power_euclidean(1), lat), lat);
  const auto nc = assemble_kappa_bound(SeriesValue{0.1, false, 1, 0}, flat, 0.05);
  EXPECT_NEAR(nc.sigma, 2.0, 1e-12);
  EXPECT_TRUE(nc.non_certifying);
  EXPECT_EQ(bound_flag(nc), "non-certifying");
  EXPECT_THROW(assemble_kappa_bound(0.1, -1.0), ArgumentError);
}

TEST(GlsEnvelope, Example51) {
  const double e = std::exp(1.0);
  const LogOracle log_k = [](double q) { return q * std::log(q); };
  const auto r = gls_envelope_example51(log_k, e * e);
  EXPECT_NEAR(r.value, std::exp(-e), 1e-9);
  EXPECT_NEAR(r.argmin, e, 1e-4);
  const auto at_one = gls_envelope_example51(log_k, 1.0);
  EXPECT_NEAR(at_one.value, std::exp(-1 / e), 1e-9);
  EXPECT_TRUE(gls_envelope_example51([](double) { return 0.0; }, 1.0).vacuous);
  EXPECT_THROW(gls_envelope_example51(log_k, 0.5), DomainError);
  EXPECT_THROW(gls_envelope_example51([](double) { return kInf; }, 5.0), NoFiniteBoundError);
}

TEST(GlsEnvelope, Theorem52LogLaw) {
  for (double v : {1.0, 2.0}) {
    const LogOracle log_up = [&](double p) { return std::pow(p, 1 + v); };
    std::vector<double> x, y;
    for (double lu : linspace(50, 400, 12)) {
      const auto r = gls_envelope_theorem52_log(log_up, 0.5, kInf, lu);
      x.push_back(lu);
      y.push_back(-r.log_value);
    }
    EXPECT_NEAR(slope(x, y), 1 + 1 / v, 0.1) << v;
  }
  const auto direct = gls_envelope_theorem52([](double p) { return p * p; }, 0.5, 8.0, 1e6);
  EXPECT_LE(direct.argmin, 8.0);
}

TEST(CltUniformBound, Examples) {
  EXPECT_NEAR(clt_uniform_bound(1, 0.5, 1, 2, 10, 0.1), 0.4966, 1e-4);
  EXPECT_THROW(clt_uniform_bound(1, 0.5, 1, 0, 10, 0.1), DomainError);
  EXPECT_THROW(clt_uniform_bound(1, 0.5, 1, -1, 10, 0.1), DomainError);
}

TEST(NaturalKeyEstimate, DegenerateModels) {
  const Lattice lat(1, 11);
  const auto us = logspace(1, 4, 6);
  EXPECT_THROW(natural_key_estimate(FieldModel::constant(1, 1.0), lat, us, 1000, 1), DegenerateError);
  EXPECT_THROW(natural_key_estimate(FieldModel::uniform_indicator(1, false), lat, us, 1000, 1, 1.0), DegenerateError);
  EXPECT_THROW(natural_key_estimate(FieldModel::uniform_indicator(1, true), lat, us, 999, 1), ArgumentError);
}

TEST(NaturalKeyEstimate, PartialSumsCertifyOnFreshSample) {
  const Lattice lat(1, 11);
  const std::vector<FieldModel> models{FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 100)};
  const auto us = logspace(0.25, 2.0, 8);
  const auto key = natural_key_estimate(models, lat, us, 2000, 5, 0.25);
  EXPECT_GT(key.q_raw_max, 0.0);
  double mx = 0;
  for (std::size_t a = 0; a < lat.size(); ++a)
    for (std::size_t b = 0; b < lat.size(); ++b) mx = std::max(mx, key.q.between_nodes(lat, a, b));
  EXPECT_NEAR(mx, 1.0, 1e-12);
  for (std::size_t j = 1; j < key.lambda.size(); ++j) EXPECT_GE(key.lambda[j], key.lambda[j - 1]);
  for (std::size_t j = 0; j < key.lambda.size(); ++j) EXPECT_GE(key.lambda[j], key.lambda_raw[j]);
  EXPECT_LT(key.lambda.front(), key.lambda.back());
  EXPECT_EQ(key.lambda_at(0.1), 0.0);
  EXPECT_EQ(key.lambda_at(us[3] * 1.01), key.lambda[3]);

  const auto audit = audit_key_estimate(key, models, 2000, 6);
  EXPECT_GT(audit.cells, 0u);
  EXPECT_LE(static_cast<double>(audit.violations), 0.01 * static_cast<double>(audit.cells));
}

TEST(NaturalKeyEstimate, WorkerCountInvariant) {
  const Lattice lat(1, 9);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), 20);
  const auto a = natural_key_estimate(model, lat, logspace(0.25, 1, 4), 1000, 7, 0.25, 1);
  const auto b = natural_key_estimate(model, lat, logspace(0.25, 1, 4), 1000, 7, 0.25, 3);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.q_raw_max, b.q_raw_max);
}

TEST(FitLambdaPower, StaysBelowStepFunction) {
  KeyEstimate key;
  key.u_grid = {1, 2, 4, 8, 16};
  key.lambda = {0.0, 1.5, 3.0, 9.0, kInf};
  const auto law = fit_lambda_power(key);
  EXPECT_GT(law.p, 0.0);
  for (std::size_t j = 1; j + 1 < key.u_grid.size(); ++j) EXPECT_LE(law(key.u_grid[j + 1]), key.lambda[j] * (1 + 1e-12));
  key.lambda = {0.0, 0.0, 0.0, 1.0, kInf};
  EXPECT_THROW(fit_lambda_power(key), FitError);
}

TEST(NaturalBound, EntropyCapsAndSeries) {
  NaturalBound nb;
  nb.c_n = 2;
  nb.gamma = 0.5;
  nb.node_count = 50;
  nb.lambda = {1.0, 1.0};
  EXPECT_EQ(nb.entropy(1.5), 1.0);
  EXPECT_NEAR(nb.entropy(0.25), 4.0, 1e-12);
  EXPECT_EQ(nb.entropy(1e-6), 50.0);
  const auto q1 = nb.q(10), q2 = nb.q(100);
  EXPECT_FALSE(q1.divergent());
  EXPECT_LT(q2.value(), q1.value());
}
