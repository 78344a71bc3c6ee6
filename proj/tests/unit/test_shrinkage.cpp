#include <gtest/gtest.h>

#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mc_oracle.hpp"
#include "shrinksel/model.hpp"
#include "shrinksel/shrinkage.hpp"
#include "test_support.hpp"

using namespace shrinksel;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

TwoVarProblem problem(double rho, double tau, double x1, double x2) {
  TwoVarProblem p;
  p.rho = rho;
  p.tau = tau;
  p.mle1 = x1;
  p.mle2 = x2;
  return p;
}

// Posterior mean under beta ~ N(0, tau^2 I) straight from the normal equations.
Eigen::Vector2d ridge_mean(const TwoVarProblem& p) {
  Eigen::Matrix2d xtx;
  xtx << 1.0, p.rho, p.rho, 1.0;
  const Eigen::Matrix2d prec = xtx + Eigen::Matrix2d::Identity() / (p.tau * p.tau);
  return prec.ldlt().solve(xtx * Eigen::Vector2d(p.mle1, p.mle2));
}

// F * E, optionally times the numerator factor, in 50-digit arithmetic.
Big big_integrand(double k1d, double k2d, const TwoVarProblem& p, HsTerm which) {
  const Big k1 = k1d, k2 = k2d, rho = p.rho, tau = p.tau, x1 = p.mle1, x2 = p.mle2, s2 = p.sigma2;
  const Big t2 = tau * tau;
  const Big d = 1 - (1 - k1) * (1 - k2) * rho * rho;
  const Big f = pow(d, Big(-0.5)) / (1 - (1 - t2) * k1) / (1 - (1 - t2) * k2) / sqrt(1 - k1) / sqrt(1 - k2);
  const Big f1 = (rho * rho - 1 - rho * rho * k2) * k1 / d;
  const Big f2 = (rho * rho - 1 - rho * rho * k1) * k2 / d;
  const Big f3 = -rho * k1 * k2 / d;
  const Big e = exp((f1 * x1 * x1 + f2 * x2 * x2 + 2 * f3 * x1 * x2) / (2 * s2));
  switch (which) {
    case HsTerm::numerator_1: return (f1 * x1 + f3 * x2) * f * e;
    case HsTerm::numerator_2: return (f2 * x2 + f3 * x1) * f * e;
    default: return f * e;
  }
}

}  // namespace

TEST(NormalShrinkage, HandComputedValues) {
  const auto p = problem(0.5, 1.0, 2.0, 1.0);
  const auto s = normal_shrink_factors(p);
  // kappa = 1/2: denominators 15/16 give fifteenths throughout.
  EXPECT_NEAR(s.kappa, 0.5, 1e-15);
  EXPECT_NEAR(s.f1, -7.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.f2, -7.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.f3, -2.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.R1, 8.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.R2, 11.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.S1, 7.0 / 15.0, 1e-14);
  EXPECT_NEAR(s.S2, 4.0 / 15.0, 1e-14);
  const auto est = normal_estimator(p);
  EXPECT_NEAR(est[0], 1.0667, 5e-5);
  EXPECT_NEAR(est[1], 0.7333, 5e-5);
  EXPECT_NEAR(est[0] / est[1], 1.4545, 5e-5);
  EXPECT_TRUE(normal_ratio_below_mle(p));
}

TEST(NormalShrinkage, MatchesNormalEquations) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double x2 = (u(gen) < 0.5 ? -1 : 1) * (0.1 + 3 * u(gen));
    const double x1 = (u(gen) < 0.5 ? -1 : 1) * std::abs(x2) * (1 + 20 * u(gen));
    const auto p = problem(0.999 * u(gen), std::exp(-4 + 8 * u(gen)), x1, x2);
    const auto est = normal_estimator(p);
    const Eigen::Vector2d oracle = ridge_mean(p);
    EXPECT_NEAR(est[0], oracle(0), 1e-9 * (1 + std::abs(oracle(0))));
    EXPECT_NEAR(est[1], oracle(1), 1e-9 * (1 + std::abs(oracle(1))));
  }
}

TEST(NormalShrinkage, UncorrelatedIsUniform) {
  for (double tau : {0.01, 0.3, 1.0, 7.0}) {
    for (double a : {1.0, 1.5, 40.0}) {
      const auto p = problem(0.0, tau, a * 1.3, 1.3);
      const auto s = normal_shrink_factors(p);
      EXPECT_EQ(s.f3, 0.0);
      EXPECT_NEAR(s.S1, s.kappa, 1e-15);
      EXPECT_NEAR(s.S2, s.kappa, 1e-15);
      const auto est = normal_estimator(p);
      EXPECT_NEAR(est[0] / est[1], a, 1e-12 * a);
      EXPECT_NEAR(est[0], (1 - s.kappa) * p.mle1, 1e-15 * std::abs(p.mle1));
    }
  }
}

TEST(NormalShrinkage, EqualMagnitudesKeepRatio) {
  for (double rho : {0.1, 0.5, 0.99}) {
    const auto s = normal_shrink_factors(problem(rho, 0.7, 2.5, 2.5));
    EXPECT_NEAR(s.S1, s.S2, 1e-15);
    const auto est = normal_estimator(problem(rho, 0.7, 2.5, 2.5));
    EXPECT_NEAR(est[0] / est[1], 1.0, 1e-15);
  }
}

TEST(NormalShrinkage, FactorBoundsOnRandomProblems) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double rho = 0.001 + 0.998 * u(gen);
    const double tau = std::exp(std::log(0.01) + u(gen) * std::log(1e4));
    const double a = 1.0 + 99.0 * (1.0 - u(gen));  // (1, 100]
    const auto s = normal_shrink_factors(problem(rho, tau, a, 1.0));
    ASSERT_NEAR(s.f1, s.f2, 1e-12);
    ASSERT_LT(-1.0, s.f1);
    ASSERT_LT(s.f1, s.f3);
    ASSERT_LT(s.f3, 0.0);
    ASSERT_LT(0.0, s.S1);
    ASSERT_LT(s.S1, 1.0);
    ASSERT_LT(s.S2, 1.0);
  }
}

TEST(NormalShrinkage, NeverReversesOnRandomProblems) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double rho = 0.001 + 0.998 * u(gen);
    const double tau = std::exp(std::log(0.01) + u(gen) * std::log(1e4));
    const double a = 1.0 + 99.0 * (1.0 - u(gen));
    ASSERT_TRUE(normal_ratio_below_mle(problem(rho, tau, a, 1.0))) << rho << ' ' << tau << ' ' << a;
  }
  EXPECT_TRUE(normal_ratio_below_mle(problem(0.99, 1.0, 1.0 + 1e-6, 1.0)));
  EXPECT_TRUE(normal_ratio_below_mle(problem(0.99, 0.05, 1.0 + 1e-6, 1.0)));
}

TEST(NormalShrinkage, Preconditions) {
  EXPECT_THROW(normal_ratio_below_mle(problem(0.5, 1.0, 1.0, 1.0)), InvariantError);
  EXPECT_THROW(normal_shrink_factors(problem(0.5, 1.0, 1.0, 2.0)), InvariantError);
  EXPECT_THROW(normal_shrink_factors(problem(1.0, 1.0, 2.0, 1.0)), InvariantError);
  EXPECT_THROW(normal_shrink_factors(problem(-0.1, 1.0, 2.0, 1.0)), InvariantError);
  EXPECT_THROW(normal_shrink_factors(problem(0.5, 0.0, 2.0, 1.0)), InvariantError);
  EXPECT_THROW(normal_shrink_factors(problem(0.5, 1.0, 2.0, 0.0)), InvariantError);
}

TEST(HsIntegrand, MatchesHighPrecisionEvaluation) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const auto p = problem(0.99 * u(gen), std::exp(-3 + 5 * u(gen)), (u(gen) - 0.5) * 8, (u(gen) - 0.5) * 4 + 1e-3);
    const double k1 = 1e-4 + (1 - 2e-4) * u(gen);
    const double k2 = 1e-4 + (1 - 2e-4) * u(gen);
    for (auto which : {HsTerm::F_only, HsTerm::numerator_1, HsTerm::numerator_2}) {
      const double got = hs_integrand(k1, k2, p, which);
      const double want = big_integrand(k1, k2, p, which).convert_to<double>();
      EXPECT_NEAR(got, want, 1e-11 * std::abs(want) + 1e-300) << i;
    }
  }
}

TEST(HsIntegrand, SymmetricPoint) {
  const auto p = problem(0.7, 0.4, 1.3, 1.3);
  for (double k : {0.1, 0.5, 0.93}) {
    EXPECT_DOUBLE_EQ(hs_integrand(k, k, p, HsTerm::numerator_1), hs_integrand(k, k, p, HsTerm::numerator_2));
  }
}

TEST(HsIntegrand, FactorizesWithoutCorrelation) {
  const auto p = problem(0.0, 0.6, 2.0, -1.0);
  const double a = 0.2, b = 0.7, c = 0.35, d = 0.9;
  const double lhs = hs_integrand(a, c, p, HsTerm::F_only) * hs_integrand(b, d, p, HsTerm::F_only);
  const double rhs = hs_integrand(a, d, p, HsTerm::F_only) * hs_integrand(b, c, p, HsTerm::F_only);
  EXPECT_NEAR(lhs, rhs, 1e-13 * std::abs(lhs));
}

TEST(HsIntegrand, RejectsBoundary) {
  const auto p = problem(0.5, 1.0, 2.0, 1.0);
  EXPECT_THROW(hs_integrand(0.0, 0.5, p, HsTerm::F_only), InvariantError);
  EXPECT_THROW(hs_integrand(0.5, 1.0, p, HsTerm::F_only), InvariantError);
}

TEST(HsEstimator, SymmetricProblem) {
  const auto est = hs_estimator(problem(0.0, 0.5, 1.0, 1.0));
  EXPECT_NEAR(est.beta[0], est.beta[1], 1e-9);
  const auto corr = hs_estimator(problem(0.8, 0.5, -2.0, -2.0));
  EXPECT_NEAR(corr.beta[0], corr.beta[1], 1e-9);
}

TEST(HsEstimator, IndependentCoordinatesReverse) {
  const auto est = hs_estimator(problem(0.0, 0.5, 3.0, 1.0));
  EXPECT_GE(est.beta[0] / est.beta[1], 3.0);
  EXPECT_LE(est.error_estimate, 1e-6);
  // Each coordinate matches the one-dimensional horseshoe mean from the MC oracle.
  const auto mc = test_util::horseshoe_mc(0.0, 0.5, 3.0, 1.0, 2000000, 5);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(est.beta[j], mc.beta[j], 4 * mc.se[j]);
}

TEST(HsEstimator, AgreesWithMonteCarlo) {
  for (const auto& [rho, tau, x1, x2] : std::vector<std::array<double, 4>>{
           {0.95, 0.1, 3.0, 1.0}, {0.5, 1.0, 2.0, 1.0}, {0.97, 0.6, 15.0, 1.5}, {0.3, 0.05, -4.0, 2.0}}) {
    const auto est = hs_estimator(problem(rho, tau, x1, x2));
    const auto mc = test_util::horseshoe_mc(rho, tau, x1, x2, 2000000, 6);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(est.beta[j], mc.beta[j], 4 * mc.se[j]) << rho << ' ' << tau << ' ' << j;
    }
    // Classification agrees whenever the MC ratio is clearly on one side.
    const double mc_ratio = std::abs(mc.beta[0] / mc.beta[1]);
    const double a = std::abs(x1 / x2);
    const double mc_ratio_se = mc_ratio * std::hypot(mc.se[0] / mc.beta[0], mc.se[1] / mc.beta[1]);
    if (std::abs(mc_ratio - a) > 4 * mc_ratio_se) {
      EXPECT_EQ(std::abs(est.beta[0] / est.beta[1]) >= a, mc_ratio >= a);
    }
  }
}

TEST(HsEstimator, SignFlipsAndSwaps) {
  const auto base = hs_estimator(problem(0.9, 0.3, 2.5, 1.0));
  const auto flipped = hs_estimator(problem(0.9, 0.3, -2.5, -1.0));
  EXPECT_NEAR(flipped.beta[0], -base.beta[0], 1e-9);
  EXPECT_NEAR(flipped.beta[1], -base.beta[1], 1e-9);
  const auto swapped = hs_estimator(problem(0.9, 0.3, 1.0, 2.5));
  EXPECT_NEAR(swapped.beta[0], base.beta[1], 1e-7);
  EXPECT_NEAR(swapped.beta[1], base.beta[0], 1e-7);
}

TEST(HsEstimator, ExtremeInputsStayFinite) {
  for (const auto& p : {problem(0.99, 0.01, 40.0, 1.0), problem(0.94, 3.0, 200.0, 20.0), problem(0.0, 0.05, 1e-3, 1e-3)}) {
    try {
      const auto est = hs_estimator(p);
      EXPECT_TRUE(std::isfinite(est.beta[0]) && std::isfinite(est.beta[1]));
    } catch (const QuadratureError& e) {
      EXPECT_GT(e.achieved(), 0.0);
    }
  }
}

TEST(ReverseGrid, LayoutAndCsv) {
  const std::vector<double> rho{0.94, 0.99}, tau{0.1, 0.5, 0.9}, a{1.5, 10.0};
  const auto pts = reverse_shrinkage_grid(rho, tau, a, 1.0, 2);
  ASSERT_EQ(pts.size(), 12u);
  EXPECT_EQ(pts[0].problem.rho, 0.94);
  EXPECT_EQ(pts[1].a, 10.0);
  EXPECT_EQ(pts[2].problem.tau, 0.5);
  for (const auto& p : pts) {
    EXPECT_TRUE(p.failure.empty());
    EXPECT_DOUBLE_EQ(p.ratio_mle, p.a);
    EXPECT_EQ(p.reverse, p.ratio_shrunk >= p.ratio_mle);
    EXPECT_TRUE(p.sign_preserved);
  }
  const auto csv = grid_csv(pts);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rho,tau,a,x2,ratio_mle,ratio_shrunk,reverse,quad_error_estimate");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  // Threading does not change the numbers.
  const auto serial = reverse_shrinkage_grid(rho, tau, a, 1.0, 1);
  EXPECT_EQ(grid_csv(serial), csv);
}

TEST(ReverseGrid, UncorrelatedPointIsBlue) {
  for (double a : {1.1, 3.0, 10.0}) {
    const std::vector<double> rho{0.0}, tau{0.5}, av{a};
    const auto pts = reverse_shrinkage_grid(rho, tau, av, 1.0);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_TRUE(pts[0].reverse) << a;
  }
}

TEST(ReverseGrid, SignFlipInvariance) {
  const std::vector<double> rho{0.95, 0.98}, tau{0.1, 0.6}, a{2.0, 10.0};
  const auto pos = reverse_shrinkage_grid(rho, tau, a, 1.5);
  const auto neg = reverse_shrinkage_grid(rho, tau, a, -1.5);
  ASSERT_EQ(pos.size(), neg.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    EXPECT_EQ(pos[i].reverse, neg[i].reverse);
    EXPECT_NEAR(pos[i].ratio_shrunk, neg[i].ratio_shrunk, 1e-9 * pos[i].ratio_shrunk);
  }
}

TEST(ReverseGrid, DefaultGrids) {
  EXPECT_EQ(default_rho_grid().size(), 6u);
  EXPECT_EQ(default_tau_grid().size(), 19u);
  EXPECT_NEAR(default_tau_grid().front(), 0.05, 1e-15);
  EXPECT_NEAR(default_tau_grid().back(), 0.95, 1e-15);
  EXPECT_EQ(default_a_grid(), (std::vector<double>{1.1, 1.5, 2.0, 3.0, 5.0, 10.0}));
}
