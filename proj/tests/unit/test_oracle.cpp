#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sheatlab/oracle.hpp"
#include "support/series.hpp"

using namespace sheatlab;

namespace {

// I_l in closed form: (4 pi kappa)^{-(l+1)/2} pi^{(l+1)/2} t^{(l+1)/2} / Gamma((l+1)/2 + 1).
double abel_closed_form(int l, double kappa, double t) {
  const double h = 0.5 * (l + 1);
  return std::pow(4.0 * std::numbers::pi * kappa, -h) * std::pow(std::numbers::pi * t, h) / std::tgamma(h + 1.0);
}

double renewal(double a, double kappa, double t) { return renewal_second_moment({kappa, a, t}); }

}  // namespace

TEST(Renewal, MatchesErfClosedForm) {
  // lambda = a / (2 sqrt(kappa)) = 1 at t = 1: e (1 + erf 1).
  EXPECT_NEAR(renewal(2.0, 1.0, 1.0), 5.00898008076228, 1e-8);
  for (double lambda : {0.25, 0.7, 1.5}) {
    for (double t : {0.3, 1.0, 2.5}) {
      const double z = lambda * std::sqrt(t);
      const double exact = std::exp(z * z) * (1.0 + std::erf(z));
      EXPECT_NEAR(renewal(2.0 * lambda * std::sqrt(0.5), 0.5, t) / exact, 1.0, 1e-8) << lambda << " " << t;
    }
  }
}

TEST(Renewal, MatchesPicardSeries) {
  for (double a : {0.5, 1.0, 3.0}) {
    for (double kappa : {0.25, 1.0, 4.0}) {
      const double t = 1.7;
      EXPECT_NEAR(renewal(a, kappa, t) / test_support::picard_second_moment(a, kappa, t), 1.0, 1e-7);
    }
  }
}

TEST(Renewal, CurveStartsAtOneAndIncreases) {
  const auto curve = renewal_second_moment_curve({1.0, 1.0, 2.0, 500});
  ASSERT_EQ(curve.t.size(), 501u);
  EXPECT_EQ(curve.f.front(), 1.0);
  EXPECT_DOUBLE_EQ(curve.t.back(), 2.0);
  for (std::size_t i = 1; i < curve.f.size(); ++i) EXPECT_GT(curve.f[i], curve.f[i - 1]);
  for (std::size_t i = 0; i < curve.t.size(); i += 50) {
    EXPECT_NEAR(curve.f[i], test_support::picard_second_moment(1.0, 1.0, curve.t[i]), 1e-7);
  }
}

TEST(Renewal, MonotoneInParameters) {
  EXPECT_LT(renewal(1.0, 1.0, 1.0), renewal(1.2, 1.0, 1.0));
  EXPECT_LT(renewal(1.0, 1.0, 1.0), renewal(1.0, 1.0, 1.1));
  EXPECT_GT(renewal(1.0, 1.0, 1.0), renewal(1.0, 1.5, 1.0));
  EXPECT_EQ(renewal(0.0, 1.0, 1.0), 1.0);
  EXPECT_EQ(renewal(1.0, 1.0, 0.0), 1.0);
}

TEST(Renewal, RejectsBadInput) {
  EXPECT_THROW(renewal_second_moment({0.0, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(renewal_second_moment({1.0, -1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(renewal_second_moment({1.0, 1.0, 1.0, 50}), std::invalid_argument);
  // Refinement cannot settle for a huge coefficient on a coarse grid.
  EXPECT_THROW(renewal_second_moment({1.0, 40.0, 4.0, 100}), NonConvergence);
}

TEST(Renewal, LyapunovRatesSettle) {
  // (1/t) log f(t) -> lambda^2 with lambda = a / (2 sqrt(kappa)); here 1/4.
  // The leading correction is log 2 / t, from the factor 1 + erf -> 2.
  const double r80 = std::log(renewal(1.0, 1.0, 80.0)) / 80.0;
  const double r160 = std::log(renewal(1.0, 1.0, 160.0)) / 160.0;
  EXPECT_LT(std::abs(r160 - r80) / r160, 0.02);
  EXPECT_LT(r160, r80);
  EXPECT_NEAR(r160, 0.25 + std::log(2.0) / 160.0, 1e-3);
}

TEST(Renewal, DoublingResolutionChangesLittle) {
  const double coarse = renewal_second_moment({1.0, 2.0, 1.0, 500});
  const double fine = renewal_second_moment({1.0, 2.0, 1.0, 1000});
  EXPECT_LT(std::abs(fine - coarse) / fine, 1e-6);
}

TEST(AbelIntegral, ZerothOrder) {
  EXPECT_NEAR(iterated_abel_integral(0, 1.0, std::numbers::pi), 1.0, 1e-12);
  EXPECT_NEAR(iterated_abel_integral(0, 2.0, 0.5), std::sqrt(0.5 / (2.0 * std::numbers::pi)), 1e-12);
  EXPECT_EQ(iterated_abel_integral(3, 1.0, 0.0), 0.0);
}

TEST(AbelIntegral, MatchesClosedForm) {
  for (int l = 0; l <= 8; ++l) {
    for (double t : {0.5, 2.0}) {
      EXPECT_NEAR(iterated_abel_integral(l, 0.7, t) / abel_closed_form(l, 0.7, t), 1.0, 1e-8) << l;
    }
  }
  EXPECT_THROW(iterated_abel_integral(13, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(iterated_abel_integral(-1, 1.0, 1.0), std::invalid_argument);
}

TEST(AbelIntegral, RatiosDecay) {
  // Each extra level multiplies by a factor that shrinks with l.
  const double kappa = 1.0, t = 2.0;
  std::vector<double> I;
  for (int l = 0; l <= 7; ++l) I.push_back(iterated_abel_integral(l, kappa, t));
  for (int l = 0; l + 1 < 7; ++l) {
    EXPECT_LT(I[l + 2] / I[l + 1], I[l + 1] / I[l]) << l;
    EXPECT_GE(I[l] * I[0], I[l + 1]) << l;
  }
}

TEST(AbelIntegral, FirstOrderAgainstMonteCarlo) {
  // I_1(t) = int_0^t ds1 int_0^s1 ds2 (4 pi kappa)^{-1} ((t - s1)(s1 - s2))^{-1/2}.
  // Sampling s1 = t (1 - U^2) and s2 = s1 (1 - V^2) absorbs both singularities,
  // leaving the weight 4 sqrt(t s1) / (4 pi kappa).
  const double kappa = 1.0, t = 1.0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int n = 10'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform(rng), v = uniform(rng);
    const double s1 = t * (1.0 - u * u);
    const double s2 = s1 * (1.0 - v * v);
    // Both samples land inside the simplex 0 < s2 < s1 < t by construction.
    const double w = (s2 < s1 && s1 < t ? 4.0 * std::sqrt(t * s1) : 0.0) / (4.0 * std::numbers::pi * kappa);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(iterated_abel_integral(1, kappa, t), mean, 3.0 * se);
}

TEST(AbelIntegral, NeumannPartialSumsBoundFromBelow) {
  const double a = 1.5, kappa = 1.0, t = 1.0;
  const double f = renewal(a, kappa, t);
  double partial = 1.0;
  double previous_term = 1.0;
  for (int l = 0; l <= 12; ++l) {
    const double term = std::pow(a, l + 1) * iterated_abel_integral(l, kappa, t);
    partial += term;
    EXPECT_LT(partial, f + 1e-9);
    if (l >= 3) {
      EXPECT_LT(term / previous_term, 1.0);
    }
    previous_term = term;
  }
  EXPECT_NEAR(partial, f, 1e-4);
}

TEST(ConstantSigmaMoments, LowOrders) {
  const double v = 0.8 * 0.8 * std::sqrt(1.5 / (std::numbers::pi * 2.0));
  EXPECT_NEAR(constant_sigma_moments(0.8, 2.0, 1.5, 1), 1.0 + v, 1e-14);
  EXPECT_NEAR(constant_sigma_moments(0.8, 2.0, 1.5, 2), 1.0 + 6.0 * v + 3.0 * v * v, 1e-13);
  EXPECT_THROW(constant_sigma_moments(1.0, 1.0, 1.0, 0), std::invalid_argument);
}

TEST(ConstantSigmaMoments, FourthMomentAgainstMonteCarlo) {
  const double eps0 = 1.2, kappa = 0.8, t = 1.5;
  const double v = eps0 * eps0 * std::sqrt(t / (std::numbers::pi * kappa));
  std::mt19937_64 rng(78);
  std::normal_distribution<double> normal(0.0, std::sqrt(v));
  const int n = 10'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = 1.0 + normal(rng);
    const double q = u * u * u * u;
    sum += q;
    sum_sq += q * q;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(constant_sigma_moments(eps0, kappa, t, 2), mean, 3.0 * se);
}

TEST(ConstantSigmaMoments, SixthMomentAgainstMonteCarlo) {
  const double eps0 = 1.0, kappa = 1.0, t = 1.0;
  const double sd = eps0 * std::pow(t / (std::numbers::pi * kappa), 0.25);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, sd);
  const int n = 2'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = 1.0 + normal(rng);
    const double v = std::pow(u, 6);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(constant_sigma_moments(eps0, kappa, t, 3), mean, 5.0 * se);
}

TEST(ConstantSigmaMoments, SecondMomentSolvesRenewalChain) {
  // For constant sigma, E u^2 = 1 + eps0^2 int nu(t, ds) exactly (no feedback).
  const double eps0 = 0.9, kappa = 1.0, t = 2.0;
  EXPECT_NEAR(constant_sigma_moments(eps0, kappa, t, 1), 1.0 + eps0 * eps0 * iterated_abel_integral(0, kappa, t), 1e-10);
}
