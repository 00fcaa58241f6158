#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "sheatlab/heat_kernel.hpp"

using namespace sheatlab;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Adaptive Gauss-Kronrod over [-20 sd, 20 sd].
template <class F>
double integrate_over_line(F f, double sd) {
  return gauss_kronrod<double, 61>::integrate(f, -20.0 * sd, 20.0 * sd, 15, 1e-14);
}

}  // namespace

TEST(KernelValue, UnitPrefactor) {
  EXPECT_NEAR(kernel_value({1.0, 1.0 / (2.0 * std::numbers::pi)}, 0.0), 1.0, 1e-15);
}

TEST(KernelValue, SymmetricAndPositive) {
  for (double x : {0.1, 0.7, 2.5, 9.0}) {
    EXPECT_EQ(kernel_value({1.0, 1.0}, x), kernel_value({1.0, 1.0}, -x));
    EXPECT_GT(kernel_value({1.0, 1.0}, x), 0.0);
  }
}

TEST(KernelValue, RejectsNonpositiveParameters) {
  EXPECT_THROW(kernel_value({1.0, 0.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(kernel_value({-1.0, 1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(kernel_l2_norm_sq({0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(kernel_l2_time_integral({1.0, -1.0}), std::invalid_argument);
}

TEST(KernelValue, IntegratesToOne) {
  for (const KernelParams p : {KernelParams{1.0, 1.0}, {0.25, 3.0}, {2.0, 0.01}, {7.0, 11.0}}) {
    const double sd = std::sqrt(p.kappa * p.t);
    const double total = integrate_over_line([&](double z) { return kernel_value(p, z); }, sd);
    EXPECT_NEAR(total, 1.0, 1e-10) << "kappa=" << p.kappa << " t=" << p.t;
  }
}

TEST(KernelL2NormSq, ClosedForm) {
  EXPECT_NEAR(kernel_l2_norm_sq({1.0, 1.0 / (4.0 * std::numbers::pi)}), 1.0, 1e-15);
  EXPECT_NEAR(kernel_l2_norm_sq({4.0, 0.3}), 0.5 * kernel_l2_norm_sq({1.0, 0.3}), 1e-15);
}

TEST(KernelL2NormSq, MatchesQuadratureOfSquare) {
  const KernelParams p{2.0, 3.0};
  const double q = integrate_over_line([&](double z) { return std::pow(kernel_value(p, z), 2); }, std::sqrt(6.0));
  EXPECT_NEAR(q, 1.0 / std::sqrt(24.0 * std::numbers::pi), 1e-10);
  EXPECT_NEAR(kernel_l2_norm_sq(p), q, 1e-10);
}

TEST(KernelL2TimeIntegral, ClosedForm) {
  EXPECT_NEAR(kernel_l2_time_integral({1.0, std::numbers::pi}), 1.0, 1e-15);
  EXPECT_EQ(kernel_l2_time_integral({3.0, 0.0}), 0.0);
}

TEST(KernelL2TimeIntegral, MatchesTimeQuadrature) {
  // s^{-1/2} singularity at 0: tanh-sinh handles endpoint singularities.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double q = ts.integrate([](double s) { return kernel_l2_norm_sq({2.0, s}); }, 0.0, 1.0);
  EXPECT_NEAR(q, std::sqrt(1.0 / (2.0 * std::numbers::pi)), 1e-8);
  EXPECT_NEAR(kernel_l2_time_integral({2.0, 1.0}), q, 1e-8);
}

TEST(GaussianEvenMoment, DoubleFactorials) {
  EXPECT_EQ(gaussian_even_moment(1.0, 1), 1.0);
  EXPECT_EQ(gaussian_even_moment(1.0, 2), 3.0);
  EXPECT_EQ(gaussian_even_moment(1.0, 3), 15.0);
  EXPECT_EQ(gaussian_even_moment(2.0, 2), 12.0);
  EXPECT_THROW(gaussian_even_moment(1.0, 0), std::invalid_argument);
  EXPECT_THROW(gaussian_even_moment(-1.0, 2), std::invalid_argument);
}

TEST(GaussianEvenMoment, MatchesMonteCarlo) {
  // E (sqrt(2) Z)^4 over 10^7 draws; Var((sqrt 2 Z)^4) = 16 * 105 - 144.
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0));
  constexpr int n = 10'000'000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = normal(rng);
    acc += x * x * x * x;
  }
  const double se = std::sqrt((16.0 * 105.0 - 144.0) / n);
  EXPECT_NEAR(acc / n, gaussian_even_moment(2.0, 2), 3.0 * se);
}

TEST(GaussianEvenMoment, RecurrenceRatio) {
  for (double v : {0.3, 1.0, 2.0, 5.5}) {
    for (int k = 2; k <= 10; ++k) {
      EXPECT_DOUBLE_EQ(gaussian_even_moment(v, k) / gaussian_even_moment(v, k - 1), v * (2.0 * k - 1.0));
    }
  }
}

TEST(MuT, Values) {
  EXPECT_NEAR(mu_t(1.0, {1.0, std::numbers::pi}), 2.0 / std::numbers::e, 1e-15);
  EXPECT_NEAR(mu_t(1.0, {1.0, std::numbers::pi}), 0.735759, 1e-6);
  EXPECT_NEAR(mu_t(2.0, {1.3, 0.4}), 4.0 * mu_t(1.0, {1.3, 0.4}), 1e-14);
  // kappa = 4, t = pi: (2/e) sqrt(1/4) = 1/e
  EXPECT_NEAR(mu_t(1.0, {4.0, std::numbers::pi}), 1.0 / std::numbers::e, 1e-12);
  EXPECT_THROW(mu_t(0.0, {1.0, 1.0}), std::invalid_argument);
}
