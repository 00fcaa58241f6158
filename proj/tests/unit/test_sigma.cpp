#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sheatlab/sigma.hpp"

using namespace sheatlab;

namespace {

// Largest |sigma(u) - sigma(v)| / |u - v| over random pairs: wide pairs plus
// near-diagonal pairs that probe the derivative.
double max_slope(const SigmaSpec& spec, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wide(-50.0, 50.0);
  // Offsets stay above 1e-4 so cancellation keeps the quotient accurate to ~1e-10.
  std::uniform_real_distribution<double> near(1e-4, 1e-3);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const double u = (i % 2 == 0) ? wide(rng) : wide(rng) / 25.0;
    const double v = (i % 3 == 0) ? wide(rng) : u + (i % 2 == 0 ? near(rng) : -near(rng));
    if (u == v) continue;
    worst = std::max(worst, std::abs(evaluate(spec, u) - evaluate(spec, v)) / std::abs(u - v));
  }
  return worst;
}

}  // namespace

TEST(SigmaEvaluate, CatalogueValues) {
  EXPECT_EQ(evaluate(SigmaSpec::constant(0.5), 17.0), 0.5);
  EXPECT_EQ(evaluate(SigmaSpec::linear(2.0), 3.0), 6.0);
  EXPECT_EQ(evaluate(SigmaSpec::linear(2.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(evaluate(SigmaSpec::log_decay(1.0, 0.1), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(SigmaSpec::bounded(1.0, 2.0), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(evaluate(SigmaSpec::bounded(1.0, 2.0), -1.0), 2.0);
}

TEST(SigmaLipschitz, ExactForConstantAndLinear) {
  EXPECT_EQ(lipschitz_constant(SigmaSpec::constant(0.7)), 0.0);
  EXPECT_EQ(lipschitz_constant(SigmaSpec::linear(3.5)), 3.5);
}

TEST(SigmaLipschitz, BoundsBruteForceSlopes) {
  const SigmaSpec specs[] = {SigmaSpec::constant(1.0), SigmaSpec::bounded(1.0, 1.0), SigmaSpec::bounded(0.5, 3.0),
                             SigmaSpec::log_decay(1.0, 0.1), SigmaSpec::log_decay(2.0, 0.01),
                             SigmaSpec::linear(1.7)};
  std::uint64_t seed = 1;
  for (const auto& s : specs) {
    const double lip = lipschitz_constant(s);
    const double scan = max_slope(s, 1'000'000, seed++);
    EXPECT_LE(scan, lip * (1.0 + 1e-9) + 1e-15) << to_string(s.kind);
    if (lip > 0.0) {
      EXPECT_GT(scan, 0.9 * lip) << to_string(s.kind) << ": bound is not tight";
    }
  }
}

TEST(SigmaLowerBound, BoundedAndConstantStayAboveEps0) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  const auto bounded = SigmaSpec::bounded(0.8, 1.5);
  const auto constant = SigmaSpec::constant(0.8);
  for (int i = 0; i < 100'000; ++i) {
    const double x = u(rng) * (i % 2 ? 1e-6 : 1.0);
    EXPECT_GE(evaluate(bounded, x), 0.8);
    EXPECT_LE(evaluate(bounded, x), 0.8 + 1.5);
    EXPECT_GE(evaluate(constant, x), 0.8);
  }
}

TEST(SigmaLogDecay, DecayConditionProductIncreases) {
  // sigma(x) (log|x|)^{1/6 - gamma} increases along x = 10, 10^2, ..., 10^8.
  // With this family the product tends to eps0; multiplying by any extra
  // (log|x|)^delta, delta > 0, makes it unbounded.
  const auto s = SigmaSpec::log_decay(1.0, 0.1);
  const double p = s.log_decay_power();
  double previous = 0.0;
  for (int e = 1; e <= 8; ++e) {
    const double x = std::pow(10.0, e);
    const double product = evaluate(s, x) * std::pow(std::log(x), p);
    EXPECT_GT(product, previous);
    previous = product;
  }
  EXPECT_LE(previous, 1.0);
  // With the extra (log|x|)^0.05 the product keeps growing, by about
  // (log 1e300 / log 1e8)^0.05 = 1.198 between these two points.
  const auto boosted = [&](double x) { return evaluate(s, x) * std::pow(std::log(x), p + 0.05); };
  EXPECT_GT(boosted(1e300), 1.15 * boosted(1e8));
}

TEST(SigmaLogDecay, StrictlyPositive) {
  const auto s = SigmaSpec::log_decay(0.3, 0.15);
  for (double x : {0.0, 1.0, -1e3, 1e12, -1e300}) EXPECT_GT(evaluate(s, x), 0.0);
}

TEST(SigmaSpecValidate, RejectsBadParameters) {
  EXPECT_THROW(SigmaSpec::linear(0.0).validate(), ConfigError);
  EXPECT_THROW(SigmaSpec::log_decay(1.0, 0.2).validate(), ConfigError);
  EXPECT_THROW(SigmaSpec::bounded(0.0, 1.0).validate(), ConfigError);
  EXPECT_THROW(parse_sigma_kind("quadratic"), ConfigError);
  EXPECT_EQ(parse_sigma_kind("bounded"), SigmaKind::BoundedBelow);
}
