#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sheatlab/noise.hpp"
#include "support/stats.hpp"

using namespace sheatlab;

TEST(Philox, KnownAnswerVectors) {
  // Random123 kat_vectors, philox4x32_10.
  EXPECT_EQ(Philox4x32({0u, 0u})({0u, 0u, 0u, 0u}),
            (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32({0xffffffffu, 0xffffffffu})({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}),
            (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32({0xa4093822u, 0x299f31d0u})({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
            (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

namespace {

std::vector<double> draws(const NoiseStream& s, std::size_t n, std::uint32_t step = 0) {
  std::vector<double> out(n);
  s.fill_normals(step, 0, out);
  return out;
}

GridSpec wide_grid() {
  GridSpec g;
  g.kappa = 1.0;
  g.dt = 1e-3;
  g.dx = 0.1;
  g.x_min = 0.0;
  g.x_max = 1000.0;  // 10^4 cells
  g.t_end = 0.1;     // 100 steps
  return g;
}

}  // namespace

TEST(DeriveStream, Deterministic) {
  const auto a = draws(derive_stream(42, 3, 7), 1000);
  const auto b = draws(derive_stream(42, 3, 7), 1000);
  EXPECT_EQ(a, b);
}

TEST(DeriveStream, ReplicatesUncorrelated) {
  constexpr std::size_t n = 1'000'000;
  const auto a = draws(derive_stream(11, 0, 0), n);
  const auto b = draws(derive_stream(11, 1, 0), n);
  EXPECT_LT(std::abs(test_support::correlation(a, b)), 3.0 / std::sqrt(double(n)));
}

TEST(DeriveStream, BlocksUncorrelated) {
  constexpr std::size_t n = 200'000;
  std::vector<std::vector<double>> cols;
  for (std::uint32_t b = 0; b < 4; ++b) cols.push_back(draws(derive_stream(5, 2, b), n));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      EXPECT_LT(std::abs(test_support::correlation(cols[i], cols[j])), 3.0 / std::sqrt(double(n)));
    }
  }
}

TEST(DeriveStream, SeedSensitivity) {
  const auto a = draws(derive_stream(1, 0, 0), 128);
  const auto b = draws(derive_stream(2, 0, 0), 128);
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) equal += a[i] == b[i];
  EXPECT_EQ(equal, 0u);
}

TEST(NoiseStream, OffsetFillsMatchFullRow) {
  const auto s = derive_stream(9, 1, 2);
  const auto row = draws(s, 101, 17);
  for (std::size_t first : {0u, 1u, 2u, 37u, 50u}) {
    for (std::size_t len : {1u, 2u, 5u, 50u}) {
      if (first + len > row.size()) continue;
      std::vector<double> part(len);
      s.fill_normals(17, first, part);
      for (std::size_t k = 0; k < len; ++k) EXPECT_EQ(part[k], row[first + k]);
    }
  }
}

TEST(NoiseStream, StandardNormalMoments) {
  constexpr std::size_t n = 1'000'000;
  const auto z = draws(derive_stream(3, 0, 0), n);
  const auto s = test_support::moments(z);
  EXPECT_NEAR(s.mean, 0.0, 3.0 / std::sqrt(double(n)));
  EXPECT_NEAR(s.variance, 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s.skewness, 0.0, 3.0 * std::sqrt(6.0 / n));
  EXPECT_NEAR(s.excess_kurtosis, 0.0, 3.0 * std::sqrt(24.0 / n));
}

TEST(SampleIncrements, VarianceIsCellArea) {
  const GridSpec g = wide_grid();
  const auto s = derive_stream(77, 0, 0);
  std::vector<double> all;
  for (std::size_t k = 0; k < 100; ++k) {
    const auto row = sample_increments(g, s, k);
    all.insert(all.end(), row.begin(), row.end());
  }
  ASSERT_EQ(all.size(), 1'000'000u);
  const auto m = test_support::moments(all);
  const double area = g.dt * g.dx;
  EXPECT_NEAR(m.variance, area, 3.0 * area * std::sqrt(2.0 / all.size()));
  EXPECT_NEAR(m.mean, 0.0, 3.0 * std::sqrt(area / all.size()));
}

TEST(SampleIncrements, DistinctStepsUncorrelated) {
  const GridSpec g = wide_grid();
  const auto s = derive_stream(77, 0, 0);
  const auto a = sample_increments(g, s, 3);
  const auto b = sample_increments(g, s, 4);
  EXPECT_LT(std::abs(test_support::correlation(a, b)), 3.0 / std::sqrt(double(a.size())));
}

TEST(SampleIncrements, RejectsOutOfRangeStep) {
  const GridSpec g = wide_grid();
  EXPECT_THROW(sample_increments(g, derive_stream(1, 0, 0), g.n_steps()), std::out_of_range);
}

TEST(SampleIncrements, BitReproducible) {
  const GridSpec g = wide_grid();
  EXPECT_EQ(sample_increments(g, derive_stream(8, 4, 0), 12), sample_increments(g, derive_stream(8, 4, 0), 12));
}

TEST(SampleIncrements, BrownianSheetRectangleVariance) {
  // Sum over a 4-cell x 5-step rectangle has variance equal to its area.
  GridSpec g = wide_grid();
  g.x_max = 0.4;
  g.dx = 0.1;
  g.t_end = 5e-3;
  const double area = 4 * g.dx * 5 * g.dt;
  constexpr std::uint32_t trials = 100'000;
  std::vector<double> sums(trials);
  std::vector<double> row(4);
  for (std::uint32_t r = 0; r < trials; ++r) {
    const auto s = derive_stream(123, r, 0);
    double acc = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      fill_increments(g, s, k, 0, row);
      acc += std::accumulate(row.begin(), row.end(), 0.0);
    }
    sums[r] = acc;
  }
  const auto m = test_support::moments(sums);
  EXPECT_NEAR(m.variance, area, 3.0 * area * std::sqrt(2.0 / trials));
}

TEST(BlockPlan, MidpointsForBetaTwo) {
  GridSpec g;
  g.x_min = -4.0;
  g.x_max = 4.0;
  g.dx = 0.1;
  const auto plan = make_block_plan(2.0, 1.0, g);
  ASSERT_EQ(plan.size(), 4u);
  EXPECT_EQ(plan.index, (std::vector<long>{-1, 0, 1, 2}));
  for (std::size_t b = 0; b < plan.size(); ++b) {
    EXPECT_DOUBLE_EQ(plan.midpoints[b], 2.0 * plan.index[b] - 1.0);  // x_j = 2j - 1
  }
}

TEST(BlockPlan, EvenEdgesOddMidpoints) {
  GridSpec g;
  g.x_min = -6.0;
  g.x_max = 6.0;
  g.dx = 0.05;
  const auto plan = make_block_plan(1.0, 4.0, g);
  for (std::size_t b = 0; b < plan.size(); ++b) {
    EXPECT_DOUBLE_EQ(std::fmod(std::abs(plan.edges[b]), 2.0), 0.0);
    EXPECT_DOUBLE_EQ(std::fmod(std::abs(plan.midpoints[b]), 2.0), 1.0);
    EXPECT_DOUBLE_EQ(plan.midpoints[b] - plan.edges[b], plan.edges[b + 1] - plan.midpoints[b]);
  }
}

TEST(BlockPlan, EveryCellInItsBracketingBlock) {
  GridSpec g;
  g.x_min = -5.3;
  g.x_max = 7.1;
  g.dx = 0.1;
  for (double beta : {1.3, 2.0, 4.0, 9.7}) {
    const auto plan = make_block_plan(beta, 2.0, g);
    std::size_t covered = 0;
    for (std::size_t b = 0; b < plan.size(); ++b) covered += plan.cell_count[b];
    EXPECT_EQ(covered, g.n_cells());
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
      const std::size_t b = plan.cell_block[i];
      const double x = g.x(i);
      EXPECT_LE(plan.edges[b], x + 1e-9);
      EXPECT_LT(x, plan.edges[b + 1] - 1e-9);
      EXPECT_GE(i, plan.first_cell[b]);
      EXPECT_LT(i, plan.first_cell[b] + plan.cell_count[b]);
    }
  }
}

TEST(BlockPlan, RejectsUnresolvableBlocks) {
  GridSpec g;
  g.dx = 0.1;
  EXPECT_THROW(make_block_plan(0.1, 1.0, g), std::invalid_argument);
  EXPECT_THROW(make_block_plan(-1.0, 1.0, g), std::invalid_argument);
  EXPECT_THROW(make_block_plan(1.0, 0.0, g), std::invalid_argument);
  EXPECT_NO_THROW(make_block_plan(0.2, 1.0, g));
}
