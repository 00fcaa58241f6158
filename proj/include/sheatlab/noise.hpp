#pragma once

// Discretised space-time white noise. Each grid cell [x_i, x_i + dx) x
// [t_n, t_n + dt) receives an independent N(0, dt dx) Brownian-sheet
// increment. Values are a pure function of (master_seed, replicate_id,
// block_id, step, cell), so rows are generated on demand and never stored.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sheatlab/grid.hpp"
#include "sheatlab/philox.hpp"

namespace sheatlab {

class NoiseStream {
public:
  NoiseStream(std::uint64_t master_seed, std::uint32_t replicate_id, std::uint32_t block_id)
      : master_seed_(master_seed),
        replicate_id_(replicate_id),
        block_id_(block_id),
        philox_(make_key(master_seed)) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint32_t replicate_id() const noexcept { return replicate_id_; }
  std::uint32_t block_id() const noexcept { return block_id_; }

  /// Two independent standard normals for (step, pair); cells 2*pair and
  /// 2*pair + 1 of a row share one Philox block.
  std::array<double, 2> normal_pair(std::uint32_t step, std::uint32_t pair) const noexcept {
    const auto w = philox_({pair, step, block_id_, replicate_id_});
    const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    constexpr double kInv53 = 1.0 / 9007199254740992.0;
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * kInv53;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * kInv53;          // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// Standard normals for cells [first_cell, first_cell + out.size()) of row `step`.
  void fill_normals(std::uint32_t step, std::size_t first_cell, std::span<double> out) const {
    std::size_t cell = first_cell;
    std::size_t k = 0;
    const std::size_t n = out.size();
    if (k < n && (cell & 1u)) {
      out[k++] = normal_pair(step, static_cast<std::uint32_t>(cell / 2))[1];
      ++cell;
    }
    for (; k + 1 < n; k += 2, cell += 2) {
      const auto z = normal_pair(step, static_cast<std::uint32_t>(cell / 2));
      out[k] = z[0];
      out[k + 1] = z[1];
    }
    if (k < n) out[k] = normal_pair(step, static_cast<std::uint32_t>(cell / 2))[0];
  }

  friend bool operator==(const NoiseStream& a, const NoiseStream& b) noexcept {
    return a.master_seed_ == b.master_seed_ && a.replicate_id_ == b.replicate_id_ &&
           a.block_id_ == b.block_id_;
  }

private:
  static Philox4x32::Key make_key(std::uint64_t seed) noexcept {
    const std::uint64_t k = mix64(seed);
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t master_seed_;
  std::uint32_t replicate_id_;
  std::uint32_t block_id_;
  Philox4x32 philox_;
};

/// Streams for distinct (seed, replicate, block) triples never share a
/// Philox input: the seed fixes the key, replicate and block occupy the high
/// counter words.
inline NoiseStream derive_stream(std::uint64_t master_seed, std::uint32_t replicate_id, std::uint32_t block_id) {
  return NoiseStream(master_seed, replicate_id, block_id);
}

/// Writes the N(0, dt dx) increments of cells [first_cell, first_cell + out.size()).
inline void fill_increments(const GridSpec& grid, const NoiseStream& stream, std::size_t step,
                            std::size_t first_cell, std::span<double> out) {
  stream.fill_normals(static_cast<std::uint32_t>(step), first_cell, out);
  const double scale = std::sqrt(grid.dt * grid.dx);
  for (double& v : out) v *= scale;
}

inline std::vector<double> sample_increments(const GridSpec& grid, const NoiseStream& stream, std::size_t step) {
  if (step >= grid.n_steps()) {
    throw std::out_of_range("sample_increments: step " + std::to_string(step) + " outside [0, " +
                            std::to_string(grid.n_steps()) + ")");
  }
  std::vector<double> out(grid.n_cells());
  fill_increments(grid, stream, step, 0, out);
  return out;
}

/// Partition of the grid into half-open blocks [(j-1) w, j w), w = beta sqrt(t).
///
/// Blocks are stored in left-to-right order restricted to the domain;
/// `index` is the label j of each block. Every grid cell belongs
/// to exactly one block, and the cells of a block are contiguous.
struct BlockPlan {
  double beta{};
  double t{};
  double width{};                    ///< beta * sqrt(t)
  std::vector<long> index;           ///< label j per block
  std::vector<double> edges;         ///< left edges, plus the right edge of the last block
  std::vector<double> midpoints;     ///< (j - 1/2) w
  std::vector<std::size_t> first_cell;
  std::vector<std::size_t> cell_count;
  std::vector<std::uint32_t> cell_block;  ///< position in the block lists, per grid cell

  std::size_t size() const noexcept { return index.size(); }

  /// Label j of the block containing x.
  long block_of(double x) const { return label(x, width); }

  /// Grid cell closest to the midpoint of block b.
  std::size_t midpoint_cell(std::size_t b, const GridSpec& grid) const {
    const auto i = static_cast<std::size_t>(std::llround((midpoints[b] - grid.x_min) / grid.dx));
    return i;
  }

  /// Blocks whose midpoint grid cell lies inside the block itself (always
  /// true for interior blocks; partial blocks at the domain edges may miss).
  bool has_interior_midpoint(std::size_t b, const GridSpec& grid) const {
    const double m = midpoints[b];
    if (m < grid.x_min || m >= grid.x_max) return false;
    const std::size_t i = midpoint_cell(b, grid);
    return i < cell_block.size() && cell_block[i] == b;
  }

  /// Positions of blocks that lie entirely inside the domain.
  std::vector<std::size_t> full_blocks(const GridSpec& grid) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < size(); ++b) {
      const double lo = edges[b];
      const double hi = edges[b + 1];
      if (lo >= grid.x_min - 1e-9 * width && hi <= grid.x_max + 1e-9 * width) out.push_back(b);
    }
    return out;
  }

  /// Label j of the block of width w containing x; points within a relative
  /// 1e-9 of an edge are assigned to the block on the right.
  static long label(double x, double w) { return static_cast<long>(std::floor(x / w + 1e-9)) + 1; }
};

inline BlockPlan make_block_plan(double beta, double t, const GridSpec& grid) {
  if (!(beta > 0.0)) throw std::invalid_argument("make_block_plan: beta must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("make_block_plan: t must be > 0");
  const double w = beta * std::sqrt(t);
  if (w < 2.0 * grid.dx) {
    throw std::invalid_argument("make_block_plan: beta*sqrt(t) = " + std::to_string(w) +
                                " is below 2*dx; blocks unresolvable on the grid");
  }
  BlockPlan plan;
  plan.beta = beta;
  plan.t = t;
  plan.width = w;
  const std::size_t n = grid.n_cells();
  plan.cell_block.resize(n);
  long current = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long j = BlockPlan::label(grid.x(i), w);
    if (plan.index.empty() || j != current) {
      current = j;
      plan.index.push_back(j);
      plan.edges.push_back(static_cast<double>(j - 1) * w);
      plan.midpoints.push_back((static_cast<double>(j) - 0.5) * w);
      plan.first_cell.push_back(i);
      plan.cell_count.push_back(0);
    }
    plan.cell_block[i] = static_cast<std::uint32_t>(plan.index.size() - 1);
    ++plan.cell_count.back();
  }
  plan.edges.push_back(static_cast<double>(plan.index.back()) * w);
  return plan;
}

}  // namespace sheatlab
