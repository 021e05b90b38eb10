#pragma once

// Synthetic test data and shape statistics of piecewise-constant solutions.

#include <cstdint>

#include "krtv/grid.hpp"
#include "krtv/io.hpp"

namespace krtv {

/// n samples of [-1, 1]: x_i = -1 + i h with h = 2 / (n - 1).
Shape interval_shape(std::size_t n = 256);
double interval_x(const Shape& s, std::size_t i);

/// Indicator of |x| <= half_width scaled by height.
Signal plateau_signal(std::size_t n = 256, double half_width = 0.2, double height = 1.0);
/// (x + 1) / 2, rising from 0 to 1.
Signal ramp_signal(std::size_t n = 256);
/// max(0, 1 - |x| / half_width).
Signal hat_signal(std::size_t n = 256, double half_width = 0.5);

/// 1 inside the centered disk of the given radius (in pixels), 0 outside.
GridFunction disk_indicator(std::size_t size, double radius);

/// Horizontal gradient from 0.2 to 0.5 with a disk of value 0.9 and a small
/// square of value 0.05; values lie in [0.05, 0.9].
GridFunction disk_on_gradient(std::size_t size);

/// Replaces a `density` fraction of pixels by 0 or 1 with equal probability.
GridFunction salt_and_pepper(const GridFunction& u, double density, std::uint64_t seed);

struct Composite {
  GridFunction cartoon;
  GridFunction texture;
  /// cartoon + texture
  GridFunction image;
};

/// Piecewise-smooth cartoon (horizontal gradient 0.15..0.45 carrying a
/// rectangle, a disk and two small squares of side 0.08 * size) plus an
/// oblique sinusoidal stripe texture covering the lower half.
Composite cartoon_sinusoid(std::size_t size, double amplitude = 0.15, double period = 4.0);

// The shape statistics below compare value differences against
// rel * scale, where scale <= 0 selects max(u) - min(u). Passing the range
// of the input data keeps solver noise on a flat output from counting.

/// Number of clusters of sorted values separated by gaps larger than the
/// threshold. A constant function has one level.
int count_levels(const GridFunction& u, double rel_gap = 0.05, double scale = 0.0);

/// Distinct levels among plateaus, where a plateau is a maximal run of at
/// least min_run consecutive 1D samples whose neighbour differences stay below
/// the threshold. Samples inside a jump layer belong to no plateau.
int count_plateaus(const GridFunction& u, double rel_gap = 0.05, double scale = 0.0,
                   std::size_t min_run = 3);

/// Largest spread (max - min) inside one cluster, relative to the scale;
/// 0 for constant u.
double max_level_spread(const GridFunction& u, double rel_gap = 0.05, double scale = 0.0);

/// Exactly two levels, each flat to within rel_gap of the scale.
bool is_pure_jump(const GridFunction& u, double rel_gap = 0.05, double scale = 0.0);

/// Number of maximal runs of consecutive 1D differences above the threshold.
int count_jumps(const GridFunction& u, double rel = 0.05, double scale = 0.0);

/// h times the number of nodes where u exceeds baseline + threshold.
double support_length(const GridFunction& u, double baseline, double threshold);

/// Pearson correlation of the values; 0 when either side is constant.
double correlation(const GridFunction& a, const GridFunction& b);

}  // namespace krtv
