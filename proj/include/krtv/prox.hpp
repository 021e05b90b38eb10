#pragma once

// Closed-form projections and proximal maps. Each map has an in-place span
// kernel used by the solvers and a value-returning wrapper on grid types.
// A bound or radius of kInfinity drops the constraint (identity map).

#include <span>

#include "krtv/grid.hpp"

namespace krtv {

/// Pointwise clamp to [-bound, bound].
void project_box(std::span<double> f, double bound);
GridFunction project_box(GridFunction f, double bound);

/// Per-node Euclidean projection onto the ball of the given radius:
/// w -> w * min(1, radius / |w|).
void project_ball_field(const Shape& shape, std::span<double> field, double radius);
VectorField project_ball_field(VectorField v, double radius);

/// Per-node vectorial soft-thresholding: w -> w * max(0, 1 - threshold / |w|).
/// A threshold of kInfinity maps everything to zero.
void shrink_field(const Shape& shape, std::span<double> field, double threshold);
VectorField shrink_field(VectorField v, double threshold);

/// Prox of the linear term <f, u0>: f -> f - step * u0.
void prox_linear(std::span<double> f, std::span<const double> u0, double step);
GridFunction prox_linear(GridFunction f, const GridFunction& u0, double step);

/// Euclidean projection of the node magnitudes of `field` onto
/// { sum_k |w_k| <= radius } (the unit ball of the dual of the max-magnitude
/// norm, scaled by radius). Sort-based simplex projection.
void project_l1_ball_field(const Shape& shape, std::span<double> field, double radius);

/// Prox of t * max_k |w_k| via the Moreau decomposition
///   prox(v) = v - t * P_{l1 ball}(v / t).
void prox_max_magnitude(const Shape& shape, std::span<double> field, double t);

}  // namespace krtv
