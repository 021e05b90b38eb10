#pragma once

// Forward-difference gradient with Neumann boundary and its exact negative
// adjoint. Under the plain-sum inner product
//   <grad u, v> = -<u, div v>
// holds up to round-off for every u, v.

#include <cstdint>
#include <functional>
#include <span>

#include "krtv/grid.hpp"

namespace krtv {

// Span kernels. `field` holds dim*N values, component-major.
void grad(const Shape& shape, std::span<const double> u, std::span<double> field);
void div(const Shape& shape, std::span<const double> field, std::span<double> out);

VectorField grad(const GridFunction& u);
GridFunction div(const VectorField& v);

/// Standard bound on ||grad||^2: 4 d / h^2.
double gradient_norm_squared_bound(const Shape& shape);

/// Upper bound on the norm of the cascading operator
///   K(u, nu) = (u - div nu, grad u).
/// K is symmetric with blocks [[I, G^T], [G, 0]], so its norm is
/// (1 + sqrt(1 + 4 L^2)) / 2 with L = ||grad||; using the 4d/h^2 bound
/// for L^2 keeps this an upper bound.
double op_norm_bound(const Shape& shape);

/// The quick estimate sqrt(L^2 + 2). It underestimates ||K|| (see tests).
double op_norm_quick_estimate(const Shape& shape);

/// sqrt of the largest eigenvalue of A^T A by power iteration, where
/// `normal` computes x -> A^T A x in place of its output.
double power_iteration_norm(
    std::size_t n, const std::function<void(std::span<const double>, std::span<double>)>& normal,
    int iterations, std::uint64_t seed = 7);

/// Power-iteration estimate of ||K|| for the cascading operator on `shape`.
double estimate_cascade_norm(const Shape& shape, int iterations = 500);

}  // namespace krtv
