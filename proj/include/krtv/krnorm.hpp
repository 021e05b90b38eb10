#pragma once

// Kantorovich-Rubinstein norm
//
//   ||mu||_KR = sup { <f, mu> : |f| <= l1, Lip(f) <= l2 }
//
// evaluated exactly for small point measures (transport linear program) and
// approximately on grids (cascading form, primal-dual solver).

#include <vector>

#include "krtv/grid.hpp"
#include "krtv/saddle.hpp"

namespace krtv {

/// Largest measure accepted by kr_norm_exact.
inline constexpr std::size_t kMaxExactPoints = 64;

struct TransportPlan {
  std::size_t n = 0;
  /// gamma(i, j) = gamma[i * n + j] >= 0: mass moved from point i to point j.
  std::vector<double> gamma;
  /// cost(i, j) = |x_i - x_j|
  std::vector<double> cost;
  /// Mass left unexplained at each point, w_i - out_i + in_i; costs l1 per unit.
  std::vector<double> residual;
  std::vector<std::vector<double>> points;

  double at(std::size_t i, std::size_t j) const { return gamma[i * n + j]; }
};

struct KrNormExact {
  double value = 0.0;
  /// l1 sum |residual| + l2 sum gamma cost
  double primal = 0.0;
  /// sum w_i f_i
  double dual = 0.0;
  /// primal - dual
  double certificate = 0.0;
  /// Largest violation of |f_i| <= l1 and f_i - f_j <= l2 |x_i - x_j|.
  double dual_violation = 0.0;
  TransportPlan plan;
  std::vector<double> potentials;
};

/// Solves the transport problem
///   min_{gamma >= 0} l1 sum_i |w_i - out_i + in_i| + l2 sum_ij gamma_ij |x_i - x_j|
/// as an uncapacitated min-cost flow with a ground node, and recovers the
/// optimal potentials f from shortest-path distances. Requires lambda1 finite
/// and at most kMaxExactPoints points; lambda2 = inf forbids transport.
KrNormExact kr_norm_exact(const DiscreteMeasure& mu, const RegParams& lam);

struct KrNormGrid {
  /// Primal (upper bound) value of the cascading problem.
  double value = 0.0;
  double dual = 0.0;
  double relative_gap = kInfinity;
  int iterations = 0;
  bool converged = false;
  VectorField nu;
  GridFunction f;
};

/// Minimizes l1 ||mu - div nu||_1 + l2 || |nu| ||_1 over grid fields nu.
/// lambda1 must be finite.
KrNormGrid kr_norm_grid(const GridFunction& mu, const RegParams& lam,
                        const SolverConfig& cfg = {});

/// Places each point mass on its nearest node as a density w / h^d, so that
/// integrals are preserved. Throws when a point falls outside the grid.
GridFunction embed_measure(const DiscreteMeasure& mu, const Shape& shape);

/// Point measure with one atom of weight u_k h^d per nonzero node (values with
/// |u_k| <= drop_below are skipped). Inverse of embed_measure on nodes.
DiscreteMeasure grid_to_measure(const GridFunction& u, double drop_below = 0.0);

}  // namespace krtv
