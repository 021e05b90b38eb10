#pragma once

// Objective and gap evaluators for the KR-TV problem
//
//   min_u ||u - u0||_KR + TV(u)
//       = min_{u, nu} l1 ||u - u0 - div nu||_1 + l2 || |nu| ||_1 + TV(u)   (cascading)
//       = min_u max_{|f| <= l1, |grad f| <= l2} <f, u - u0> + TV(u)
//
// All integrals are plain sums times h^d.

#include <optional>
#include <string>

#include "krtv/grid.hpp"

namespace krtv {

/// Isotropic discrete total variation: sum_k |grad u (k)| * h^d.
double tv_value(const GridFunction& u);

/// Tolerance on constraint violation used by the feasibility checks below.
inline constexpr double kFeasibilityTol = 1e-8;

/// Cascading objective l1 ||u - u0 - div nu||_1 + l2 || |nu| ||_1 + TV(u).
/// With lambda1 = inf the first term becomes the hard constraint
/// u - u0 - div nu = 0 and the result is +inf when it is violated by more than
/// kFeasibilityTol * max(1, ||u0||_inf). With lambda2 = inf, nu must vanish.
double kr_tv_primal_objective(const GridFunction& u, const VectorField& nu,
                              const GridFunction& u0, const RegParams& lam);

enum class Feasibility { feasible, infeasible, undetermined };

struct DualEvaluation {
  Feasibility status = Feasibility::undetermined;
  /// -<f, u0> h^d when feasible, -inf otherwise.
  double value = -kInfinity;
  std::string reason;

  bool feasible() const { return status == Feasibility::feasible; }
};

/// Dual value -<f, u0> of the saddle formulation. f is feasible when
/// |f| <= lambda1, |grad f| <= lambda2 and f = div phi for some |phi| <= 1
/// (the exchange of min over u stays finite). The last condition is decided
/// by a projected-gradient subproblem that either finds phi or produces a
/// certificate u with <f, u> > TV(u).
DualEvaluation kr_tv_dual_objective(const GridFunction& f, const GridFunction& u0,
                                    const RegParams& lam);

/// Same, with an explicit witness phi for the range condition f = div phi.
DualEvaluation kr_tv_dual_objective(const GridFunction& f, const VectorField& phi,
                                    const GridFunction& u0, const RegParams& lam);

struct RangeCheck {
  Feasibility status = Feasibility::undetermined;
  /// Witness field with |phi| <= 1 when feasible.
  std::optional<VectorField> phi;
  /// max |div phi - f| at termination.
  double residual = kInfinity;
  int iterations = 0;
};

/// Decides whether f = div phi for some field with |phi| <= radius pointwise.
RangeCheck check_divergence_range(const GridFunction& f, double radius = 1.0,
                                  int max_iters = 200000);

}  // namespace krtv
