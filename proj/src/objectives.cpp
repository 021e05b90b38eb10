#include "krtv/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "krtv/diffops.hpp"
#include "krtv/prox.hpp"

namespace krtv {
namespace {

double plain_tv(const Shape& shape, std::span<const double> u, std::vector<double>& scratch) {
  scratch.resize(shape.size() * static_cast<std::size_t>(shape.dim()));
  grad(shape, u, scratch);
  const std::size_t n = shape.size();
  double s = 0.0;
  if (shape.dim() == 1) {
    for (std::size_t k = 0; k < n; ++k) s += std::abs(scratch[k]);
  } else {
    for (std::size_t k = 0; k < n; ++k) s += std::sqrt(scratch[k] * scratch[k] + scratch[n + k] * scratch[n + k]);
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

DualEvaluation infeasible(std::string reason, Feasibility status = Feasibility::infeasible) {
  DualEvaluation out;
  out.status = status;
  out.reason = std::move(reason);
  return out;
}

// Box and Lipschitz parts of dual feasibility; empty string when satisfied.
std::string check_pointwise_constraints(const GridFunction& f, const RegParams& lam) {
  const double tol1 = kFeasibilityTol * std::max(1.0, lam.lambda1_finite() ? lam.lambda1 : 1.0);
  if (lam.lambda1_finite() && f.max_abs() > lam.lambda1 + tol1) {
    return "|f| exceeds lambda1";
  }
  if (lam.lambda2_finite()) {
    const double tol2 = kFeasibilityTol * std::max(1.0, lam.lambda2);
    if (grad(f).max_magnitude() > lam.lambda2 + tol2) return "|grad f| exceeds lambda2";
  }
  return {};
}

}  // namespace

double tv_value(const GridFunction& u) {
  std::vector<double> scratch;
  return plain_tv(u.shape(), u.values(), scratch) * u.shape().cell_volume();
}

double kr_tv_primal_objective(const GridFunction& u, const VectorField& nu,
                              const GridFunction& u0, const RegParams& lam) {
  require_same_shape(u.shape(), u0.shape(), "kr_tv_primal_objective");
  require_same_shape(u.shape(), nu.shape(), "kr_tv_primal_objective");
  lam.validate();
  const double vol = u.shape().cell_volume();
  const GridFunction dnu = div(nu);
  double residual_l1 = 0.0;
  double residual_max = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = u[k] - u0[k] - dnu[k];
    residual_l1 += std::abs(r);
    residual_max = std::max(residual_max, std::abs(r));
  }
  double value = tv_value(u);
  if (lam.lambda1_finite()) {
    value += lam.lambda1 * residual_l1 * vol;
  } else if (residual_max > kFeasibilityTol * std::max(1.0, u0.max_abs())) {
    return kInfinity;
  }
  const double nu_l1 = nu.l1_norm();
  if (lam.lambda2_finite()) {
    value += lam.lambda2 * nu_l1;
  } else if (nu_l1 > 0.0) {
    return kInfinity;
  }
  return value;
}

RangeCheck check_divergence_range(const GridFunction& f, double radius, int max_iters) {
  const Shape& shape = f.shape();
  const std::size_t n = shape.size();
  const std::size_t m = n * static_cast<std::size_t>(shape.dim());
  const double tol = kFeasibilityTol * std::max(1.0, f.max_abs());
  RangeCheck out;

  std::vector<double> scratch;
  auto certifies = [&](std::span<const double> u) {
    const double pairing = dot(f.values(), u);
    const double tv = radius * plain_tv(shape, u, scratch);
    return pairing - tv > 1e-9 * (std::abs(pairing) + tv) && pairing - tv > 0.0;
  };

  // Nonzero mean: a constant is a certificate.
  const double total = f.sum();
  if (std::abs(total) > tol * static_cast<double>(n)) {
    out.status = Feasibility::infeasible;
    out.residual = std::abs(total) / static_cast<double>(n);
    return out;
  }

  // FISTA on min_{|phi| <= radius} 0.5 ||div phi - f||^2.
  const double step = 1.0 / gradient_norm_squared_bound(shape);
  std::vector<double> phi(m, 0.0), phi_prev(m, 0.0), z(m, 0.0), gradient(m), w(n);
  double t = 1.0;
  for (int it = 1; it <= max_iters; ++it) {
    div(shape, z, w);
    for (std::size_t k = 0; k < n; ++k) w[k] -= f[k];
    grad(shape, w, gradient);
    phi_prev.swap(phi);
    for (std::size_t k = 0; k < m; ++k) phi[k] = z[k] + step * gradient[k];
    project_ball_field(shape, phi, radius);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t k = 0; k < m; ++k) z[k] = phi[k] + beta * (phi[k] - phi_prev[k]);
    t = t_next;

    if (it % 25 == 0 || it == max_iters) {
      div(shape, phi, w);
      double res = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        w[k] -= f[k];
        res = std::max(res, std::abs(w[k]));
      }
      out.iterations = it;
      out.residual = res;
      if (res <= tol) {
        out.status = Feasibility::feasible;
        out.phi = VectorField(shape, phi);
        return out;
      }
      for (double& v : w) v = -v;
      if (certifies(w)) {
        out.status = Feasibility::infeasible;
        return out;
      }
    }
  }
  return out;
}

DualEvaluation kr_tv_dual_objective(const GridFunction& f, const GridFunction& u0,
                                    const RegParams& lam) {
  require_same_shape(f.shape(), u0.shape(), "kr_tv_dual_objective");
  lam.validate();
  if (auto why = check_pointwise_constraints(f, lam); !why.empty()) return infeasible(why);
  const RangeCheck range = check_divergence_range(f);
  if (range.status == Feasibility::infeasible) {
    return infeasible("f is not the divergence of a unit-bounded field");
  }
  if (range.status == Feasibility::undetermined) {
    return infeasible("range condition could not be decided", Feasibility::undetermined);
  }
  DualEvaluation out;
  out.status = Feasibility::feasible;
  out.value = -dot(f.values(), u0.values()) * f.shape().cell_volume();
  return out;
}

DualEvaluation kr_tv_dual_objective(const GridFunction& f, const VectorField& phi,
                                    const GridFunction& u0, const RegParams& lam) {
  require_same_shape(f.shape(), u0.shape(), "kr_tv_dual_objective");
  require_same_shape(f.shape(), phi.shape(), "kr_tv_dual_objective");
  lam.validate();
  if (auto why = check_pointwise_constraints(f, lam); !why.empty()) return infeasible(why);
  if (phi.max_magnitude() > 1.0 + kFeasibilityTol) return infeasible("|phi| exceeds 1");
  const GridFunction dphi = div(phi);
  const double tol = kFeasibilityTol * std::max(1.0, f.max_abs());
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(dphi[k] - f[k]) > tol) return infeasible("f differs from div phi");
  }
  DualEvaluation out;
  out.status = Feasibility::feasible;
  out.value = -dot(f.values(), u0.values()) * f.shape().cell_volume();
  return out;
}

}  // namespace krtv
