#pragma once

// Concrete variational models built on the primal-dual solver:
//
//   KR-TV   min_u ||u - u0||_KR,(l1,l2) + TV(u)
//   L1-TV   min_u l1 ||u - u0||_1 + TV(u)
//   G-TV    min_{u,g} lambda || |g| ||_inf + TV(u)   s.t. div g = u - u0
//
// plus cartoon/texture splitting and total-variation parameter matching.

#include <string>
#include <vector>

#include "krtv/grid.hpp"
#include "krtv/saddle.hpp"

namespace krtv {

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double primal = 0.0;
  double dual = 0.0;
  /// (primal - dual) / (1 + |primal|)
  double relative_gap = kInfinity;
  /// sum of u0 and u times h^d
  double mass_in = 0.0;
  double mass_out = 0.0;
  /// mean(u) - mean(u0)
  double mean_difference = 0.0;
  std::vector<GapRecord> history;
};

struct KrTvResult {
  GridFunction u;
  /// Cascading field: u - u0 - div nu is the unexplained residual.
  VectorField nu;
  GridFunction f;
  VectorField phi;
  SolveReport report;
};

/// Solves KR-TV with the cascading saddle formulation
///   min_{u,nu} max_{f,phi} <f, u - u0 - div nu> + l2 || |nu| ||_1 + <grad u, phi>
/// subject to |f| <= l1, |phi| <= 1. Either lambda may be infinite, not both.
KrTvResult krtv_denoise(const GridFunction& u0, const RegParams& lam,
                        const SolverConfig& cfg = {});

enum class L1TvRoute {
  /// Two-block saddle problem with K u = (u, grad u).
  direct,
  /// krtv_denoise with lambda2 = infinity.
  krtv_reduction,
};

struct L1TvResult {
  GridFunction u;
  SolveReport report;
};

/// L1-TV: minimizer of ||u - u0||_1 + TV(u) / lambda1. Objectives are reported
/// in the scaled form lambda1 ||u - u0||_1 + TV(u).
L1TvResult l1tv_denoise(const GridFunction& u0, double lambda1, const SolverConfig& cfg = {},
                        L1TvRoute route = L1TvRoute::direct);

struct GtvResult {
  /// u0 + div g, which satisfies the constraint exactly.
  GridFunction u;
  VectorField g;
  /// || div g - (u_k - u0) ||_1 of the final iterate u_k.
  double constraint_residual = 0.0;
  SolveReport report;
};

GtvResult gtv_decompose(const GridFunction& u0, double lambda, const SolverConfig& cfg = {});

enum class ModelKind { krtv, l1tv, gtv };

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind kind);

struct ModelParams {
  ModelKind kind = ModelKind::krtv;
  /// KR-TV uses both entries, L1-TV uses lambda1 only.
  RegParams lam{1.0, 1.0};
  /// G-TV weight.
  double g_lambda = 1.0;

  /// The scalar that match_tv_parameter tunes: lambda1 for L1-TV, g_lambda
  /// for G-TV and lambda2 for KR-TV.
  double tuned() const;
  ModelParams with_tuned(double value) const;
};

struct Decomposition {
  GridFunction cartoon;
  /// u0 - cartoon
  GridFunction texture;
  double cartoon_tv = 0.0;
  double texture_l1 = 0.0;
  SolveReport report;
};

Decomposition cartoon_texture(const GridFunction& u0, const ModelParams& params,
                              const SolverConfig& cfg = {});

struct TvSample {
  double parameter = 0.0;
  double tv = 0.0;
};

class BracketError : public Error {
 public:
  BracketError(const std::string& what, std::vector<TvSample> samples)
      : Error(what), samples_(std::move(samples)) {}
  const std::vector<TvSample>& samples() const { return samples_; }

 private:
  std::vector<TvSample> samples_;
};

struct TvMatch {
  ModelParams params;
  double tv = 0.0;
  std::vector<TvSample> trace;
};

/// Geometric bisection on the tuned parameter within [lo, hi] until the
/// cartoon total variation is within `rel_tol` of `target_tv`. Throws
/// BracketError with the sampled curve when the interval does not straddle
/// the target.
TvMatch match_tv_parameter(const GridFunction& u0, const ModelParams& base, double target_tv,
                           double lo, double hi, const SolverConfig& cfg = {},
                           double rel_tol = 0.01, int max_steps = 60);

/// Large finite stand-in for an inactive constraint: 1e6 * (data range),
/// or 1e6 for constant data.
double effectively_infinite(const GridFunction& u0);

}  // namespace krtv
