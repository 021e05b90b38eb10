#pragma once

// First-order primal-dual solver for
//
//   min_x max_y  G(x) + <K x, y> - F*(y)
//
// with optional constant inertia. One iteration reads
//
//   xb = x_k + alpha (x_k - x_{k-1}),   yb = y_k + alpha (y_k - y_{k-1})
//   x_{k+1} = prox_{tau G}(xb - tau K^T yb)
//   y_{k+1} = prox_{sigma F*}(yb + sigma K (x_{k+1} + theta (x_{k+1} - xb)))
//
// alpha = 0, theta = 1 is the classic primal-dual hybrid gradient scheme.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "krtv/grid.hpp"

namespace krtv {

class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class AdjointMismatch : public Error {
 public:
  using Error::Error;
};

struct SolverConfig {
  int max_iters = 20000;
  /// Stop once primal - dual <= gap_tol * (1 + |primal|).
  double gap_tol = 1e-5;
  /// Step sizes; 0 selects 0.99 / ||K||.
  double tau = 0.0;
  double sigma = 0.0;
  /// Constant inertial parameter in [0, 1/3).
  double alpha = 0.2;
  double theta = 1.0;
  int check_every = 10;
  /// Restart scheme: at each checkpoint the ergodic average since the last
  /// restart competes with the current iterate; the iteration restarts from
  /// the one with the smaller gap once that gap has shrunk by restart_decay
  /// relative to the previous restart, or stalled below 0.8 of it. Needs
  /// SaddleProblem::gap.
  bool restart = false;
  double restart_decay = 0.2;

  /// Throws InvalidArgument when the fields are out of range. Step sizes are
  /// checked against `op_norm` (tau sigma ||K||^2 < 1) once resolved.
  void validate() const;
};

using LinearMap = std::function<void(std::span<const double> in, std::span<double> out)>;
/// In-place proximal map with the given step.
using ProxMap = std::function<void(std::span<double> inout, double step)>;

struct GapEstimate {
  double primal = kInfinity;
  double dual = -kInfinity;
};

struct GapRecord {
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  /// gap / (1 + |primal|)
  double relative_gap = 0.0;
};

struct SaddleProblem {
  std::size_t primal_size = 0;
  std::size_t dual_size = 0;
  LinearMap apply;          // K: primal -> dual
  LinearMap apply_adjoint;  // K^T: dual -> primal
  ProxMap prox_primal;      // prox of tau G
  ProxMap prox_dual;        // prox of sigma F*
  /// Upper bound on ||K||, used for default steps and the step condition.
  double op_norm = 0.0;
  /// Returns a primal upper bound and dual lower bound for the iterate pair.
  std::function<GapEstimate(std::span<const double> x, std::span<const double> y)> gap;
};

/// Full solver state. Models expose named views (u, nu, f, phi) of x and y.
struct SaddleState {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> x_prev;
  std::vector<double> y_prev;
  double tau = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  double theta = 1.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  std::vector<GapRecord> gap_history;

  /// Most recent gap record, or a default-constructed one when none exists.
  GapRecord last_gap() const;
};

using CheckpointCallback = std::function<void(const GapRecord&)>;

/// Compares <K x, y> with <x, K^T y> on random probes; throws AdjointMismatch
/// when the relative discrepancy exceeds `tol`.
void verify_adjoint(const SaddleProblem& problem, double tol = 1e-10, int probes = 3,
                    std::uint64_t seed = 12345);

/// Runs the iteration from (x0, y0). Throws SolverDiverged on non-finite
/// iterates and AdjointMismatch when K and K^T disagree.
SaddleState solve(const SaddleProblem& problem, std::vector<double> x0, std::vector<double> y0,
                  const SolverConfig& cfg, const CheckpointCallback& on_checkpoint = {});

}  // namespace krtv
