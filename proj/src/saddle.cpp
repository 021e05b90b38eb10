#include "krtv/saddle.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace krtv {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters <= 0) throw InvalidArgument("max_iters must be positive");
  if (!(gap_tol >= 0.0)) throw InvalidArgument("gap_tol must be nonnegative");
  if (!(tau >= 0.0) || !(sigma >= 0.0)) throw InvalidArgument("step sizes must be nonnegative");
  if (!(alpha >= 0.0 && alpha < 1.0 / 3.0)) {
    throw InvalidArgument("alpha must lie in [0, 1/3)");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (check_every <= 0) throw InvalidArgument("check_every must be positive");
  if (!(restart_decay > 0.0 && restart_decay < 1.0)) {
    throw InvalidArgument("restart_decay must lie in (0, 1)");
  }
}

GapRecord SaddleState::last_gap() const {
  return gap_history.empty() ? GapRecord{} : gap_history.back();
}

void verify_adjoint(const SaddleProblem& problem, double tol, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(problem.primal_size), y(problem.dual_size);
  std::vector<double> kx(problem.dual_size), kty(problem.primal_size);
  for (int p = 0; p < probes; ++p) {
    for (double& v : x) v = gauss(rng);
    for (double& v : y) v = gauss(rng);
    problem.apply(x, kx);
    problem.apply_adjoint(y, kty);
    const double lhs = dot(kx, y);
    const double rhs = dot(x, kty);
    const double scale = std::max(norm(kx) * norm(y), norm(x) * norm(kty));
    if (std::abs(lhs - rhs) > tol * std::max(scale, 1e-300)) {
      std::ostringstream os;
      os << "operator pair is not adjoint: <Kx,y>=" << lhs << " <x,K^T y>=" << rhs;
      throw AdjointMismatch(os.str());
    }
  }
}

SaddleState solve(const SaddleProblem& problem, std::vector<double> x0, std::vector<double> y0,
                  const SolverConfig& cfg, const CheckpointCallback& on_checkpoint) {
  cfg.validate();
  if (x0.size() != problem.primal_size || y0.size() != problem.dual_size) {
    throw ShapeMismatch("initial iterates do not match the problem size");
  }
  verify_adjoint(problem);

  SaddleState st;
  st.alpha = cfg.alpha;
  st.theta = cfg.theta;
  const double knorm = problem.op_norm;
  st.tau = cfg.tau > 0.0 ? cfg.tau : (knorm > 0.0 ? 0.99 / knorm : 0.0);
  st.sigma = cfg.sigma > 0.0 ? cfg.sigma : (knorm > 0.0 ? 0.99 / knorm : 0.0);
  if (!(st.tau > 0.0) || !(st.sigma > 0.0)) {
    throw InvalidArgument("step sizes must be given explicitly when ||K|| is zero");
  }
  if (st.tau * st.sigma * knorm * knorm >= 1.0) {
    throw InvalidArgument("step sizes violate tau * sigma * ||K||^2 < 1");
  }

  st.x = std::move(x0);
  st.y = std::move(y0);
  st.x_prev = st.x;
  st.y_prev = st.y;

  const std::size_t nx = problem.primal_size;
  const std::size_t ny = problem.dual_size;
  std::vector<double> xb(nx), yb(ny), kty(nx), xe(nx), kx(ny);

  const bool restarting = cfg.restart && static_cast<bool>(problem.gap);
  std::vector<double> x_avg, y_avg;
  if (restarting) {
    x_avg = st.x;
    y_avg = st.y;
  }
  int averaged = 0;
  int last_restart_iter = 0;
  double restart_gap = kInfinity;
  double previous_candidate_gap = kInfinity;

  auto make_record = [&](int it, const GapEstimate& g) {
    GapRecord rec;
    rec.iter = it;
    rec.primal = g.primal;
    rec.dual = g.dual;
    rec.gap = g.primal - g.dual;
    rec.relative_gap = rec.gap / (1.0 + std::abs(g.primal));
    return rec;
  };

  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t k = 0; k < nx; ++k) xb[k] = st.x[k] + st.alpha * (st.x[k] - st.x_prev[k]);
    for (std::size_t k = 0; k < ny; ++k) yb[k] = st.y[k] + st.alpha * (st.y[k] - st.y_prev[k]);
    st.x_prev.swap(st.x);
    st.y_prev.swap(st.y);

    problem.apply_adjoint(yb, kty);
    for (std::size_t k = 0; k < nx; ++k) st.x[k] = xb[k] - st.tau * kty[k];
    problem.prox_primal(st.x, st.tau);

    for (std::size_t k = 0; k < nx; ++k) xe[k] = st.x[k] + st.theta * (st.x[k] - xb[k]);
    problem.apply(xe, kx);
    for (std::size_t k = 0; k < ny; ++k) st.y[k] = yb[k] + st.sigma * kx[k];
    problem.prox_dual(st.y, st.sigma);

    st.iterations = it;
    if (restarting) {
      ++averaged;
      const double w = 1.0 / averaged;
      for (std::size_t k = 0; k < nx; ++k) x_avg[k] += w * (st.x[k] - x_avg[k]);
      for (std::size_t k = 0; k < ny; ++k) y_avg[k] += w * (st.y[k] - y_avg[k]);
    }
    const bool checkpoint = it % cfg.check_every == 0 || it == cfg.max_iters;
    if (!checkpoint) continue;

    if (!all_finite(st.x) || !all_finite(st.y)) {
      throw SolverDiverged("non-finite iterate at iteration " + std::to_string(it));
    }
    if (!problem.gap) continue;
    GapRecord rec = make_record(it, problem.gap(st.x, st.y));
    bool use_average = false;
    if (restarting) {
      const GapRecord avg = make_record(it, problem.gap(x_avg, y_avg));
      if (avg.relative_gap < rec.relative_gap) {
        rec = avg;
        use_average = true;
      }
    }
    st.gap_history.push_back(rec);
    if (on_checkpoint) on_checkpoint(rec);
    const bool done = std::isfinite(rec.gap) && rec.gap <= cfg.gap_tol * (1.0 + std::abs(rec.primal));

    if (restarting) {
      const double g = rec.relative_gap;
      if (!std::isfinite(restart_gap)) restart_gap = g;
      const bool sufficient = g <= cfg.restart_decay * restart_gap;
      const bool stalled = g <= 0.8 * restart_gap && g > previous_candidate_gap;
      const bool long_run = it - last_restart_iter >= 0.36 * it;
      previous_candidate_gap = g;
      if (done || sufficient || stalled || long_run) {
        if (use_average) {
          st.x = x_avg;
          st.y = y_avg;
        }
        st.x_prev = st.x;
        st.y_prev = st.y;
        x_avg = st.x;
        y_avg = st.y;
        averaged = 0;
        last_restart_iter = it;
        restart_gap = g;
        previous_candidate_gap = kInfinity;
        if (!done) ++st.restarts;
      }
    }
    if (done) {
      st.converged = true;
      break;
    }
  }
  return st;
}

}  // namespace krtv
