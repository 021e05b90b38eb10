#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "krtv/models.hpp"
#include "krtv/objectives.hpp"
#include "krtv/saddle.hpp"
#include "support.hpp"

using namespace krtv;
using testing::Rng;

namespace {

// 1D L1-TV as a saddle problem assembled here, independent of the models:
//   min_u max_{|p| <= l, |q| <= 1} <u - u0, p> + <D u, q>,  D forward differences.
SaddleProblem test_l1tv_problem(const std::vector<double>& u0, double lambda) {
  const std::size_t n = u0.size();
  SaddleProblem p;
  p.primal_size = n;
  p.dual_size = 2 * n - 1;
  p.apply = [n](std::span<const double> u, std::span<double> out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = u[k];
    for (std::size_t k = 0; k + 1 < n; ++k) out[n + k] = u[k + 1] - u[k];
  };
  p.apply_adjoint = [n](std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = y[k];
    for (std::size_t k = 0; k + 1 < n; ++k) {
      out[k + 1] += y[n + k];
      out[k] -= y[n + k];
    }
  };
  p.prox_primal = [](std::span<double>, double) {};
  p.prox_dual = [n, u0, lambda](std::span<double> y, double step) {
    for (std::size_t k = 0; k < n; ++k) y[k] = std::clamp(y[k] - step * u0[k], -lambda, lambda);
    for (std::size_t k = n; k < y.size(); ++k) y[k] = std::clamp(y[k], -1.0, 1.0);
  };
  p.op_norm = std::sqrt(1.0 + 4.0);
  return p;
}

double l1tv_objective(const std::vector<double>& u, const std::vector<double>& u0, double lambda) {
  double v = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) v += lambda * std::abs(u[k] - u0[k]);
  for (std::size_t k = 0; k + 1 < u.size(); ++k) v += std::abs(u[k + 1] - u[k]);
  return v;
}

// Some 1D L1-TV minimizer takes only data values, so enumerating all
// assignments from the data set finds the optimum.
double brute_force_l1tv(const std::vector<double>& u0, double lambda) {
  const std::size_t n = u0.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> u(n);
  double best = kInfinity;
  while (true) {
    for (std::size_t k = 0; k < n; ++k) u[k] = u0[idx[k]];
    best = std::min(best, l1tv_objective(u, u0, lambda));
    std::size_t d = 0;
    while (d < n && ++idx[d] == n) idx[d++] = 0;
    if (d == n) break;
  }
  return best;
}

}  // namespace

TEST_CASE("zero operator reduces to one primal prox step") {
  const std::vector<double> a{1.0, -2.0, 3.5};
  SaddleProblem p;
  p.primal_size = 3;
  p.dual_size = 2;
  p.apply = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  p.apply_adjoint = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  // prox of tau/2 ||x - a||^2
  p.prox_primal = [&a](std::span<double> x, double tau) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] + tau * a[k]) / (1.0 + tau);
  };
  p.prox_dual = [](std::span<double> y, double) { std::fill(y.begin(), y.end(), 0.0); };
  p.op_norm = 0.0;
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.alpha = 0.0;
  // With tau -> infinity the prox returns a; a large finite tau is within round-off.
  cfg.tau = 1e18;
  cfg.sigma = 1.0;
  const SaddleState st = solve(p, {0.0, 0.0, 0.0}, {0.0, 0.0}, cfg);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(st.x[k] == doctest::Approx(a[k]).epsilon(1e-15));
  CHECK(st.iterations == 1);

  cfg.tau = 0.0;
  CHECK_THROWS_AS(solve(p, {0.0, 0.0, 0.0}, {0.0, 0.0}, cfg), InvalidArgument);
}

TEST_CASE("configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto edit) {
    SolverConfig c;
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_iters = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.alpha = 1.0 / 3.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.alpha = -0.1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.check_every = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.gap_tol = NAN; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.tau = -1.0; }).validate(), InvalidArgument);

  const SaddleProblem p = test_l1tv_problem({0, 1, 0}, 1.0);
  SolverConfig steps;
  steps.tau = 1.0;
  steps.sigma = 1.0;
  CHECK_THROWS_AS(solve(p, std::vector<double>(3), std::vector<double>(5), steps), InvalidArgument);
  CHECK_THROWS_AS(solve(p, std::vector<double>(4), std::vector<double>(5), SolverConfig{}), ShapeMismatch);
}

TEST_CASE("non-adjoint operator pairs are rejected at startup") {
  SaddleProblem p = test_l1tv_problem({0, 1, 2, 1}, 1.0);
  CHECK_NOTHROW(verify_adjoint(p));
  p.apply_adjoint = [](std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = y[k];
  };
  CHECK_THROWS_AS(verify_adjoint(p), AdjointMismatch);
  CHECK_THROWS_AS(solve(p, std::vector<double>(4), std::vector<double>(7), SolverConfig{}), AdjointMismatch);
}

TEST_CASE("divergent iterates abort with a diagnostic") {
  // K = 10 I with a claimed norm of 1: the default steps are ten times too long.
  SaddleProblem p;
  p.primal_size = p.dual_size = 4;
  p.apply = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = 10.0 * x[k];
  };
  p.apply_adjoint = p.apply;
  p.prox_primal = [](std::span<double>, double) {};
  p.prox_dual = [](std::span<double>, double) {};
  p.op_norm = 1.0;
  SolverConfig cfg;
  cfg.max_iters = 100000;
  CHECK_THROWS_AS(solve(p, {1, 1, 1, 1}, {0, 0, 0, 0}, cfg), SolverDiverged);
}

TEST_CASE("five-node L1-TV matches exhaustive search") {
  Rng rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> u0(5);
    for (double& v : u0) v = std::round(rng.uniform(-2.0, 2.0) * 100.0) / 100.0;
    const double lambda = rng.uniform(0.2, 1.5);
    const double best = brute_force_l1tv(u0, lambda);

    const SaddleProblem p = test_l1tv_problem(u0, lambda);
    SolverConfig cfg;
    cfg.max_iters = 40000;
    const SaddleState st = solve(p, u0, std::vector<double>(9, 0.0), cfg);
    CAPTURE(trial);
    CHECK(l1tv_objective(st.x, u0, lambda) <= best + 1e-4 * (1.0 + best));
    CHECK(l1tv_objective(st.x, u0, lambda) >= best - 1e-12);

    // The library model agrees; it reports lambda ||u - u0||_1 + TV(u).
    const L1TvResult lib = l1tv_denoise(GridFunction(Shape::line(5), u0), lambda, cfg);
    CHECK(l1tv_objective(lib.u.vector(), u0, lambda) <= best + 1e-4 * (1.0 + best));
  }
}

TEST_CASE("KR-TV on a random 8x8 image closes the gap") {
  Rng rng(42);
  const GridFunction u0 = testing::random_function(rng, Shape::plane(8, 8), 0.0, 1.0);
  const RegParams lam{1.0, 0.5};
  SolverConfig cfg;
  cfg.gap_tol = 1e-5;
  cfg.max_iters = 100000;
  const KrTvResult r = krtv_denoise(u0, lam, cfg);
  REQUIRE(r.report.converged);
  CHECK(r.report.relative_gap <= 1e-4);

  // The primal value re-evaluated on the returned pair.
  const double primal = kr_tv_primal_objective(r.u, r.nu, u0, lam);
  CHECK(primal == doctest::Approx(r.report.primal).epsilon(1e-8));
  CHECK((primal - r.report.dual) / (1.0 + std::abs(primal)) <= 1e-4);

  // Random feasible perturbations never beat the attained dual bound.
  for (int probe = 0; probe < 50; ++probe) {
    GridFunction u = r.u;
    VectorField nu = r.nu;
    for (double& v : u.values()) v += rng.uniform(-0.05, 0.05);
    for (double& v : nu.data()) v += rng.uniform(-0.05, 0.05);
    CHECK(kr_tv_primal_objective(u, nu, u0, lam) >= r.report.dual);
  }
}

TEST_CASE("dual iterates stay feasible after every iteration") {
  Rng rng(43);
  const GridFunction u0 = testing::random_function(rng, Shape::plane(6, 7, 0.5), 0.0, 2.0);
  const RegParams lam{0.7, 1.3};
  for (int iters = 1; iters <= 40; ++iters) {
    SolverConfig cfg;
    cfg.max_iters = iters;
    cfg.check_every = 1;
    const KrTvResult r = krtv_denoise(u0, lam, cfg);
    CHECK(r.f.max_abs() <= lam.lambda1 * (1.0 + 1e-12));
    CHECK(r.phi.max_magnitude() <= 1.0 + 1e-12);
  }
}

TEST_CASE("gap history is recorded at the cadence and the best gap never grows") {
  Rng rng(44);
  const GridFunction u0 = testing::random_function(rng, Shape::plane(8, 8), 0.0, 1.0);
  SolverConfig cfg;
  cfg.check_every = 7;
  cfg.max_iters = 3000;
  cfg.gap_tol = 1e-7;
  std::vector<GapRecord> seen;
  const KrTvResult r = krtv_denoise(u0, {1.0, 1.0}, cfg);
  const auto& h = r.report.history;
  REQUIRE(h.size() >= 2);
  double best = kInfinity;
  std::vector<double> running;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k + 1 < h.size()) CHECK(h[k].iter % 7 == 0);
    if (k > 0) CHECK(h[k].iter > h[k - 1].iter);
    CHECK(h[k].primal >= h[k].dual - 1e-9 * (1.0 + std::abs(h[k].primal)));
    best = std::min(best, h[k].relative_gap);
    running.push_back(best);
  }
  CHECK(std::is_sorted(running.rbegin(), running.rend()));
  CHECK(running.back() < running.front());
}

TEST_CASE("classic scheme and bitwise determinism") {
  const std::vector<double> u0{0.0, 2.0, 0.5, 1.5, -1.0, 0.25};
  const SaddleProblem p = test_l1tv_problem(u0, 0.8);
  SolverConfig cfg;
  cfg.alpha = 0.0;
  cfg.theta = 1.0;
  cfg.max_iters = 200;
  const SaddleState a = solve(p, u0, std::vector<double>(11, 0.0), cfg);
  const SaddleState b = solve(p, u0, std::vector<double>(11, 0.0), cfg);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);

  // Hand-rolled primal-dual hybrid gradient iteration with the same steps.
  const double step = 0.99 / p.op_norm;
  std::vector<double> x = u0, y(11, 0.0), kty(6), kx(11), xbar(6);
  for (int it = 0; it < 200; ++it) {
    p.apply_adjoint(y, kty);
    std::vector<double> xn(6);
    for (std::size_t k = 0; k < 6; ++k) xn[k] = x[k] - step * kty[k];
    for (std::size_t k = 0; k < 6; ++k) xbar[k] = 2.0 * xn[k] - x[k];
    p.apply(xbar, kx);
    for (std::size_t k = 0; k < 11; ++k) y[k] += step * kx[k];
    p.prox_dual(y, step);
    x = xn;
  }
  for (std::size_t k = 0; k < 6; ++k) CHECK(a.x[k] == doctest::Approx(x[k]).epsilon(1e-12));
  for (std::size_t k = 0; k < 11; ++k) CHECK(a.y[k] == doctest::Approx(y[k]).epsilon(1e-12));
}
