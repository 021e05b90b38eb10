#include "krtv/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>

#include "krtv/diffops.hpp"
#include "krtv/experiments.hpp"
#include "krtv/krnorm.hpp"
#include "krtv/models.hpp"
#include "krtv/phantoms.hpp"

namespace krtv {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 gen_;
};

GridFunction random_image(Rng& rng, std::size_t height, std::size_t width) {
  GridFunction u(Shape::plane(height, width));
  for (double& v : u.values()) v = rng.uniform();
  return u;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Largest relative gap among converged solves seen so far.
struct GapLedger {
  int converged = 0;
  double worst = 0.0;
  void add(const SolveReport& r) {
    if (!r.converged) return;
    ++converged;
    worst = std::max(worst, r.relative_gap);
  }
};

CheckResult adjointness() {
  Rng rng(11);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Shape s = t % 2 ? Shape::line(2 + rng.index(40), rng.uniform(0.1, 2.0))
                          : Shape::plane(1 + rng.index(32), 1 + rng.index(32), rng.uniform(0.1, 2.0));
    GridFunction u(s);
    for (double& v : u.values()) v = rng.uniform(-1, 1);
    VectorField phi(s);
    for (double& v : phi.data()) v = rng.uniform(-1, 1);
    const VectorField g = grad(u);
    const GridFunction d = div(phi);
    double lhs = 0.0, nu = 0.0, np = 0.0;
    for (std::size_t k = 0; k < g.data().size(); ++k) lhs += g.data()[k] * phi.data()[k];
    for (std::size_t k = 0; k < u.size(); ++k) lhs += u[k] * d[k];
    for (double v : u.values()) nu += v * v;
    for (double v : phi.data()) np += v * v;
    worst = std::max(worst, std::abs(lhs) / std::sqrt(nu * np));
  }
  return {"adjointness", worst <= 1e-12, fmt("max relative defect %.2e", worst)};
}

CheckResult kr_oracle() {
  Rng rng(12);
  double worst_cert = 0.0;
  double worst_formula = 0.0;
  for (int t = 0; t < 20; ++t) {
    DiscreteMeasure mu;
    const std::size_t n = 2 + rng.index(8);
    for (std::size_t i = 0; i < n; ++i) {
      mu.points.push_back({rng.uniform(), rng.uniform()});
      mu.weights.push_back(rng.uniform(0.2, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0));
    }
    const RegParams lam{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const KrNormExact r = kr_norm_exact(mu, lam);
    worst_cert = std::max(worst_cert, std::abs(r.certificate) / std::max(1.0, r.value));
  }
  for (double d : {0.1, 0.5, 1.0, 3.0}) {
    const DiscreteMeasure dipole{{{0.0, 0.0}, {d, 0.0}}, {1.0, -1.0}};
    const RegParams lam{1.0, 1.5};
    const double want = std::min(2.0 * lam.lambda1, lam.lambda2 * d);
    worst_formula = std::max(worst_formula, std::abs(kr_norm_exact(dipole, lam).value - want) / want);
    const DiscreteMeasure positive{{{0.0, 0.0}, {d, 0.0}}, {1.0, 2.0}};
    worst_formula = std::max(worst_formula, std::abs(kr_norm_exact(positive, lam).value - 3.0) / 3.0);
  }
  const bool ok = worst_cert <= 1e-8 && worst_formula <= 1e-6;
  return {"kr oracle", ok, fmt("certificate %.1e, closed forms %.1e", worst_cert, worst_formula)};
}

CheckResult grid_vs_exact_1d() {
  // On a line, grid transport along edges is exact.
  const Shape s = Shape::line(33, 1.0 / 32.0);
  const DiscreteMeasure mu{{{0.125}, {0.5}, {0.875}}, {1.0, -0.6, -0.2}};
  const RegParams lam{1.0, 1.0};
  SolverConfig cfg;
  cfg.max_iters = 100000;
  cfg.gap_tol = 1e-7;
  cfg.restart = true;
  const double exact = kr_norm_exact(mu, lam).value;
  const double grid = kr_norm_grid(embed_measure(mu, s), lam, cfg).value;
  const double rel = std::abs(grid - exact) / exact;
  return {"grid kr matches exact in 1D", rel <= 1e-3, fmt("exact %.6f, grid rel error %.1e", exact, rel)};
}

CheckResult mass_preservation(GapLedger& gaps) {
  Rng rng(13);
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const GridFunction u0 = random_image(rng, 16, 16);
    const double l1 = rng.uniform(0.5, 2.0);
    const double l2 = l1 * 2.0 / u0.shape().diameter() * rng.uniform(0.2, 1.0);
    const KrTvResult r = krtv_denoise(u0, RegParams{l1, l2});
    gaps.add(r.report);
    worst = std::max(worst, std::abs(r.report.mean_difference) / std::max(1.0, u0.max_abs()));
    worst = std::max(worst, std::abs(r.report.mass_out - r.report.mass_in) /
                                (static_cast<double>(u0.size()) * u0.shape().cell_volume()));
  }
  return {"mass preservation", worst <= 1e-5, fmt("max mean drift %.1e", worst)};
}

CheckResult maximum_principle(GapLedger& gaps) {
  const GridFunction u0 = salt_and_pepper(disk_on_gradient(24), 0.1, 3);
  double low = kInfinity, excess = -kInfinity;
  for (RegParams lam : {RegParams{1.0, 0.2}, RegParams{0.5, 0.05}, RegParams{kInfinity, 0.1}}) {
    const KrTvResult r = krtv_denoise(u0, lam);
    gaps.add(r.report);
    low = std::min(low, r.u.min());
    excess = std::max(excess, r.u.max_abs() - u0.max_abs());
  }
  const double tol = 1e-5 * u0.max_abs();
  return {"maximum principle", low >= -tol && excess <= 1e-5,
          fmt("min(u) %.2e, max|u| - max|u0| %.2e", low, excess)};
}

CheckResult l1tv_reduction(GapLedger& gaps) {
  Rng rng(14);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const GridFunction u0 = random_image(rng, 12, 12);
    const double l1 = rng.uniform(0.5, 1.5);
    const L1TvResult a = l1tv_denoise(u0, l1);
    const L1TvResult b = l1tv_denoise(u0, l1, {}, L1TvRoute::krtv_reduction);
    gaps.add(a.report);
    gaps.add(b.report);
    double diff = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k) diff += std::abs(a.u[k] - b.u[k]);
    worst = std::max(worst, diff / std::max(a.u.l1_norm(), 1e-12));
  }
  return {"l1-tv reduction", worst <= 1e-3, fmt("max relative l1 difference %.1e", worst)};
}

CheckResult sweeps_1d(GapLedger& gaps) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("krtv-selftest-" + std::to_string(std::random_device{}()));
  ExperimentOptions opt;
  opt.write_reports = false;
  bool pure = false, widening = true, hat_jumps = false, mass = true;
  double last_support = -kInfinity;
  auto note = [&](const SweepRun& r) {
    SolveReport rep;
    rep.converged = r.converged;
    rep.relative_gap = r.relative_gap;
    gaps.add(rep);
  };
  for (const SweepRun& r : run_experiment("ramp", dir.string(), opt).runs_of("krtv")) {
    note(r);
    pure = pure || r.plateaus == 2;
  }
  for (const SweepRun& r : run_experiment("plateau", dir.string(), opt).runs_of("krtv")) {
    note(r);
    widening = widening && r.support > last_support;
    last_support = r.support;
    mass = mass && std::abs(r.mass_out - r.mass_in) <= 1e-5 * std::max(1.0, std::abs(r.mass_in));
  }
  for (const SweepRun& r : run_experiment("hat", dir.string(), opt).runs_of("krtv")) {
    note(r);
    hat_jumps = hat_jumps || r.jumps >= 2;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  std::string detail = std::string("ramp two-plateau ") + (pure ? "yes" : "no") + ", plateau widening " +
                       (widening ? "yes" : "no") + ", plateau mass " + (mass ? "kept" : "lost") +
                       ", hat jumps " + (hat_jumps ? "yes" : "no");
  return {"1d sweeps", pure && widening && mass && hat_jumps, detail};
}

}  // namespace

std::vector<CheckResult> run_selftest(std::ostream* log) {
  GapLedger gaps;
  const std::vector<std::function<CheckResult()>> checks = {
      adjointness,
      kr_oracle,
      grid_vs_exact_1d,
      [&] { return mass_preservation(gaps); },
      [&] { return maximum_principle(gaps); },
      [&] { return l1tv_reduction(gaps); },
      [&] { return sweeps_1d(gaps); },
      [&] {
        return CheckResult{"gap closure", gaps.converged > 0 && gaps.worst <= 1e-4,
                           fmt("%.0f converged solves, worst relative gap %.1e", gaps.converged, gaps.worst)};
      },
  };
  std::vector<CheckResult> out;
  for (const auto& check : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.name = "check " + std::to_string(out.size() + 1);
      r.detail = std::string("threw: ") + e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace krtv
