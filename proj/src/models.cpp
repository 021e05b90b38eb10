#include "krtv/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "krtv/diffops.hpp"
#include "krtv/objectives.hpp"
#include "krtv/prox.hpp"

namespace krtv {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double l1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Sum and maximum of node magnitudes of a component-major field.
double field_l1(const Shape& s, std::span<const double> v) {
  const std::size_t n = s.size();
  double sum = 0.0;
  if (s.dim() == 1) return l1(v.subspan(0, n));
  for (std::size_t k = 0; k < n; ++k) sum += std::sqrt(v[k] * v[k] + v[n + k] * v[n + k]);
  return sum;
}

double field_max(const Shape& s, std::span<const double> v) {
  const std::size_t n = s.size();
  if (s.dim() == 1) return max_abs(v.subspan(0, n));
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::sqrt(v[k] * v[k] + v[n + k] * v[n + k]));
  return m;
}

// Scratch buffers shared by the operator and gap closures of one problem.
struct Workspace {
  explicit Workspace(const Shape& s)
      : shape(s),
        n(s.size()),
        m(s.size() * static_cast<std::size_t>(s.dim())),
        a(n),
        b(n),
        field(m) {}

  double plain_tv(std::span<const double> u) {
    grad(shape, u, field);
    return field_l1(shape, field);
  }

  Shape shape;
  std::size_t n;
  std::size_t m;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> field;
};

SolveReport make_report(const SaddleState& st, const GridFunction& u0, const GridFunction& u) {
  SolveReport r;
  r.iterations = st.iterations;
  r.converged = st.converged;
  r.history = st.gap_history;
  const GapRecord last = st.last_gap();
  r.primal = last.primal;
  r.dual = last.dual;
  r.relative_gap = st.gap_history.empty() ? kInfinity : last.relative_gap;
  r.mass_in = u0.integral();
  r.mass_out = u.integral();
  r.mean_difference = u.mean() - u0.mean();
  return r;
}

void require_finite_data(const GridFunction& u0) {
  if (u0.size() == 0) throw InvalidArgument("empty input");
  if (!u0.all_finite()) throw InvalidArgument("input contains non-finite values");
}

// Every model is solved on a unit-spacing copy of the grid. Substituting
// nu = h nu' (and g = h g') maps the physical objective onto the unit one
// with rescaled weights; values then differ by the factor h^(d-1).
struct UnitFrame {
  explicit UnitFrame(const Shape& s)
      : physical(s),
        unit(s.dim() == 1 ? Shape::line(s.width()) : Shape::plane(s.height(), s.width())),
        h(s.spacing()),
        value_scale(std::pow(s.spacing(), s.dim() - 1)) {}

  GridFunction to_unit(const GridFunction& u) const { return GridFunction(unit, u.vector()); }
  double scale_weight(double w, int power) const {
    return std::isfinite(w) ? w * std::pow(h, power) : w;
  }

  Shape physical;
  Shape unit;
  double h;
  double value_scale;
};

void rescale_values(SolveReport& r, double s) {
  r.primal *= s;
  r.dual *= s;
  if (std::isfinite(r.relative_gap)) r.relative_gap = (r.primal - r.dual) / (1.0 + std::abs(r.primal));
  for (GapRecord& g : r.history) {
    g.primal *= s;
    g.dual *= s;
    g.gap *= s;
    g.relative_gap = g.gap / (1.0 + std::abs(g.primal));
  }
}

// Fixed rescaling of the cascading blocks: the solver iterates on
// nu / flux and f / multiplier so that all four blocks have comparable size.
struct CascadeScales {
  double flux = 1.0;
  double multiplier = 1.0;
};

// Largest singular value of [[m, m f L], [L, 0]], an upper bound for the
// norm of the scaled cascading operator when ||grad|| <= L.
double scaled_cascade_norm(const Shape& shape, const CascadeScales& sc) {
  const double l2 = gradient_norm_squared_bound(shape);
  const double m = sc.multiplier;
  const double fm = sc.flux * m;
  const double trace = m * m + l2 + fm * fm * l2;
  const double det = fm * fm * l2 * l2;
  return std::sqrt(0.5 * (trace + std::sqrt(std::max(0.0, trace * trace - 4.0 * det))));
}

// Builds the cascading KR-TV saddle problem on a unit grid.
// x = (u, nu / flux), y = (f / multiplier, phi).
SaddleProblem krtv_problem(const GridFunction& u0, const RegParams& lam, const CascadeScales& sc,
                           std::shared_ptr<Workspace> ws) {
  const Shape shape = u0.shape();
  const std::size_t n = ws->n;
  const std::size_t m = ws->m;
  const std::vector<double>& data = u0.vector();
  const double fl = sc.flux;
  const double mu = sc.multiplier;

  SaddleProblem p;
  p.primal_size = n + m;
  p.dual_size = n + m;
  p.op_norm = scaled_cascade_norm(shape, sc);
  p.apply = [shape, n, m, fl, mu](std::span<const double> x, std::span<double> y) {
    auto u = x.subspan(0, n);
    div(shape, x.subspan(n, m), y.subspan(0, n));
    for (std::size_t k = 0; k < n; ++k) y[k] = mu * (u[k] - fl * y[k]);
    grad(shape, u, y.subspan(n, m));
  };
  p.apply_adjoint = [shape, n, m, fl, mu](std::span<const double> y, std::span<double> x) {
    auto f = y.subspan(0, n);
    div(shape, y.subspan(n, m), x.subspan(0, n));
    for (std::size_t k = 0; k < n; ++k) x[k] = mu * f[k] - x[k];
    auto nu = x.subspan(n, m);
    grad(shape, f, nu);
    for (double& v : nu) v *= fl * mu;
  };
  p.prox_primal = [shape, n, m, lam, fl](std::span<double> x, double tau) {
    shrink_field(shape, x.subspan(n, m), lam.lambda2_finite() ? tau * lam.lambda2 * fl : kInfinity);
  };
  p.prox_dual = [shape, n, m, lam, data, mu](std::span<double> y, double sigma) {
    auto f = y.subspan(0, n);
    prox_linear(f, data, sigma * mu);
    project_box(f, lam.lambda1_finite() ? lam.lambda1 / mu : kInfinity);
    project_ball_field(shape, y.subspan(n, m), 1.0);
  };
  p.gap = [ws, shape, n, m, lam, data, fl](std::span<const double> x, std::span<const double> y) {
    auto u = x.subspan(0, n);
    auto nu = x.subspan(n, m);
    GapEstimate g;
    const double nu_term = lam.lambda2_finite() ? lam.lambda2 * fl * field_l1(shape, nu) : 0.0;

    // Candidate (u0 + div nu, nu) has zero residual.
    div(shape, nu, ws->a);
    for (double& v : ws->a) v *= fl;
    for (std::size_t k = 0; k < n; ++k) ws->b[k] = data[k] + ws->a[k];
    double primal = nu_term + ws->plain_tv(ws->b);
    if (lam.lambda1_finite()) {
      double res = 0.0;
      for (std::size_t k = 0; k < n; ++k) res += std::abs(u[k] - data[k] - ws->a[k]);
      primal = std::min(primal, lam.lambda1 * res + nu_term + ws->plain_tv(u));
    }
    g.primal = primal;

    // Dual point t * div phi, scaled into the box and Lipschitz constraints.
    div(shape, y.subspan(n, m), ws->a);
    double t = 1.0;
    const double amax = max_abs(ws->a);
    if (lam.lambda1_finite() && amax > lam.lambda1) t = std::min(t, lam.lambda1 / amax);
    if (lam.lambda2_finite()) {
      grad(shape, ws->a, ws->field);
      const double gmax = field_max(shape, ws->field);
      if (gmax > lam.lambda2) t = std::min(t, lam.lambda2 / gmax);
    }
    g.dual = -t * dot(ws->a, data);
    return g;
  };
  return p;
}

// Geometric mean of the unit and physical frames; the identity when h = 1.
CascadeScales cascade_scales(const UnitFrame& frame) {
  const double r = std::sqrt(frame.h);
  return CascadeScales{1.0 / r, r};
}

}  // namespace

double effectively_infinite(const GridFunction& u0) {
  const double range = u0.max() - u0.min();
  return 1e6 * (range > 0.0 ? range : 1.0);
}

KrTvResult krtv_denoise(const GridFunction& u0, const RegParams& lam, const SolverConfig& cfg) {
  lam.validate();
  require_finite_data(u0);
  if (!lam.lambda1_finite() && !lam.lambda2_finite()) {
    throw InvalidArgument("KR-TV needs at least one finite lambda");
  }
  const UnitFrame frame(u0.shape());
  const Shape& shape = frame.unit;
  const GridFunction data = frame.to_unit(u0);
  const RegParams unit_lam{frame.scale_weight(lam.lambda1, 1), frame.scale_weight(lam.lambda2, 2)};
  auto ws = std::make_shared<Workspace>(shape);
  const CascadeScales sc = cascade_scales(frame);
  const SaddleProblem problem = krtv_problem(data, unit_lam, sc, ws);
  const std::size_t n = ws->n;
  const std::size_t m = ws->m;

  std::vector<double> x0(n + m, 0.0);
  std::copy(data.values().begin(), data.values().end(), x0.begin());
  SaddleState st = solve(problem, std::move(x0), std::vector<double>(n + m, 0.0), cfg);

  std::vector<double> u(st.x.begin(), st.x.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> nu(st.x.begin() + static_cast<std::ptrdiff_t>(n), st.x.end());
  for (double& v : nu) v *= sc.flux;
  // With lambda1 = inf the iterate only satisfies u = u0 + div nu in the limit;
  // return the feasible point instead.
  if (!lam.lambda1_finite()) {
    div(shape, nu, u);
    for (std::size_t k = 0; k < n; ++k) u[k] += data[k];
  } else {
    // The gap certifies the better of (u, nu) and (u0 + div nu, nu).
    std::vector<double> repaired(n);
    div(shape, nu, repaired);
    for (std::size_t k = 0; k < n; ++k) repaired[k] += data[k];
    const VectorField field(shape, nu);
    const double raw = kr_tv_primal_objective(GridFunction(shape, u), field, data, unit_lam);
    if (kr_tv_primal_objective(GridFunction(shape, repaired), field, data, unit_lam) < raw) {
      u = std::move(repaired);
    }
  }
  for (double& v : nu) v *= frame.h;
  std::vector<double> f(st.y.begin(), st.y.begin() + static_cast<std::ptrdiff_t>(n));
  for (double& v : f) v *= sc.multiplier / frame.h;

  KrTvResult out{GridFunction(frame.physical, std::move(u)),
                 VectorField(frame.physical, std::move(nu)),
                 GridFunction(frame.physical, std::move(f)),
                 VectorField(frame.physical, std::vector<double>(st.y.begin() + static_cast<std::ptrdiff_t>(n),
                                                                 st.y.end())),
                 {}};
  out.report = make_report(st, u0, out.u);
  rescale_values(out.report, frame.value_scale);
  return out;
}

L1TvResult l1tv_denoise(const GridFunction& u0, double lambda1, const SolverConfig& cfg,
                        L1TvRoute route) {
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) {
    throw InvalidArgument("L1-TV lambda1 must be positive and finite");
  }
  require_finite_data(u0);
  if (route == L1TvRoute::krtv_reduction) {
    KrTvResult r = krtv_denoise(u0, RegParams{lambda1, kInfinity}, cfg);
    return L1TvResult{std::move(r.u), std::move(r.report)};
  }

  const UnitFrame frame(u0.shape());
  const Shape& shape = frame.unit;
  const double weight = frame.scale_weight(lambda1, 1);
  auto ws = std::make_shared<Workspace>(shape);
  const std::size_t n = ws->n;
  const std::size_t m = ws->m;
  const std::vector<double>& data = u0.vector();

  SaddleProblem p;
  p.primal_size = n;
  p.dual_size = n + m;
  p.op_norm = std::sqrt(1.0 + gradient_norm_squared_bound(shape));
  p.apply = [shape, n, m](std::span<const double> u, std::span<double> y) {
    std::copy(u.begin(), u.end(), y.begin());
    grad(shape, u, y.subspan(n, m));
  };
  p.apply_adjoint = [shape, n, m](std::span<const double> y, std::span<double> u) {
    div(shape, y.subspan(n, m), u);
    for (std::size_t k = 0; k < n; ++k) u[k] = y[k] - u[k];
  };
  p.prox_primal = [](std::span<double>, double) {};
  p.prox_dual = [shape, n, m, weight, data](std::span<double> y, double sigma) {
    auto f = y.subspan(0, n);
    prox_linear(f, data, sigma);
    project_box(f, weight);
    project_ball_field(shape, y.subspan(n, m), 1.0);
  };
  p.gap = [ws, shape, n, m, weight, data](std::span<const double> u,
                                          std::span<const double> y) {
    GapEstimate g;
    double res = 0.0;
    for (std::size_t k = 0; k < n; ++k) res += std::abs(u[k] - data[k]);
    g.primal = weight * res + ws->plain_tv(u);
    div(shape, y.subspan(n, m), ws->a);
    const double amax = max_abs(ws->a);
    const double t = amax > weight ? weight / amax : 1.0;
    g.dual = -t * dot(ws->a, data);
    return g;
  };

  SaddleState st = solve(p, data, std::vector<double>(n + m, 0.0), cfg);
  L1TvResult out{GridFunction(frame.physical, st.x), {}};
  out.report = make_report(st, u0, out.u);
  rescale_values(out.report, frame.value_scale);
  return out;
}

GtvResult gtv_decompose(const GridFunction& u0, double lambda, const SolverConfig& cfg) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("G-TV lambda must be positive and finite");
  }
  require_finite_data(u0);
  const UnitFrame frame(u0.shape());
  const Shape& shape = frame.unit;
  auto ws = std::make_shared<Workspace>(shape);
  const std::size_t n = ws->n;
  const std::size_t m = ws->m;
  const std::vector<double>& data = u0.vector();
  // The max-norm term is not an integral, so in unit plain-sum form its weight
  // becomes lambda h^(2-d).
  const double weight = frame.scale_weight(lambda, 2 - shape.dim());

  // x = (u, g), y = (p, phi), K(u, g) = (div g - u, grad u).
  SaddleProblem p;
  p.primal_size = n + m;
  p.dual_size = n + m;
  p.op_norm = op_norm_bound(shape);
  p.apply = [shape, n, m](std::span<const double> x, std::span<double> y) {
    auto u = x.subspan(0, n);
    div(shape, x.subspan(n, m), y.subspan(0, n));
    for (std::size_t k = 0; k < n; ++k) y[k] -= u[k];
    grad(shape, u, y.subspan(n, m));
  };
  p.apply_adjoint = [shape, n, m](std::span<const double> y, std::span<double> x) {
    auto pp = y.subspan(0, n);
    div(shape, y.subspan(n, m), x.subspan(0, n));
    for (std::size_t k = 0; k < n; ++k) x[k] = -pp[k] - x[k];
    grad(shape, pp, x.subspan(n, m));
    for (std::size_t k = n; k < n + m; ++k) x[k] = -x[k];
  };
  p.prox_primal = [shape, n, m, weight](std::span<double> x, double tau) {
    prox_max_magnitude(shape, x.subspan(n, m), tau * weight);
  };
  p.prox_dual = [shape, n, m, data](std::span<double> y, double sigma) {
    prox_linear(y.subspan(0, n), data, -sigma);
    project_ball_field(shape, y.subspan(n, m), 1.0);
  };
  p.gap = [ws, shape, n, m, weight, data](std::span<const double> x,
                                          std::span<const double> y) {
    GapEstimate g;
    div(shape, x.subspan(n, m), ws->a);
    for (std::size_t k = 0; k < n; ++k) ws->b[k] = data[k] + ws->a[k];
    g.primal = weight * field_max(shape, x.subspan(n, m)) + ws->plain_tv(ws->b);
    // Dual point p = -t div phi with sum |grad p| <= weight.
    div(shape, y.subspan(n, m), ws->a);
    grad(shape, ws->a, ws->field);
    const double gl1 = field_l1(shape, ws->field);
    const double t = gl1 > weight ? weight / gl1 : 1.0;
    g.dual = -t * dot(ws->a, data);
    return g;
  };

  std::vector<double> x0(n + m, 0.0);
  std::copy(data.begin(), data.end(), x0.begin());
  SaddleState st = solve(p, std::move(x0), std::vector<double>(n + m, 0.0), cfg);

  std::vector<double> g(st.x.begin() + static_cast<std::ptrdiff_t>(n), st.x.end());
  std::vector<double> dg(n);
  div(shape, g, dg);
  GridFunction u = u0;
  double residual = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    u[k] += dg[k];
    residual += std::abs(dg[k] - (st.x[k] - data[k]));
  }
  residual *= frame.physical.cell_volume();
  for (double& v : g) v *= frame.h;

  GtvResult out{std::move(u), VectorField(frame.physical, std::move(g)), residual, {}};
  out.report = make_report(st, u0, out.u);
  rescale_values(out.report, frame.value_scale);
  const double residual_tol = std::sqrt(std::max(cfg.gap_tol, 1e-12)) * (1.0 + u0.l1_norm());
  if (residual > residual_tol) out.report.converged = false;
  return out;
}

ModelKind parse_model(const std::string& name) {
  if (name == "krtv") return ModelKind::krtv;
  if (name == "l1tv") return ModelKind::l1tv;
  if (name == "gtv") return ModelKind::gtv;
  throw InvalidArgument("unknown model '" + name + "' (expected krtv, l1tv or gtv)");
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::krtv: return "krtv";
    case ModelKind::l1tv: return "l1tv";
    case ModelKind::gtv: return "gtv";
  }
  return "unknown";
}

double ModelParams::tuned() const {
  switch (kind) {
    case ModelKind::krtv: return lam.lambda2;
    case ModelKind::l1tv: return lam.lambda1;
    case ModelKind::gtv: return g_lambda;
  }
  return 0.0;
}

ModelParams ModelParams::with_tuned(double value) const {
  ModelParams p = *this;
  switch (kind) {
    case ModelKind::krtv: p.lam.lambda2 = value; break;
    case ModelKind::l1tv: p.lam.lambda1 = value; break;
    case ModelKind::gtv: p.g_lambda = value; break;
  }
  return p;
}

Decomposition cartoon_texture(const GridFunction& u0, const ModelParams& params,
                              const SolverConfig& cfg) {
  Decomposition d;
  switch (params.kind) {
    case ModelKind::krtv: {
      KrTvResult r = krtv_denoise(u0, params.lam, cfg);
      d.cartoon = std::move(r.u);
      d.report = std::move(r.report);
      break;
    }
    case ModelKind::l1tv: {
      L1TvResult r = l1tv_denoise(u0, params.lam.lambda1, cfg);
      d.cartoon = std::move(r.u);
      d.report = std::move(r.report);
      break;
    }
    case ModelKind::gtv: {
      GtvResult r = gtv_decompose(u0, params.g_lambda, cfg);
      d.cartoon = std::move(r.u);
      d.report = std::move(r.report);
      break;
    }
  }
  d.texture = u0;
  for (std::size_t k = 0; k < u0.size(); ++k) d.texture[k] = u0[k] - d.cartoon[k];
  d.cartoon_tv = tv_value(d.cartoon);
  d.texture_l1 = d.texture.l1_norm();
  return d;
}

TvMatch match_tv_parameter(const GridFunction& u0, const ModelParams& base, double target_tv,
                           double lo, double hi, const SolverConfig& cfg, double rel_tol,
                           int max_steps) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("bracket must satisfy 0 < lo < hi");
  if (!(target_tv >= 0.0)) throw InvalidArgument("target total variation must be nonnegative");
  TvMatch out;
  auto evaluate = [&](double param) {
    const Decomposition d = cartoon_texture(u0, base.with_tuned(param), cfg);
    out.trace.push_back({param, d.cartoon_tv});
    return d.cartoon_tv;
  };
  auto close_enough = [&](double tv) {
    return std::abs(tv - target_tv) <= rel_tol * std::max(target_tv, 1e-12);
  };

  const double tv_lo = evaluate(lo);
  if (close_enough(tv_lo)) {
    out.params = base.with_tuned(lo);
    out.tv = tv_lo;
    return out;
  }
  const double tv_hi = evaluate(hi);
  if (close_enough(tv_hi)) {
    out.params = base.with_tuned(hi);
    out.tv = tv_hi;
    return out;
  }
  if ((tv_lo - target_tv) * (tv_hi - target_tv) > 0.0) {
    // Attach a coarse sample of the curve for diagnosis.
    std::vector<TvSample> samples = out.trace;
    for (int k = 1; k < 4; ++k) {
      const double param = lo * std::pow(hi / lo, k / 4.0);
      samples.push_back({param, cartoon_texture(u0, base.with_tuned(param), cfg).cartoon_tv});
    }
    std::sort(samples.begin(), samples.end(),
              [](const TvSample& a, const TvSample& b) { return a.parameter < b.parameter; });
    throw BracketError("bracket does not straddle the target total variation",
                       std::move(samples));
  }
  const bool increasing = tv_hi > tv_lo;
  double a = lo;
  double b = hi;
  for (int step = 0; step < max_steps; ++step) {
    const double mid = std::sqrt(a * b);
    const double tv = evaluate(mid);
    if (close_enough(tv)) {
      out.params = base.with_tuned(mid);
      out.tv = tv;
      return out;
    }
    if ((tv < target_tv) == increasing) {
      a = mid;
    } else {
      b = mid;
    }
  }
  throw Error("total variation matching did not reach the tolerance");
}

}  // namespace krtv
