#include "krtv/krnorm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "krtv/diffops.hpp"
#include "krtv/prox.hpp"

namespace krtv {
namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

// Dense uncapacitated min-cost flow, solved by successive shortest paths.
class DenseFlow {
 public:
  DenseFlow(std::vector<double> cost, std::size_t v)
      : v_(v), cost_(std::move(cost)), flow_(v * v, 0.0) {}

  void solve(std::vector<double> excess, double eps) {
    std::vector<double> dist(v_);
    std::vector<std::size_t> pred(v_);
    const std::size_t max_rounds = 200 * v_ * v_;
    for (std::size_t round = 0;; ++round) {
      if (round > max_rounds) throw Error("transport solver failed to terminate");
      std::size_t s = v_;
      for (std::size_t i = 0; i < v_; ++i) {
        if (excess[i] > eps && (s == v_ || excess[i] > excess[s])) s = i;
      }
      if (s == v_) break;
      shortest_paths(s, dist, pred);
      std::size_t t = v_;
      for (std::size_t i = 0; i < v_; ++i) {
        if (excess[i] < -eps && dist[i] < kInfinity && (t == v_ || dist[i] < dist[t])) t = i;
      }
      if (t == v_) throw Error("transport problem is infeasible");
      double delta = std::min(excess[s], -excess[t]);
      for (std::size_t w = t; w != s; w = pred[w]) {
        const std::size_t u = pred[w];
        if (!forward_is_cheaper(u, w)) delta = std::min(delta, flow_[w * v_ + u]);
      }
      for (std::size_t w = t; w != s; w = pred[w]) {
        const std::size_t u = pred[w];
        if (forward_is_cheaper(u, w)) {
          flow_[u * v_ + w] += delta;
        } else {
          double& back = flow_[w * v_ + u];
          back -= delta;
          if (back < eps * 1e-6) back = 0.0;
        }
      }
      excess[s] -= delta;
      excess[t] += delta;
    }
  }

  // Shortest distances from `source` in the residual graph.
  void shortest_paths(std::size_t source, std::vector<double>& dist,
                      std::vector<std::size_t>& pred) const {
    std::fill(dist.begin(), dist.end(), kInfinity);
    std::fill(pred.begin(), pred.end(), v_);
    dist[source] = 0.0;
    for (std::size_t pass = 0; pass < v_; ++pass) {
      bool changed = false;
      for (std::size_t u = 0; u < v_; ++u) {
        if (dist[u] == kInfinity) continue;
        for (std::size_t w = 0; w < v_; ++w) {
          if (w == u) continue;
          const double c = residual_cost(u, w);
          if (c == kInfinity) continue;
          const double cand = dist[u] + c;
          if (dist[w] == kInfinity || cand < dist[w] - 1e-15 * (1.0 + std::abs(dist[w]))) {
            dist[w] = cand;
            pred[w] = u;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
  }

  double flow(std::size_t u, std::size_t w) const { return flow_[u * v_ + w]; }
  double cost(std::size_t u, std::size_t w) const { return cost_[u * v_ + w]; }

 private:
  double residual_cost(std::size_t u, std::size_t w) const {
    double c = cost_[u * v_ + w];
    if (flow_[w * v_ + u] > 0.0) c = std::min(c, -cost_[w * v_ + u]);
    return c;
  }

  bool forward_is_cheaper(std::size_t u, std::size_t w) const {
    if (flow_[w * v_ + u] <= 0.0) return true;
    return cost_[u * v_ + w] <= -cost_[w * v_ + u];
  }

  std::size_t v_;
  std::vector<double> cost_;
  std::vector<double> flow_;
};

}  // namespace

KrNormExact kr_norm_exact(const DiscreteMeasure& mu, const RegParams& lam) {
  mu.validate();
  lam.validate();
  if (!lam.lambda1_finite()) throw InvalidArgument("kr_norm_exact needs a finite lambda1");
  const std::size_t n = mu.size();
  if (n > kMaxExactPoints) {
    throw InvalidArgument("kr_norm_exact handles at most " + std::to_string(kMaxExactPoints) +
                          " points, got " + std::to_string(n));
  }

  // Nodes 0..n-1 are the atoms, node n is the ground that absorbs mass at cost l1.
  const std::size_t v = n + 1;
  std::vector<double> cost(v * v, kInfinity);
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[i * n + j] = distance(mu.points[i], mu.points[j]);
      if (i != j && lam.lambda2_finite()) cost[i * v + j] = lam.lambda2 * dist[i * n + j];
    }
    cost[i * v + n] = lam.lambda1;
    cost[n * v + i] = lam.lambda1;
  }

  std::vector<double> excess(v, 0.0);
  for (std::size_t i = 0; i < n; ++i) excess[i] = mu.weights[i];
  excess[n] = -mu.total_mass();
  const double scale = std::max(1.0, mu.total_variation());
  const double eps = 1e-14 * scale;

  DenseFlow flow(cost, v);
  flow.solve(excess, eps);

  KrNormExact out;
  TransportPlan& plan = out.plan;
  plan.n = n;
  plan.points = mu.points;
  plan.cost = dist;
  plan.gamma.assign(n * n, 0.0);
  plan.residual.assign(n, 0.0);
  double primal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double net = flow.flow(i, j) - flow.flow(j, i);
      if (net > 0.0) {
        plan.gamma[i * n + j] = net;
        primal += lam.lambda2 * dist[i * n + j] * net;
      }
    }
    plan.residual[i] = flow.flow(i, n) - flow.flow(n, i);
    primal += lam.lambda1 * std::abs(plan.residual[i]);
  }

  // Potentials f_i = -dist(ground -> i) in the optimal residual graph.
  std::vector<double> d(v);
  std::vector<std::size_t> pred(v);
  flow.shortest_paths(n, d, pred);
  out.potentials.resize(n);
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.potentials[i] = -d[i];
    dual += mu.weights[i] * out.potentials[i];
  }
  double violation = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = out.potentials[i];
    violation = std::max(violation, std::abs(fi) - lam.lambda1);
    if (!lam.lambda2_finite()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      violation = std::max(violation, fi - out.potentials[j] - lam.lambda2 * dist[i * n + j]);
    }
  }

  out.primal = primal;
  out.dual = dual;
  out.value = primal;
  out.certificate = primal - dual;
  out.dual_violation = std::max(violation, 0.0);
  return out;
}

KrNormGrid kr_norm_grid(const GridFunction& mu, const RegParams& lam, const SolverConfig& cfg) {
  lam.validate();
  if (!lam.lambda1_finite()) throw InvalidArgument("kr_norm_grid needs a finite lambda1");
  if (!mu.all_finite()) throw InvalidArgument("measure density must be finite");
  // Solved on unit spacing with node masses: substituting nu = h^(1-d) nu'
  // leaves the value unchanged and turns lambda2 into h lambda2.
  const Shape& physical = mu.shape();
  const Shape shape = physical.dim() == 1 ? Shape::line(physical.width())
                                          : Shape::plane(physical.height(), physical.width());
  const double h = physical.spacing();
  const double l1 = lam.lambda1;
  const double l2 = lam.lambda2_finite() ? lam.lambda2 * h : kInfinity;
  const std::size_t n = shape.size();
  const std::size_t m = n * static_cast<std::size_t>(shape.dim());
  std::vector<double> data = mu.vector();
  for (double& v : data) v *= physical.cell_volume();
  auto scratch = std::make_shared<std::vector<double>>(std::max(n, m));

  // x = nu, y = f, K nu = -div nu, K^T f = grad f.
  SaddleProblem p;
  p.primal_size = m;
  p.dual_size = n;
  p.op_norm = std::sqrt(gradient_norm_squared_bound(shape));
  p.apply = [shape](std::span<const double> nu, std::span<double> y) {
    div(shape, nu, y);
    for (double& v : y) v = -v;
  };
  p.apply_adjoint = [shape](std::span<const double> f, std::span<double> nu) {
    grad(shape, f, nu);
  };
  p.prox_primal = [shape, l2](std::span<double> nu, double tau) {
    shrink_field(shape, nu, std::isfinite(l2) ? tau * l2 : kInfinity);
  };
  p.prox_dual = [l1, data](std::span<double> f, double sigma) {
    prox_linear(f, data, -sigma);
    project_box(f, l1);
  };
  p.gap = [shape, l1, l2, data, n, m, scratch](std::span<const double> nu,
                                               std::span<const double> f) {
    GapEstimate g;
    std::span<double> a(scratch->data(), n);
    div(shape, nu, a);
    double res = 0.0;
    for (std::size_t k = 0; k < n; ++k) res += std::abs(data[k] - a[k]);
    g.primal = l1 * res;
    if (std::isfinite(l2)) g.primal += l2 * VectorField(shape, {nu.begin(), nu.end()}).l1_norm();
    double t = 1.0;
    if (std::isfinite(l2)) {
      std::span<double> gf(scratch->data(), m);
      grad(shape, f, gf);
      const double gmax = VectorField(shape, {gf.begin(), gf.end()}).max_magnitude();
      if (gmax > l2) t = l2 / gmax;
    }
    double pair = 0.0;
    for (std::size_t k = 0; k < n; ++k) pair += f[k] * data[k];
    g.dual = t * pair;
    return g;
  };

  SaddleState st = solve(p, std::vector<double>(m, 0.0), std::vector<double>(n, 0.0), cfg);
  KrNormGrid out;
  const GapRecord last = st.last_gap();
  out.value = last.primal;
  out.dual = last.dual;
  out.relative_gap = last.relative_gap;
  out.iterations = st.iterations;
  out.converged = st.converged;
  std::vector<double> nu = st.x;
  for (double& v : nu) v *= std::pow(h, 1 - physical.dim());
  out.nu = VectorField(physical, std::move(nu));
  out.f = GridFunction(physical, st.y);
  return out;
}

GridFunction embed_measure(const DiscreteMeasure& mu, const Shape& shape) {
  mu.validate();
  if (mu.dim() != shape.dim()) {
    throw ShapeMismatch("measure dimension does not match the grid dimension");
  }
  GridFunction g(shape);
  const double h = shape.spacing();
  const double vol = shape.cell_volume();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto& x = mu.points[i];
    const double col = std::round(x[0] / h);
    const double row = shape.dim() == 2 ? std::round(x[1] / h) : 0.0;
    if (col < 0 || row < 0 || col >= static_cast<double>(shape.width()) ||
        row >= static_cast<double>(shape.height())) {
      throw InvalidArgument("measure point lies outside the grid");
    }
    g.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col)) += mu.weights[i] / vol;
  }
  return g;
}

DiscreteMeasure grid_to_measure(const GridFunction& u, double drop_below) {
  const Shape& s = u.shape();
  DiscreteMeasure mu;
  for (std::size_t i = 0; i < s.height(); ++i) {
    for (std::size_t j = 0; j < s.width(); ++j) {
      const double v = u.at(i, j);
      if (std::abs(v) <= drop_below || v == 0.0) continue;
      if (s.dim() == 1) {
        mu.points.push_back({static_cast<double>(j) * s.spacing()});
      } else {
        mu.points.push_back({static_cast<double>(j) * s.spacing(), static_cast<double>(i) * s.spacing()});
      }
      mu.weights.push_back(v * s.cell_volume());
    }
  }
  return mu;
}

}  // namespace krtv
