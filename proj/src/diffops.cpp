#include "krtv/diffops.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace krtv {

void grad(const Shape& shape, std::span<const double> u, std::span<double> field) {
  const std::size_t w = shape.width();
  const std::size_t ht = shape.height();
  const std::size_t n = shape.size();
  const double inv_h = 1.0 / shape.spacing();
  double* gx = field.data();
  for (std::size_t i = 0; i < ht; ++i) {
    const std::size_t row = i * w;
    for (std::size_t j = 0; j + 1 < w; ++j) gx[row + j] = (u[row + j + 1] - u[row + j]) * inv_h;
    gx[row + w - 1] = 0.0;
  }
  if (shape.dim() == 1) return;
  double* gy = field.data() + n;
  for (std::size_t i = 0; i + 1 < ht; ++i) {
    const std::size_t row = i * w;
    for (std::size_t j = 0; j < w; ++j) gy[row + j] = (u[row + w + j] - u[row + j]) * inv_h;
  }
  for (std::size_t j = 0; j < w; ++j) gy[(ht - 1) * w + j] = 0.0;
}

void div(const Shape& shape, std::span<const double> field, std::span<double> out) {
  const std::size_t w = shape.width();
  const std::size_t ht = shape.height();
  const std::size_t n = shape.size();
  const double inv_h = 1.0 / shape.spacing();
  const double* px = field.data();
  for (std::size_t i = 0; i < ht; ++i) {
    const std::size_t row = i * w;
    if (w == 1) {
      out[row] = 0.0;
      continue;
    }
    out[row] = px[row] * inv_h;
    for (std::size_t j = 1; j + 1 < w; ++j) out[row + j] = (px[row + j] - px[row + j - 1]) * inv_h;
    out[row + w - 1] = -px[row + w - 2] * inv_h;
  }
  if (shape.dim() == 1 || ht == 1) return;
  const double* py = field.data() + n;
  for (std::size_t j = 0; j < w; ++j) out[j] += py[j] * inv_h;
  for (std::size_t i = 1; i + 1 < ht; ++i) {
    const std::size_t row = i * w;
    for (std::size_t j = 0; j < w; ++j) out[row + j] += (py[row + j] - py[row - w + j]) * inv_h;
  }
  const std::size_t last = (ht - 1) * w;
  for (std::size_t j = 0; j < w; ++j) out[last + j] -= py[last - w + j] * inv_h;
}

VectorField grad(const GridFunction& u) {
  VectorField v(u.shape());
  grad(u.shape(), u.values(), v.data());
  return v;
}

GridFunction div(const VectorField& v) {
  GridFunction out(v.shape());
  div(v.shape(), v.data(), out.values());
  return out;
}

double gradient_norm_squared_bound(const Shape& shape) {
  const double h = shape.spacing();
  return 4.0 * shape.dim() / (h * h);
}

double op_norm_bound(const Shape& shape) {
  const double l2 = gradient_norm_squared_bound(shape);
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * l2));
}

double op_norm_quick_estimate(const Shape& shape) {
  return std::sqrt(gradient_norm_squared_bound(shape) + 2.0);
}

double power_iteration_norm(
    std::size_t n, const std::function<void(std::span<const double>, std::span<double>)>& normal,
    int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n), y(n);
  for (double& v : x) v = gauss(rng);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double nx = 0.0;
    for (double v : x) nx += v * v;
    nx = std::sqrt(nx);
    if (nx == 0.0) return 0.0;
    for (double& v : x) v /= nx;
    normal(x, y);
    double rq = 0.0;
    for (std::size_t k = 0; k < n; ++k) rq += x[k] * y[k];
    lambda = rq;
    x.swap(y);
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double estimate_cascade_norm(const Shape& shape, int iterations) {
  const std::size_t n = shape.size();
  const std::size_t d = static_cast<std::size_t>(shape.dim());
  std::vector<double> ku(n), kg(d * n), tmp(n);
  // x = (u, nu), K x = (u - div nu, grad u), K^T (f, p) = (f - div p, grad f).
  auto normal = [&](std::span<const double> x, std::span<double> y) {
    auto u = x.subspan(0, n);
    auto nu = x.subspan(n, d * n);
    div(shape, nu, tmp);
    for (std::size_t k = 0; k < n; ++k) ku[k] = u[k] - tmp[k];
    grad(shape, u, kg);
    div(shape, kg, tmp);
    for (std::size_t k = 0; k < n; ++k) y[k] = ku[k] - tmp[k];
    grad(shape, ku, y.subspan(n, d * n));
  };
  return power_iteration_norm(n * (d + 1), normal, iterations);
}

}  // namespace krtv
