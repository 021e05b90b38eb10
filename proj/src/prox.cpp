#include "krtv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace krtv {
namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw InvalidArgument(std::string(what) + " must be positive");
}

// Applies scale(|w|) to every node vector.
template <typename Scale>
void scale_nodes(const Shape& shape, std::span<double> field, Scale scale) {
  const std::size_t n = shape.size();
  double* x = field.data();
  if (shape.dim() == 1) {
    for (std::size_t k = 0; k < n; ++k) x[k] *= scale(std::abs(x[k]));
    return;
  }
  double* y = field.data() + n;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = scale(std::sqrt(x[k] * x[k] + y[k] * y[k]));
    x[k] *= s;
    y[k] *= s;
  }
}

}  // namespace

void project_box(std::span<double> f, double bound) {
  check_positive(bound, "box bound");
  if (bound == kInfinity) return;
  for (double& v : f) v = std::clamp(v, -bound, bound);
}

GridFunction project_box(GridFunction f, double bound) {
  project_box(f.values(), bound);
  return f;
}

void project_ball_field(const Shape& shape, std::span<double> field, double radius) {
  check_positive(radius, "ball radius");
  if (radius == kInfinity) return;
  scale_nodes(shape, field, [radius](double m) { return m > radius ? radius / m : 1.0; });
}

VectorField project_ball_field(VectorField v, double radius) {
  project_ball_field(v.shape(), v.data(), radius);
  return v;
}

void shrink_field(const Shape& shape, std::span<double> field, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("shrink threshold must be nonnegative");
  if (threshold == 0.0) return;
  if (threshold == kInfinity) {
    std::fill(field.begin(), field.end(), 0.0);
    return;
  }
  scale_nodes(shape, field,
              [threshold](double m) { return m > threshold ? 1.0 - threshold / m : 0.0; });
}

VectorField shrink_field(VectorField v, double threshold) {
  shrink_field(v.shape(), v.data(), threshold);
  return v;
}

void prox_linear(std::span<double> f, std::span<const double> u0, double step) {
  if (f.size() != u0.size()) throw ShapeMismatch("prox_linear: size mismatch");
  for (std::size_t k = 0; k < f.size(); ++k) f[k] -= step * u0[k];
}

GridFunction prox_linear(GridFunction f, const GridFunction& u0, double step) {
  require_same_shape(f.shape(), u0.shape(), "prox_linear");
  prox_linear(f.values(), u0.values(), step);
  return f;
}

void project_l1_ball_field(const Shape& shape, std::span<double> field, double radius) {
  check_positive(radius, "l1 ball radius");
  if (radius == kInfinity) return;
  const std::size_t n = shape.size();
  std::vector<double> mag(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (int c = 0; c < shape.dim(); ++c) {
      const double v = field[static_cast<std::size_t>(c) * n + k];
      s += v * v;
    }
    mag[k] = std::sqrt(s);
    total += mag[k];
  }
  if (total <= radius) return;

  // Threshold theta with sum max(m_k - theta, 0) = radius.
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (k + 1 == n || sorted[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double s = mag[k] > theta ? (mag[k] - theta) / mag[k] : 0.0;
    for (int c = 0; c < shape.dim(); ++c) field[static_cast<std::size_t>(c) * n + k] *= s;
  }
}

void prox_max_magnitude(const Shape& shape, std::span<double> field, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("prox step must be nonnegative");
  if (t == 0.0) return;
  std::vector<double> scaled(field.begin(), field.end());
  for (double& v : scaled) v /= t;
  project_l1_ball_field(shape, scaled, 1.0);
  for (std::size_t k = 0; k < field.size(); ++k) field[k] -= t * scaled[k];
}

}  // namespace krtv
