#include "krtv/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace krtv {
namespace {

template <class F>
Signal sample_interval(std::size_t n, F f) {
  const Shape s = interval_shape(n);
  GridFunction u(s);
  for (std::size_t i = 0; i < n; ++i) u[i] = f(interval_x(s, i));
  return Signal{std::move(u), -1.0};
}

double value_range(const GridFunction& u) { return u.max() - u.min(); }

// Ranges below this are solver noise around a constant.
bool numerically_constant(double lo, double hi) {
  return hi - lo <= 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

}  // namespace

Shape interval_shape(std::size_t n) {
  if (n < 2) throw InvalidArgument("interval needs at least two samples");
  return Shape::line(n, 2.0 / static_cast<double>(n - 1));
}

double interval_x(const Shape& s, std::size_t i) {
  return -1.0 + static_cast<double>(i) * s.spacing();
}

Signal plateau_signal(std::size_t n, double half_width, double height) {
  return sample_interval(n, [=](double x) { return std::abs(x) <= half_width ? height : 0.0; });
}

Signal ramp_signal(std::size_t n) {
  return sample_interval(n, [](double x) { return 0.5 * (x + 1.0); });
}

Signal hat_signal(std::size_t n, double half_width) {
  return sample_interval(n, [=](double x) { return std::max(0.0, 1.0 - std::abs(x) / half_width); });
}

GridFunction disk_indicator(std::size_t size, double radius) {
  GridFunction u(Shape::plane(size, size));
  const double c = 0.5 * static_cast<double>(size - 1);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double r = std::hypot(static_cast<double>(i) - c, static_cast<double>(j) - c);
      u.at(i, j) = r <= radius ? 1.0 : 0.0;
    }
  }
  return u;
}

GridFunction disk_on_gradient(std::size_t size) {
  GridFunction u(Shape::plane(size, size));
  const double n = static_cast<double>(size);
  const double denom = std::max(1.0, n - 1.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double x = static_cast<double>(j);
      const double y = static_cast<double>(i);
      double v = 0.2 + 0.3 * x / denom;
      if (std::hypot(x - 0.6 * n, y - 0.45 * n) <= 0.22 * n) v = 0.9;
      if (std::abs(x - 0.22 * n) <= 0.06 * n && std::abs(y - 0.75 * n) <= 0.06 * n) v = 0.05;
      u.at(i, j) = v;
    }
  }
  return u;
}

GridFunction salt_and_pepper(const GridFunction& u, double density, std::uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) throw InvalidArgument("noise density must lie in [0, 1]");
  GridFunction out = u;
  std::mt19937_64 rng(seed);
  // Explicit arithmetic keeps the stream identical across standard libraries.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double r = uniform();
    if (r < density) out[k] = r < 0.5 * density ? 0.0 : 1.0;
  }
  return out;
}

Composite cartoon_sinusoid(std::size_t size, double amplitude, double period) {
  const Shape s = Shape::plane(size, size);
  Composite c{GridFunction(s), GridFunction(s), GridFunction(s)};
  const double n = static_cast<double>(size);
  const double denom = std::max(1.0, n - 1.0);
  const double angle = std::numbers::pi / 6.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double x = static_cast<double>(j);
      const double y = static_cast<double>(i);
      c.cartoon.at(i, j) = 0.15 + 0.3 * x / denom;
      if (x >= 0.15 * n && x <= 0.45 * n && y >= 0.1 * n && y <= 0.45 * n) c.cartoon.at(i, j) = 0.7;
      if (std::hypot(x - 0.7 * n, y - 0.3 * n) <= 0.17 * n) c.cartoon.at(i, j) = 0.55;
      const bool corner_a = x >= 0.85 * n && x < 0.93 * n && y >= 0.04 * n && y < 0.12 * n;
      const bool corner_b = x >= 0.03 * n && x < 0.11 * n && y >= 0.04 * n && y < 0.12 * n;
      if (corner_a || corner_b) c.cartoon.at(i, j) = 0.85;
      if (y >= 0.5 * n) {
        const double phase = 2.0 * std::numbers::pi * (x * std::cos(angle) + y * std::sin(angle)) / period;
        c.texture.at(i, j) = amplitude * std::sin(phase);
      }
      c.image.at(i, j) = c.cartoon.at(i, j) + c.texture.at(i, j);
    }
  }
  return c;
}

namespace {

// Sorted values split wherever consecutive values differ by more than
// rel_gap * scale; scale <= 0 means the range of u.
std::vector<std::vector<double>> value_clusters(const GridFunction& u, double rel_gap, double scale) {
  std::vector<double> v = u.vector();
  std::sort(v.begin(), v.end());
  std::vector<std::vector<double>> clusters{{v.front()}};
  if (scale <= 0.0 && numerically_constant(v.front(), v.back())) {
    clusters.front() = v;
    return clusters;
  }
  const double threshold = rel_gap * (scale > 0.0 ? scale : v.back() - v.front());
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] - v[k - 1] > threshold) clusters.emplace_back();
    clusters.back().push_back(v[k]);
  }
  return clusters;
}

double jump_threshold(const GridFunction& u, double rel, double scale) {
  return rel * (scale > 0.0 ? scale : value_range(u));
}

}  // namespace

int count_levels(const GridFunction& u, double rel_gap, double scale) {
  return static_cast<int>(value_clusters(u, rel_gap, scale).size());
}

int count_plateaus(const GridFunction& u, double rel_gap, double scale, std::size_t min_run) {
  const double threshold = jump_threshold(u, rel_gap, scale);
  std::vector<double> levels;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= u.size(); ++i) {
    if (i < u.size() && std::abs(u[i] - u[i - 1]) <= threshold) continue;
    if (i - start >= min_run) {
      double sum = 0.0;
      for (std::size_t k = start; k < i; ++k) sum += u[k];
      levels.push_back(sum / static_cast<double>(i - start));
    }
    start = i;
  }
  if (levels.empty()) return 0;
  std::sort(levels.begin(), levels.end());
  int n = 1;
  for (std::size_t k = 1; k < levels.size(); ++k) n += levels[k] - levels[k - 1] > threshold ? 1 : 0;
  return n;
}

double max_level_spread(const GridFunction& u, double rel_gap, double scale) {
  const auto clusters = value_clusters(u, rel_gap, scale);
  const double range = u.max() - u.min();
  if (clusters.size() == 1 && (range == 0.0 || (scale <= 0.0 && numerically_constant(u.min(), u.max())))) {
    return 0.0;
  }
  double widest = 0.0;
  for (const auto& c : clusters) widest = std::max(widest, c.back() - c.front());
  return widest / (scale > 0.0 ? scale : range);
}

bool is_pure_jump(const GridFunction& u, double rel_gap, double scale) {
  return count_levels(u, rel_gap, scale) == 2 && max_level_spread(u, rel_gap, scale) <= rel_gap;
}

int count_jumps(const GridFunction& u, double rel, double scale) {
  if (scale <= 0.0 && numerically_constant(u.min(), u.max())) return 0;
  const double threshold = jump_threshold(u, rel, scale);
  int jumps = 0;
  bool in_jump = false;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const bool big = std::abs(u[i] - u[i - 1]) > threshold;
    if (big && !in_jump) ++jumps;
    in_jump = big;
  }
  return jumps;
}

double support_length(const GridFunction& u, double baseline, double threshold) {
  std::size_t count = 0;
  for (double v : u.values()) {
    if (v - baseline > threshold) ++count;
  }
  return static_cast<double>(count) * u.shape().spacing();
}

double correlation(const GridFunction& a, const GridFunction& b) {
  require_same_shape(a.shape(), b.shape(), "correlation");
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace krtv
