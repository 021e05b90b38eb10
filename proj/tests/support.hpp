#pragma once

// Test-side helpers. The reference operators here are written independently
// of the library kernels (explicit loops over nodes) so they can serve as
// oracles.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "krtv/grid.hpp"

namespace testing {

using krtv::GridFunction;
using krtv::Shape;
using krtv::VectorField;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

 private:
  std::mt19937_64 gen_;
};

inline GridFunction random_function(Rng& rng, const Shape& s, double lo = -1.0, double hi = 1.0) {
  GridFunction u(s);
  for (double& v : u.values()) v = rng.uniform(lo, hi);
  return u;
}

inline VectorField random_field(Rng& rng, const Shape& s, double lo = -1.0, double hi = 1.0) {
  VectorField v(s);
  for (double& x : v.data()) x = rng.uniform(lo, hi);
  return v;
}

// Forward differences with a zero difference at the last node of each axis.
inline VectorField reference_grad(const GridFunction& u) {
  const Shape& s = u.shape();
  VectorField g(s);
  const double h = s.spacing();
  const std::size_t H = s.height(), W = s.width();
  auto gx = g.component(0);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      gx[r * W + c] = c + 1 < W ? (u.at(r, c + 1) - u.at(r, c)) / h : 0.0;
    }
  }
  if (s.dim() == 2) {
    auto gy = g.component(1);
    for (std::size_t r = 0; r < H; ++r) {
      for (std::size_t c = 0; c < W; ++c) {
        gy[r * W + c] = r + 1 < H ? (u.at(r + 1, c) - u.at(r, c)) / h : 0.0;
      }
    }
  }
  return g;
}

// Negative transpose of reference_grad, assembled column by column from the
// definition <grad e_k, v> = -(div v)_k.
inline GridFunction reference_div(const VectorField& v) {
  const Shape& s = v.shape();
  GridFunction out(s);
  for (std::size_t k = 0; k < s.size(); ++k) {
    GridFunction e(s);
    e[k] = 1.0;
    const VectorField ge = reference_grad(e);
    double dot = 0.0;
    for (std::size_t j = 0; j < ge.data().size(); ++j) dot += ge.data()[j] * v.data()[j];
    out[k] = -dot;
  }
  return out;
}

inline double reference_tv(const GridFunction& u) {
  const VectorField g = reference_grad(u);
  double tv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double m = 0.0;
    for (int c = 0; c < g.components(); ++c) m += g.component(c)[k] * g.component(c)[k];
    tv += std::sqrt(m);
  }
  return tv * u.shape().cell_volume();
}

inline double l1_distance(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

inline double l1_sum(const GridFunction& a) {
  double d = 0.0;
  for (double v : a.values()) d += std::abs(v);
  return d;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// Wasserstein-1 distance between two equal-mass point measures on a line,
// via the cumulative-distribution formula int |F(x)| dx.
inline double line_w1(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  double cdf = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf += atoms[i].second;
    total += std::abs(cdf) * (atoms[i + 1].first - atoms[i].first);
  }
  return total;
}

}  // namespace testing
