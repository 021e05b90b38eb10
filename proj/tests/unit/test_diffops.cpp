#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "krtv/diffops.hpp"
#include "support.hpp"

using namespace krtv;
using testing::Rng;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

TEST_CASE("gradient and divergence examples") {
  const GridFunction u(Shape::line(3), {0.0, 1.0, 2.0});
  const VectorField g = grad(u);
  CHECK(g.component(0)[0] == 1.0);
  CHECK(g.component(0)[1] == 1.0);
  CHECK(g.component(0)[2] == 0.0);

  const GridFunction d = div(VectorField(Shape::line(3), {1.0, 1.0, 0.0}));
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == -1.0);

  const VectorField flat = grad(GridFunction(Shape::plane(4, 5, 0.3), 2.5));
  for (double v : flat.data()) CHECK(v == 0.0);
  const GridFunction none = div(VectorField(Shape::plane(4, 5)));
  for (double v : none.values()) CHECK(v == 0.0);

  const GridFunction scaled(Shape::line(3, 0.5), {0.0, 1.0, 2.0});
  CHECK(grad(scaled).component(0)[0] == doctest::Approx(2.0));
}

TEST_CASE("operators match the loop-based reference") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape s = trial % 3 == 0 ? Shape::line(rng.integer(1, 20), rng.uniform(0.1, 2.0))
                                   : Shape::plane(rng.integer(1, 9), rng.integer(1, 9), rng.uniform(0.1, 2.0));
    const GridFunction u = testing::random_function(rng, s);
    const VectorField v = testing::random_field(rng, s);
    const VectorField g = grad(u);
    const VectorField gr = testing::reference_grad(u);
    for (std::size_t k = 0; k < g.data().size(); ++k) CHECK(g.data()[k] == doctest::Approx(gr.data()[k]).epsilon(1e-14));
    const GridFunction d = div(v);
    const GridFunction dr = testing::reference_div(v);
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(d[k] - dr[k]) <= 1e-12 * (1.0 + std::abs(dr[k])));
  }
}

TEST_CASE("adjointness on random grids up to 64x64") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t H = static_cast<std::size_t>(rng.integer(1, 64));
    const std::size_t W = static_cast<std::size_t>(rng.integer(1, 64));
    const Shape s = trial % 4 == 0 ? Shape::line(W, rng.uniform(0.05, 3.0)) : Shape::plane(H, W, rng.uniform(0.05, 3.0));
    const GridFunction u = testing::random_function(rng, s);
    const VectorField v = testing::random_field(rng, s);
    const double lhs = dot(grad(u).data(), v.data()) + dot(u.values(), div(v).values());
    CHECK(std::abs(lhs) <= 1e-12 * norm(u.values()) * norm(v.data()));
  }
}

TEST_CASE("div of grad of a constant vanishes exactly") {
  for (const Shape& s : {Shape::line(9, 0.3), Shape::plane(7, 11, 0.7)}) {
    const GridFunction d = div(grad(GridFunction(s, -4.25)));
    for (double v : d.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("operator norm formulas") {
  CHECK(gradient_norm_squared_bound(Shape::plane(3, 3)) == doctest::Approx(8.0));
  CHECK(gradient_norm_squared_bound(Shape::line(3, 0.5)) == doctest::Approx(16.0));
  CHECK(op_norm_quick_estimate(Shape::plane(16, 16)) == doctest::Approx(std::sqrt(10.0)));
  CHECK(op_norm_quick_estimate(Shape::line(16)) == doctest::Approx(std::sqrt(6.0)));
  CHECK(op_norm_bound(Shape::plane(16, 16)) == doctest::Approx((1.0 + std::sqrt(33.0)) / 2.0));
  CHECK(op_norm_bound(Shape::line(16)) == doctest::Approx((1.0 + std::sqrt(17.0)) / 2.0));
}

TEST_CASE("power iteration stays below the bound and exceeds the quick estimate") {
  const Shape s = Shape::plane(16, 16);
  const double estimate = estimate_cascade_norm(s, 2000);
  CHECK(estimate <= op_norm_bound(s));
  CHECK(estimate >= 0.95 * op_norm_bound(s));
  // The quick estimate is not an upper bound for this operator.
  CHECK(estimate > op_norm_quick_estimate(s));

  for (const Shape& t : {Shape::line(40, 0.2), Shape::plane(9, 13, 0.5), Shape::plane(1, 1)}) {
    CHECK(estimate_cascade_norm(t, 500) <= op_norm_bound(t) * (1.0 + 1e-12));
  }
}

TEST_CASE("power iteration recovers a known spectral norm") {
  // A = diag(1, 2, 3, 0.5); A^T A has top eigenvalue 9.
  const std::vector<double> diag{1.0, 2.0, 3.0, 0.5};
  const double n = power_iteration_norm(
      diag.size(),
      [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = diag[k] * diag[k] * in[k];
      },
      200);
  CHECK(n == doctest::Approx(3.0).epsilon(1e-9));
}
