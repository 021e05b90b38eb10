#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "krtv/diffops.hpp"
#include "krtv/grid.hpp"
#include "krtv/objectives.hpp"
#include "support.hpp"

using namespace krtv;
using testing::Rng;

TEST_CASE("shape geometry") {
  const Shape line = Shape::line(5, 0.5);
  CHECK(line.dim() == 1);
  CHECK(line.size() == 5);
  CHECK(line.cell_volume() == doctest::Approx(0.5));
  CHECK(line.diameter() == doctest::Approx(2.0));

  const Shape plane = Shape::plane(4, 7, 0.25);
  CHECK(plane.dim() == 2);
  CHECK(plane.size() == 28);
  CHECK(plane.cell_volume() == doctest::Approx(0.0625));
  CHECK(plane.diameter() == doctest::Approx(0.25 * std::sqrt(9.0 + 36.0)));

  CHECK_THROWS_AS(Shape::line(0), InvalidArgument);
  CHECK_THROWS_AS(Shape::plane(3, 3, 0.0), InvalidArgument);
  CHECK_THROWS_AS(Shape::plane(3, 3, -1.0), InvalidArgument);
}

TEST_CASE("grid function invariants") {
  const Shape s = Shape::plane(2, 3);
  CHECK_THROWS_AS(GridFunction(s, std::vector<double>{1, 2, 3}), ShapeMismatch);
  CHECK_THROWS_AS(GridFunction(s, std::vector<double>{1, 2, 3, 4, 5, NAN}), InvalidArgument);
  CHECK_THROWS_AS(GridFunction(s, std::vector<double>{1, 2, 3, 4, 5, INFINITY}), InvalidArgument);
  CHECK_THROWS_AS(VectorField(s, std::vector<double>(5, 0.0)), ShapeMismatch);
  CHECK_THROWS_AS(VectorField(s, std::vector<double>(12, NAN)), InvalidArgument);

  const GridFunction u(Shape::plane(2, 2, 0.5), {1.0, -2.0, 3.0, 2.0});
  CHECK(u.sum() == doctest::Approx(4.0));
  CHECK(u.mean() == doctest::Approx(1.0));
  CHECK(u.min() == -2.0);
  CHECK(u.max() == 3.0);
  CHECK(u.max_abs() == 3.0);
  CHECK(u.integral() == doctest::Approx(1.0));
  CHECK(u.l1_norm() == doctest::Approx(2.0));
  CHECK(u.stddev() == doctest::Approx(std::sqrt((0.0 + 9.0 + 4.0 + 1.0) / 4.0)));
  CHECK(u.at(1, 0) == 3.0);
}

TEST_CASE("vector field magnitudes") {
  VectorField v(Shape::plane(1, 2, 2.0), {3.0, 0.0, 4.0, -1.0});
  CHECK(v.magnitude(0) == doctest::Approx(5.0));
  CHECK(v.magnitude(1) == doctest::Approx(1.0));
  CHECK(v.max_magnitude() == doctest::Approx(5.0));
  CHECK(v.l1_norm() == doctest::Approx(6.0 * 4.0));
}

TEST_CASE("regularization parameters") {
  CHECK_NOTHROW(RegParams{1.0, kInfinity}.validate());
  CHECK_NOTHROW(RegParams{kInfinity, 2.0}.validate());
  CHECK_THROWS_AS((RegParams{0.0, 1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((RegParams{1.0, -1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((RegParams{NAN, 1.0}.validate()), InvalidArgument);
  CHECK_FALSE(RegParams{kInfinity, 1.0}.lambda1_finite());
  CHECK(RegParams{1.0, kInfinity}.lambda1_finite());
}

TEST_CASE("discrete measure invariants") {
  DiscreteMeasure mu{{{0.0}, {1.0}, {3.0}}, {1.0, -2.5, 0.5}};
  CHECK_NOTHROW(mu.validate());
  CHECK(mu.total_mass() == doctest::Approx(-1.0));
  CHECK(mu.total_variation() == doctest::Approx(4.0));
  CHECK(mu.dim() == 1);

  DiscreteMeasure duplicate{{{0.0, 1.0}, {0.0, 1.0}}, {1.0, 1.0}};
  CHECK_THROWS_AS(duplicate.validate(), InvalidArgument);
  DiscreteMeasure zero_weight{{{0.0}, {1.0}}, {1.0, 0.0}};
  CHECK_THROWS_AS(zero_weight.validate(), InvalidArgument);
  DiscreteMeasure ragged{{{0.0}, {1.0, 2.0}}, {1.0, 1.0}};
  CHECK_THROWS_AS(ragged.validate(), InvalidArgument);
  DiscreteMeasure counts{{{0.0}}, {1.0, 1.0}};
  CHECK_THROWS_AS(counts.validate(), InvalidArgument);
}

TEST_CASE("total variation examples") {
  CHECK(tv_value(GridFunction(Shape::plane(5, 5), 3.0)) == 0.0);
  CHECK(tv_value(GridFunction(Shape::line(4), {0, 0, 1, 1})) == doctest::Approx(1.0));

  Rng rng(11);
  for (double h : {1.0, 0.3}) {
    const GridFunction u = testing::random_function(rng, Shape::plane(8, 8, h));
    CHECK(tv_value(u) == doctest::Approx(testing::reference_tv(u)).epsilon(1e-13));
  }
}

TEST_CASE("total variation is absolutely homogeneous and shift invariant") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s = trial % 2 ? Shape::plane(9, 6, 0.7) : Shape::line(17, 0.1);
    const GridFunction u = testing::random_function(rng, s);
    const double t = rng.uniform(-5.0, 5.0);
    const double c = rng.uniform(-10.0, 10.0);
    GridFunction scaled(s), shifted(s);
    for (std::size_t k = 0; k < u.size(); ++k) {
      scaled[k] = t * u[k];
      shifted[k] = u[k] + c;
    }
    const double tv = tv_value(u);
    CHECK(std::abs(tv_value(scaled) - std::abs(t) * tv) <= 1e-12 * (1.0 + std::abs(t) * tv));
    CHECK(std::abs(tv_value(shifted) - tv) <= 1e-11 * (1.0 + tv));
  }
}

TEST_CASE("primal objective examples") {
  Rng rng(13);
  const Shape s = Shape::plane(6, 5, 0.5);
  const GridFunction u0 = testing::random_function(rng, s);
  const RegParams lam{2.0, 3.0};
  const VectorField zero(s);

  CHECK(kr_tv_primal_objective(u0, zero, u0, lam) == doctest::Approx(tv_value(u0)).epsilon(1e-14));

  const double c = 0.75;
  GridFunction lifted = u0;
  for (double& v : lifted.values()) v += c;
  const double area = static_cast<double>(s.size()) * s.cell_volume();
  CHECK(kr_tv_primal_objective(lifted, zero, u0, lam) ==
        doctest::Approx(lam.lambda1 * c * area + tv_value(u0)).epsilon(1e-12));

  // Explicit re-summation with a random field.
  const GridFunction u = testing::random_function(rng, s);
  const VectorField nu = testing::random_field(rng, s);
  const GridFunction dnu = testing::reference_div(nu);
  double resid = 0.0, flux = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    resid += std::abs(u[k] - u0[k] - dnu[k]);
    flux += nu.magnitude(k);
  }
  const double expected = (lam.lambda1 * resid + lam.lambda2 * flux) * s.cell_volume() + testing::reference_tv(u);
  CHECK(kr_tv_primal_objective(u, nu, u0, lam) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(kr_tv_primal_objective(u, nu, GridFunction(Shape::plane(5, 6, 0.5)), lam), ShapeMismatch);
}

TEST_CASE("primal objective with infinite weights") {
  Rng rng(14);
  const Shape s = Shape::plane(5, 5);
  const GridFunction u0 = testing::random_function(rng, s);
  const VectorField nu = testing::random_field(rng, s);
  GridFunction u = u0;
  const GridFunction dnu = div(nu);
  for (std::size_t k = 0; k < s.size(); ++k) u[k] += dnu[k];

  const double finite = kr_tv_primal_objective(u, nu, u0, {kInfinity, 2.0});
  CHECK(finite == doctest::Approx(2.0 * nu.l1_norm() + tv_value(u)).epsilon(1e-12));

  GridFunction off = u;
  off[3] += 1e-3;
  CHECK(kr_tv_primal_objective(off, nu, u0, {kInfinity, 2.0}) == kInfinity);
  CHECK(kr_tv_primal_objective(u0, nu, u0, {1.0, kInfinity}) == kInfinity);
  CHECK(kr_tv_primal_objective(u0, VectorField(s), u0, {1.0, kInfinity}) == doctest::Approx(tv_value(u0)));
}

TEST_CASE("dual objective feasibility branches") {
  Rng rng(15);
  const Shape s = Shape::plane(6, 6);
  GridFunction u0 = testing::random_function(rng, s, 0.0, 1.0);
  const RegParams lam{1.0, 1.0};

  const DualEvaluation zero = kr_tv_dual_objective(GridFunction(s), u0, lam);
  CHECK(zero.feasible());
  CHECK(zero.value == 0.0);

  // A nonzero constant pairs with constants, so min_u <f, u> + TV(u) = -inf.
  const DualEvaluation constant = kr_tv_dual_objective(GridFunction(s, lam.lambda1), u0, lam);
  CHECK(constant.status == Feasibility::infeasible);
  CHECK(constant.value == -kInfinity);

  CHECK(kr_tv_dual_objective(GridFunction(s, 2.0), u0, lam).status == Feasibility::infeasible);

  // f = div phi with |phi| <= 1 and small gradient is feasible.
  VectorField phi = testing::random_field(rng, s, -0.05, 0.05);
  const GridFunction f = div(phi);
  const DualEvaluation with_witness = kr_tv_dual_objective(f, phi, u0, lam);
  REQUIRE(with_witness.feasible());
  double pairing = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) pairing += f[k] * u0[k];
  CHECK(with_witness.value == doctest::Approx(-pairing).epsilon(1e-12));

  const DualEvaluation searched = kr_tv_dual_objective(f, u0, lam);
  CHECK(searched.feasible());
  CHECK(searched.value == doctest::Approx(-pairing).epsilon(1e-12));

  GridFunction bad = f;
  bad[0] += 0.01;
  CHECK_FALSE(kr_tv_dual_objective(bad, phi, u0, lam).feasible());
}

TEST_CASE("weak duality on random feasible points") {
  Rng rng(16);
  const Shape s = Shape::plane(5, 4, 0.5);
  const GridFunction u0 = testing::random_function(rng, s);
  const RegParams lam{1.5, 0.8};
  for (int trial = 0; trial < 30; ++trial) {
    VectorField phi = testing::random_field(rng, s, -0.04, 0.04);
    const GridFunction f = div(phi);
    const DualEvaluation d = kr_tv_dual_objective(f, phi, u0, lam);
    if (!d.feasible()) continue;
    const GridFunction u = testing::random_function(rng, s);
    const VectorField nu = testing::random_field(rng, s);
    CHECK(kr_tv_primal_objective(u, nu, u0, lam) >= d.value);
    CHECK(kr_tv_primal_objective(u0, VectorField(s), u0, lam) >= d.value);
  }
}

TEST_CASE("divergence range check") {
  const Shape s = Shape::line(6);
  const RangeCheck yes = check_divergence_range(GridFunction(s, {0.5, -0.5, 0, 0, 0.25, -0.25}));
  CHECK(yes.status == Feasibility::feasible);
  REQUIRE(yes.phi.has_value());
  CHECK(yes.phi->max_magnitude() <= 1.0 + kFeasibilityTol);
  // Nonzero total is outside the range of div on a Neumann grid.
  CHECK(check_divergence_range(GridFunction(s, 0.1)).status == Feasibility::infeasible);
  // Partial sums reach 3 > 1, so no unit field has this divergence.
  CHECK(check_divergence_range(GridFunction(s, {3, 0, 0, 0, 0, -3})).status == Feasibility::infeasible);
}
