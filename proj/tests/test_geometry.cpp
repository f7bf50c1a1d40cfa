/// @file test_geometry.cpp
/// @brief Oracle tests for metrics, Christoffel symbols, curvature, and
/// Gauss-Codazzi residuals.

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "wrinkle/geometry.hpp"

using namespace wrinkle;
using fixtures::centered_grid;
using fixtures::measured_order;

namespace {

// Max interior |kappa - kappa_exact| on the sphere chart at resolution n,
// metric tabulated (stencil derivatives only).
double sphere_kappa_error(int n, double R, int order) {
  // Exact nodal metric (closure tangents); kappa error then isolates the
  // Brioschi stencil order.
  const Grid2D g = centered_grid(n, 0.3 * R);
  Immersion im = Immersion::from_closure(g, fixtures::sphere_chart_closure(R));
  MetricField met = induced_metric(im);
  const ScalarField kappa = brioschi_curvature(met, order);
  double err = 0.0;
  for (int j = 2; j < g.ny - 2; ++j)
    for (int i = 2; i < g.nx - 2; ++i)
      err = std::max(err, std::abs(kappa.at(i, j) - 1.0 / (R * R)));
  return err;
}

}  // namespace

TEST_CASE("induced metric: flat and scaled planes") {
  const Grid2D g = centered_grid(9, 1.0);
  Immersion flat = Immersion::tabulate(
      g, [](double a, double b) { return Eigen::Vector3d(a, b, 0.0); });
  MetricField m = induced_metric(flat);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CHECK(m.g11.at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m.g12.at(i, j) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(m.g22.at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
    }

  Immersion scaled = Immersion::tabulate(
      g, [](double a, double b) { return Eigen::Vector3d(2 * a, 2 * b, 0.0); });
  MetricField ms = induced_metric(scaled);
  CHECK(ms.g11.at(3, 4) == doctest::Approx(4.0));
  CHECK(ms.g22.at(5, 2) == doctest::Approx(4.0));
  CHECK(ms.g12.at(4, 4) == doctest::Approx(0.0));
}

TEST_CASE("induced metric: rigid motion invariance") {
  const Grid2D g = centered_grid(9, 0.5);
  auto base = fixtures::sphere_chart_closure(2.0).y;
  Immersion im = Immersion::tabulate(g, base);
  Eigen::Matrix3d Rm =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized())
          .toRotationMatrix();
  Eigen::Vector3d tr(0.3, -1.2, 2.5);
  Immersion moved = Immersion::tabulate(
      g, [&](double a, double b) { return Rm * base(a, b) + tr; });
  MetricField m0 = induced_metric(im), m1 = induced_metric(moved);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CHECK(m1.g11.at(i, j) == doctest::Approx(m0.g11.at(i, j)).epsilon(1e-10));
      CHECK(m1.g12.at(i, j) ==
            doctest::Approx(m0.g12.at(i, j)).epsilon(1e-10).scale(1.0));
      CHECK(m1.g22.at(i, j) == doctest::Approx(m0.g22.at(i, j)).epsilon(1e-10));
    }
}

TEST_CASE("christoffel: constant metric vanishes; polar metric oracle") {
  const Grid2D g(21, 9, 0.05, 0.1, 1.0, 0.0);  // x1 in [1, 2]
  MetricField cm(ScalarField(g, 3.0), ScalarField(g, 0.5), ScalarField(g, 2.0));
  ChristoffelField G0 = christoffel(cm);
  CHECK(G0.c111.max_abs() == doctest::Approx(0.0));
  CHECK(G0.c222.max_abs() == doctest::Approx(0.0));

  MetricField polar = fixtures::polar_metric(g);
  ChristoffelField G = christoffel(polar);
  for (int j = 2; j < g.ny - 2; ++j)
    for (int i = 2; i < g.nx - 2; ++i) {
      const double x1 = g.x1(i);
      CHECK(G.c122.at(i, j) == doctest::Approx(-x1).epsilon(1e-8));
      CHECK(G.c212.at(i, j) == doctest::Approx(1.0 / x1).epsilon(1e-8));
      CHECK(std::abs(G.c111.at(i, j)) < 1e-10);
      CHECK(std::abs(G.c112.at(i, j)) < 1e-10);
      CHECK(std::abs(G.c211.at(i, j)) < 1e-10);
      CHECK(std::abs(G.c222.at(i, j)) < 1e-10);
    }
}

TEST_CASE("christoffel: scale invariance g -> c*g") {
  const Grid2D g(9, 9, 0.1, 0.1, 1.0, 0.0);
  MetricField polar = fixtures::polar_metric(g);
  MetricField scaled(
      ScalarField::tabulate(g, [](double a, double) { return 7.0 * 1.0 + 0.0 * a; }),
      ScalarField::tabulate(g, [](double, double) { return 0.0; }),
      ScalarField::tabulate(g, [](double a, double) { return 7.0 * a * a; }));
  ChristoffelField G1 = christoffel(polar), G2 = christoffel(scaled);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      CHECK(G2.c122.at(i, j) == doctest::Approx(G1.c122.at(i, j)).epsilon(1e-12));
      CHECK(G2.c212.at(i, j) == doctest::Approx(G1.c212.at(i, j)).epsilon(1e-12));
    }
}

TEST_CASE("brioschi: constant metric, polar metric, sphere polar metric") {
  const Grid2D g(15, 9, 0.05, 0.1, 1.0, 0.0);
  MetricField cm(ScalarField(g, 2.0), ScalarField(g, 0.3), ScalarField(g, 1.5));
  CHECK(brioschi_curvature(cm).max_abs() == doctest::Approx(0.0));

  // Flat polar metric: kappa = 0 to stencil order.
  CHECK(brioschi_curvature(fixtures::polar_metric(g)).max_abs_interior() < 1e-8);

  // Unit sphere metric with exact closures: kappa = 1 to rounding.
  const Grid2D gs(9, 9, 0.05, 0.05, 0.6, 0.0);
  ScalarField kappa = brioschi_curvature(fixtures::sphere_polar_metric(gs));
  for (int j = 0; j < gs.ny; ++j)
    for (int i = 0; i < gs.nx; ++i)
      CHECK(kappa.at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("riemann R1212: classical convention kappa = R1212/det g") {
  // kappa = R1212/det g = 1 on the unit sphere; the outer derivative of the
  // Christoffel fields is a stencil, so the error is O(h^2) and must shrink
  // by ~4x under grid doubling.
  auto max_err = [](int n) {
    const Grid2D g(n, 9, 0.64 / (n - 1), 0.08, 0.6, 0.0);
    MetricField sphere = fixtures::sphere_polar_metric(g);
    ScalarField R = riemann_R1212(sphere);
    double err = 0.0;
    for (int j = 2; j < g.ny - 2; ++j)
      for (int i = 2; i < g.nx - 2; ++i)
        err = std::max(err, std::abs(R.at(i, j) / sphere.det(i, j) - 1.0));
    return err;
  };
  const double e17 = max_err(17), e33 = max_err(33);
  CHECK(e17 < 2e-2);
  CHECK(measured_order(e17, e33) == doctest::Approx(2.0).epsilon(0.25));

  // Flat polar metric: R1212 = 0 to stencil order (O(h^2), h = 0.04).
  const Grid2D gp(17, 9, 0.04, 0.08, 1.0, 0.0);
  CHECK(riemann_R1212(fixtures::polar_metric(gp)).max_abs_interior() < 5e-3);

  // Constant metric: exactly 0.
  MetricField cm(ScalarField(gp, 2.0), ScalarField(gp, 0.3), ScalarField(gp, 1.5));
  CHECK(riemann_R1212(cm).max_abs() == doctest::Approx(0.0));
}

TEST_CASE("sphere chart: closure-mode forms satisfy Gauss exactly") {
  const double R = 1.7;
  const Grid2D g = centered_grid(17, 0.4 * R);
  Immersion im = Immersion::from_closure(g, fixtures::sphere_chart_closure(R));
  FundamentalForm ff = second_fundamental_form(im);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double lhs = ff.L.at(i, j) * ff.N.at(i, j) -
                         ff.M.at(i, j) * ff.M.at(i, j);
      CHECK(lhs == doctest::Approx(1.0 / (R * R)).epsilon(1e-12));
    }
}

TEST_CASE("sphere chart: Gauss/Codazzi residuals shrink at order 2") {
  const double R = 2.0;
  auto residuals = [&](int n) {
    const Grid2D g = centered_grid(n, 0.3 * R);
    Immersion im = Immersion::from_closure(g, fixtures::sphere_chart_closure(R));
    MetricField met = induced_metric(im);
    FundamentalForm ff = second_fundamental_form(im);
    ChristoffelField G = christoffel(met);
    auto [r1, r2] = codazzi_residual(ff, G);
    ScalarField gr = gauss_residual(ff, brioschi_curvature(met));
    return std::array<double, 3>{r1.max_abs_interior(), r2.max_abs_interior(),
                                 gr.max_abs_interior()};
  };
  auto c = residuals(33), f = residuals(65);
  for (int k = 0; k < 3; ++k) {
    const double order = measured_order(c[k], f[k]);
    CHECK(order > 1.7);
    CHECK(order < 2.9);  // superconvergence tolerated but not order loss
  }
}

TEST_CASE("sphere chart: Brioschi kappa converges at the stencil order") {
  SUBCASE("order 2") {
    const double e33 = sphere_kappa_error(33, 2.0, 2);
    const double e65 = sphere_kappa_error(65, 2.0, 2);
    const double e129 = sphere_kappa_error(129, 2.0, 2);
    CHECK(measured_order(e33, e65) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(measured_order(e65, e129) == doctest::Approx(2.0).epsilon(0.15));
  }
  SUBCASE("order 4") {
    const double e33 = sphere_kappa_error(33, 2.0, 4);
    const double e65 = sphere_kappa_error(65, 2.0, 4);
    CHECK(measured_order(e33, e65) == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("codazzi/gauss: trivial cases") {
  const Grid2D g = centered_grid(9, 1.0);
  // Constant (L, M, N) with flat (zero) Christoffel symbols -> residual 0.
  FundamentalForm ff(ScalarField(g, 1.0), ScalarField(g, 0.5),
                     ScalarField(g, 2.0));
  ChristoffelField G{ScalarField(g), ScalarField(g), ScalarField(g),
                     ScalarField(g), ScalarField(g), ScalarField(g)};
  auto [r1, r2] = codazzi_residual(ff, G);
  CHECK(r1.max_abs() == doctest::Approx(0.0));
  CHECK(r2.max_abs() == doctest::Approx(0.0));

  FundamentalForm unit(ScalarField(g, 1.0), ScalarField(g, 0.0),
                       ScalarField(g, 1.0));
  CHECK(gauss_residual(unit, ScalarField(g, 1.0)).max_abs() ==
        doctest::Approx(0.0));
}

TEST_CASE("error paths: degenerate surface and singular metric") {
  const Grid2D g = centered_grid(9, 1.0);
  Immersion bad = Immersion::tabulate(
      g, [](double a, double) { return Eigen::Vector3d(a, 0.0, 0.0); });
  CHECK_THROWS_AS(induced_metric(bad), DegenerateSurface);

  MetricField sing(ScalarField(g, 1.0), ScalarField(g, 1.0),
                   ScalarField(g, 1.0));  // det = 0
  CHECK_THROWS_AS(christoffel(sing), SingularMetric);
  CHECK_THROWS_AS(brioschi_curvature(sing), SingularMetric);
}

TEST_CASE("grid mismatch is rejected") {
  const Grid2D a = centered_grid(9, 1.0), b = centered_grid(11, 1.0);
  FundamentalForm ff(ScalarField(a, 1.0), ScalarField(a, 0.0),
                     ScalarField(a, 1.0));
  CHECK_THROWS_AS(gauss_residual(ff, ScalarField(b, 1.0)), GridMismatch);
}

TEST_CASE("stencils: exact on polynomials, boundary included") {
  const Grid2D g(11, 11, 0.1, 0.2, -0.3, 0.4);
  ScalarField f = ScalarField::tabulate(g, [](double a, double b) {
    return 1.0 + a - 2.0 * b + 0.5 * a * a + a * b - b * b;
  });
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double a = g.x1(i), b = g.x2(j);
      CHECK(deriv(f, i, j, fd::Part::d1) ==
            doctest::Approx(1.0 + a + b).epsilon(1e-10));
      CHECK(deriv(f, i, j, fd::Part::d2) ==
            doctest::Approx(-2.0 + a - 2.0 * b).epsilon(1e-10));
      CHECK(deriv(f, i, j, fd::Part::d11) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(deriv(f, i, j, fd::Part::d12) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(deriv(f, i, j, fd::Part::d22) == doctest::Approx(-2.0).epsilon(1e-9));
    }
  // Order-4 stencils are exact on quartics.
  ScalarField q = ScalarField::tabulate(
      g, [](double a, double b) { return a * a * a * a + b * b * b * a; });
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double a = g.x1(i), b = g.x2(j);
      CHECK(deriv(q, i, j, fd::Part::d1, 4) ==
            doctest::Approx(4 * a * a * a + b * b * b).epsilon(1e-8));
      CHECK(deriv(q, i, j, fd::Part::d22, 4) ==
            doctest::Approx(6 * b * a).epsilon(1e-8));
    }
}
