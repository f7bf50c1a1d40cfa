/// @file fixtures.hpp
/// @brief Shared analytic fixtures for the test suites.

#pragma once

#include <cmath>

#include "wrinkle/geometry.hpp"

namespace fixtures {

using wrinkle::Grid2D;
using wrinkle::Immersion;
using wrinkle::ImmersionClosure;
using wrinkle::MetricField;
using wrinkle::ScalarClosure;
using wrinkle::ScalarField;

/// Graph chart of the sphere of radius R: y = (x1, x2, sqrt(R^2 - x1^2 - x2^2)),
/// with exact derivative callbacks. kappa = 1/R^2 on the whole chart.
inline ImmersionClosure sphere_chart_closure(double R) {
  auto phi = [R](double a, double b) { return std::sqrt(R * R - a * a - b * b); };
  ImmersionClosure c;
  c.y = [phi](double a, double b) { return Eigen::Vector3d(a, b, phi(a, b)); };
  c.d1 = [phi](double a, double b) {
    return Eigen::Vector3d(1.0, 0.0, -a / phi(a, b));
  };
  c.d2 = [phi](double a, double b) {
    return Eigen::Vector3d(0.0, 1.0, -b / phi(a, b));
  };
  c.d11 = [phi, R](double a, double b) {
    const double w = phi(a, b);
    return Eigen::Vector3d(0.0, 0.0, -(R * R - b * b) / (w * w * w));
  };
  c.d12 = [phi](double a, double b) {
    const double w = phi(a, b);
    return Eigen::Vector3d(0.0, 0.0, -a * b / (w * w * w));
  };
  c.d22 = [phi, R](double a, double b) {
    const double w = phi(a, b);
    return Eigen::Vector3d(0.0, 0.0, -(R * R - a * a) / (w * w * w));
  };
  return c;
}

/// Chart grid centered at the origin covering [-s, s]^2 (kept well inside the
/// sphere chart for R >= 1).
inline Grid2D centered_grid(int n, double s) {
  return Grid2D::covering(n, n, 2.0 * s, 2.0 * s, -s, -s);
}

/// Round-sphere chart metric g = diag(1, sin^2 x1) with exact closures
/// (unit sphere in geodesic polar coordinates; kappa = 1).
inline MetricField sphere_polar_metric(const Grid2D& g) {
  ScalarClosure one;
  one.f = [](double, double) { return 1.0; };
  one.f1 = one.f2 = one.f11 = one.f12 = one.f22 =
      [](double, double) { return 0.0; };
  ScalarClosure zero = one;
  zero.f = [](double, double) { return 0.0; };
  ScalarClosure g22;
  g22.f = [](double a, double) { const double s = std::sin(a); return s * s; };
  g22.f1 = [](double a, double) { return std::sin(2.0 * a); };
  g22.f2 = [](double, double) { return 0.0; };
  g22.f11 = [](double a, double) { return 2.0 * std::cos(2.0 * a); };
  g22.f12 = g22.f22 = [](double, double) { return 0.0; };
  return MetricField(ScalarField::from_closure(g, one),
                     ScalarField::from_closure(g, zero),
                     ScalarField::from_closure(g, g22));
}

/// Flat polar-like metric g = diag(1, x1^2), tabulated (no closures).
inline MetricField polar_metric(const Grid2D& g) {
  return MetricField(
      ScalarField::tabulate(g, [](double, double) { return 1.0; }),
      ScalarField::tabulate(g, [](double, double) { return 0.0; }),
      ScalarField::tabulate(g, [](double a, double) { return a * a; }));
}

/// Convergence order from two max-errors under grid doubling.
inline double measured_order(double coarse_err, double fine_err) {
  return std::log2(coarse_err / fine_err);
}

}  // namespace fixtures
