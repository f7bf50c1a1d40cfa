/// @file developable.hpp
/// @brief Developable shear surfaces y = (A x2, A x1, f(x2)), their flat
/// target metric g* = diag(A^2, (f')^2 + A^2), shortness margins, and the
/// membrane energy functional.
///
/// The slope f' solves the profile equation
///   -f''(x2) = u(x2)^2 ((f'(x2))^2 + A^2),   f'(0) = 0,
/// integrated by RK4 from the origin; for constant u = c the closed form is
/// f'(x2) = -A tan(A c^2 x2), which blows up in finite range. Integration is
/// guarded at |f'| = 10 A and reports the reached interval on blow-up.

#pragma once

#include <functional>
#include <utility>

#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"

namespace wrinkle {

/// Shear profile u(x2) with the chart stretch factor A > 1.
struct ShearProfile {
  std::function<double(double)> u;
  double A = 2.0;

  ShearProfile(std::function<double(double)> u_, double A_);
};

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

/// (f, f') at x2, integrated from f(0) = f'(0) = 0 by RK4 with fixed
/// substeps. Throws ProfileBlowup (reporting the reached coordinate) if
/// |f'| crosses 10 A before x2.
std::pair<double, double> shear_slope_point(const ShearProfile& sp, double x2);

/// Minimum eigenvalue of the symmetric matrix [[a, b], [b, c]].
double min_eigenvalue_sym(double a, double b, double c);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Slope field f'(x2) on a grid (constant along x1), with exact first/second
/// x2-derivative callbacks from the profile equation.
ScalarField shear_profile_slope(const ShearProfile& sp, const Grid2D& g);

/// The surface y = (A x2, A x1, f(x2)) with analytic derivative closures.
/// Its induced metric is g*, its curvature vanishes, and its normalized
/// second fundamental form is (0, 0, u^2).
Immersion shear_surface(const ShearProfile& sp, const Grid2D& g);

/// Closed-form target metric g* = (A^2, 0, (f')^2 + A^2) with closures; no
/// surface construction.
MetricField gstar_metric(const ShearProfile& sp, const Grid2D& g);

/// Per-node minimum eigenvalue of (gstar - g); the immersion induced by
/// gstar is short relative to g wherever the margin is positive.
ScalarField shortness_margin(const MetricField& g, const MetricField& gstar);

/// Membrane energy E = integral of (g11 + g22) by the trapezoid rule over
/// the whole grid rectangle.
double energy(const MetricField& g);

/// Energy of an immersion through its induced metric.
double energy(const Immersion& y);

}  // namespace wrinkle
