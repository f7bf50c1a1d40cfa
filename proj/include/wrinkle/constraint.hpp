/// @file constraint.hpp
/// @brief Initial-data machinery on the rotated chart: the g12 line ODE, the
/// second-order coefficient matrix and its non-degeneracy test, explicit
/// Cauchy marching of the metric off a non-characteristic line, the five
/// constraint residuals, and the shear-flow symbol degeneracy check.
///
/// Rotated chart convention: (s, tau) = (x1 + x2, x1 - x2) relative to a
/// center point, so d/dx1 = d/ds + d/dtau and d/dx2 = d/ds - d/dtau. Metric
/// components always refer to the original (x1, x2) index pair; only the
/// sample coordinates rotate.
///
/// Sign convention for the tangential-derivative solve: inverting the 2x2
/// system that the Codazzi equations impose on (d1 g12, d2 g12) gives
///   d1 g12 = -[g12 W1 + g22 W2] / N,   d2 g12 = -[g11 W1 + g12 W2] / L,
/// with W1 = (d1 N - d2 M) + G1/det g and W2 = (-d1 M + d2 L) + G2/det g.
/// (The overall sign is fixed by the identity-metric limit and is validated
/// against an exact surface in the tests.)

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"

namespace wrinkle {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Affine rotation between original coordinates (x1, x2) and chart
/// coordinates (s, tau) = (x1 - c1 + x2 - c2, x1 - c1 - (x2 - c2)).
struct RotatedChart {
  double c1 = 0.0, c2 = 0.0;

  std::pair<double, double> to_original(double s, double tau) const {
    return {c1 + 0.5 * (s + tau), c2 + 0.5 * (s - tau)};
  }
  std::pair<double, double> to_rotated(double x1, double x2) const {
    return {(x1 - c1) + (x2 - c2), (x1 - c1) - (x2 - c2)};
  }
};

/// Rewrite a closure given in original coordinates as a closure in rotated
/// chart coordinates (including exact first/second derivatives).
ScalarClosure cl_rotate(const ScalarClosure& orig, const RotatedChart& chart);

/// Samples of the Cauchy data along the initial line s = s0 (the first grid
/// column): metric components and their s-derivatives for the 11/22 entries.
struct InitialLineData {
  std::vector<double> g11, g12, g22, ds_g11, ds_g22;
};

/// 2x2 coefficient matrix of the second-order system, per node, plus its
/// determinant (which must match -M (N + L - 2M) / (2 L N)).
struct CoefficientMatrixField {
  ScalarField a11, a12, a21, a22, det;
};

/// Result of the explicit marching: metric samples on the chart grid, filled
/// for the first `levels` s-columns (the rest keep the initial line values),
/// plus the strip actually reached.
struct MarchResult {
  MetricField g;
  int levels = 0;        ///< number of s-columns with valid data (>= 1)
  double width = 0.0;    ///< s-extent reached
  bool truncated = false;
};

/// Optional marching controls, including manufactured-solution forcing terms
/// (callbacks in rotated coordinates) added to the curvature equation, the
/// cross-derivative consistency equation, and the g12 evolution respectively.
struct MarchOptions {
  int order = 2;
  bool filter = true;
  std::function<double(double, double)> f1, f2, f3;
};

/// Residuals of the five constraint equations:
///   c1: d1 U + d2 V
///   c2: d1(G^1_22 L - 2 G^1_12 M + G^1_11 N) + d2(G^2_22 L - ...)
///   c3: d1 N - d2 M + G^1_22 L - 2 G^1_12 M + G^1_11 N
///   c4: d1 M - d2 L - G^2_22 L + 2 G^2_12 M - G^2_11 N
///   c5: L N - M^2 - kappa(g)
struct ConstraintResiduals {
  ScalarField c1, c2, c3, c4, c5;
};

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

/// Tangential-derivative solve: (d1 g12, d2 g12) from the metric jet's values
/// and 11/22 first derivatives plus form values and their combinations
/// r = d1 N - d2 M and st = -d1 M + d2 L.
std::pair<double, double> g12_tangential_derivatives(
    double g11, double g12, double g22, double d1g11, double d2g11,
    double d1g22, double d2g22, double L, double M, double N, double r,
    double st);

/// Coefficient matrix entries at one node; throws DivisionByZeroForm when
/// |L| or |N| < 1e-10.
std::array<double, 4> coefficient_matrix_point(double L, double M, double N);

/// Determinant of the shear-flow second-order symbol at direction (xi1, xi2);
/// identically zero for all admissible (u^2, p).
double shear_symbol_determinant(double u2, double p, double xi1, double xi2);

/// Map a metric jet whose derivatives were taken in rotated chart
/// coordinates (d1 ~ d/ds, d2 ~ d/dtau) to original-coordinate derivatives.
MetricJet rotate_jet_to_original(const MetricJet& rotated);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Integrate the line ODE for g12 along tau on the first grid column, from
/// the node nearest tau = 0 (where g12 = 0) in both directions, by RK4.
/// Throws DivisionByZeroForm when |L| or |N| drops below 1e-10 on the line.
std::vector<double> g12_initial_ode(const FundamentalForm& ff);

/// Full Cauchy data for the default prescription g11 = g22 = 1,
/// ds g11 = ds g22 = 0, and g12 from the line ODE.
InitialLineData default_initial_line(const FundamentalForm& ff);

/// Coefficient matrix field of the second-order system assembled from
/// (L, M, N), with determinant.
CoefficientMatrixField coefficient_matrix(const FundamentalForm& ff);

/// 1.0 where kappa > tol, |M| > tol (relative to sup-norms), and p > 0;
/// 0.0 elsewhere.
ScalarField noncharacteristic_check(const FundamentalForm& ff,
                                    const ScalarField& kappa,
                                    const ScalarField& p);

/// Explicit midpoint marching of (g11, g22, g12, ds g11, ds g22) in s from
/// the first grid column, `steps` columns forward. The per-node curvatures
/// and cross-derivative consistency determine (dss g11, dss g22) through an
/// affine 2x2 solve; g12 moves by its tangential-derivative equation. The
/// grid must satisfy h1 <= h2 / 4 (marching step ratio). Truncates the strip
/// if the metric loses positivity; throws DegenerateSymbol when the
/// coefficient matrix is singular on the initial line.
MarchResult march_metric(const InitialLineData& line,
                         const FundamentalForm& ff, int steps,
                         const MarchOptions& opt = {});

/// The five constraint residuals; set `rotated_chart` when the fields are
/// sampled in rotated coordinates (derivatives are mapped accordingly).
ConstraintResiduals constraint_residuals(const FundamentalForm& ff,
                                         const MetricField& g,
                                         bool rotated_chart = false,
                                         int order = 2);

}  // namespace wrinkle
