/// @file geometry.hpp
/// @brief Differential-geometry primitives on gridded 2D metrics and immersed
/// surfaces: metrics, Christoffel symbols, curvature, fundamental forms, and
/// Gauss-Codazzi residuals.
///
/// Conventions:
///  - the second fundamental form (L, M, N) is always stored in the
///    normalized convention, i.e. divided by sqrt(det g);
///  - the Gauss curvature satisfies kappa = L*N - M^2 = R1212 / det g
///    (classical convention, cross-validated numerically);
///  - derivative-consuming operations prefer analytic closures when present.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "wrinkle/grid.hpp"
#include "wrinkle/stencil.hpp"

namespace wrinkle {

inline constexpr double kDetFloor = 1e-12;  ///< det g floor before SingularMetric

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Symmetric positive-definite 2x2 tensor field (g11, g12, g22).
struct MetricField {
  ScalarField g11, g12, g22;

  MetricField() = default;
  MetricField(ScalarField a, ScalarField b, ScalarField c)
      : g11(std::move(a)), g12(std::move(b)), g22(std::move(c)) {
    require_same_grid(g11.grid, g12.grid, "MetricField");
    require_same_grid(g11.grid, g22.grid, "MetricField");
  }

  const Grid2D& grid() const { return g11.grid; }
  double det(int i, int j) const {
    return g11.at(i, j) * g22.at(i, j) - g12.at(i, j) * g12.at(i, j);
  }
  /// Throws SingularMetric if det g < kDetFloor anywhere.
  void require_spd(const char* where) const;
};

/// Christoffel symbols of a 2D metric; cKIJ stores Gamma^K_IJ.
struct ChristoffelField {
  ScalarField c111, c112, c122, c211, c212, c222;
  const Grid2D& grid() const { return c111.grid; }
};

/// Normalized second-fundamental-form triple (L, M, N).
struct FundamentalForm {
  ScalarField L, M, N;

  FundamentalForm() = default;
  FundamentalForm(ScalarField l, ScalarField m, ScalarField n)
      : L(std::move(l)), M(std::move(m)), N(std::move(n)) {
    require_same_grid(L.grid, M.grid, "FundamentalForm");
    require_same_grid(L.grid, N.grid, "FundamentalForm");
  }
  const Grid2D& grid() const { return L.grid; }
};

/// Analytic closure for an immersion y(x1, x2) in R^3.
struct ImmersionClosure {
  using VFn = std::function<Eigen::Vector3d(double, double)>;
  VFn y, d1, d2, d11, d12, d22;
};

/// Map y: grid -> R^3 with derivative access (analytic closure, stored exact
/// tangent fields, or central stencils of the tabulated positions).
struct Immersion {
  Grid2D grid;
  std::vector<Eigen::Vector3d> y;
  std::optional<ImmersionClosure> closure;
  int order = 2;  ///< stencil order when differentiating tabulated values
  /// Optional stored tangent fields; kept in sync analytically by producers
  /// (convex-integration engine). Preferred over stencils when non-empty.
  std::vector<Eigen::Vector3d> t1, t2;

  const Eigen::Vector3d& at(int i, int j) const { return y[grid.index(i, j)]; }
  Eigen::Vector3d& at(int i, int j) { return y[grid.index(i, j)]; }
  bool has_tangents() const { return !t1.empty() && !t2.empty(); }

  Eigen::Vector3d d1(int i, int j) const;
  Eigen::Vector3d d2(int i, int j) const;
  Eigen::Vector3d d11(int i, int j) const;
  Eigen::Vector3d d12(int i, int j) const;
  Eigen::Vector3d d22(int i, int j) const;

  static Immersion tabulate(const Grid2D& g, const ImmersionClosure::VFn& fn,
                            int order = 2);
  static Immersion from_closure(const Grid2D& g, ImmersionClosure c,
                                int order = 2);
};

// ---------------------------------------------------------------------------
// Pointwise kernels (single source of truth, reused by the marching scheme)
// ---------------------------------------------------------------------------

/// Metric components with first (and optionally second) derivatives at a point.
struct MetricJet {
  double g11 = 0, g12 = 0, g22 = 0;
  double d1g11 = 0, d2g11 = 0, d1g12 = 0, d2g12 = 0, d1g22 = 0, d2g22 = 0;
  double d11g11 = 0, d12g11 = 0, d22g11 = 0;
  double d11g12 = 0, d12g12 = 0, d22g12 = 0;
  double d11g22 = 0, d12g22 = 0, d22g22 = 0;

  double det() const { return g11 * g22 - g12 * g12; }
};

/// Christoffel symbol values at a point.
struct ChristoffelValues {
  double c111 = 0, c112 = 0, c122 = 0, c211 = 0, c212 = 0, c222 = 0;
};

/// Christoffel symbols from metric components and first derivatives.
ChristoffelValues christoffel_point(const MetricJet& m);

/// Gauss curvature via Brioschi's two 3x3 determinants.
double brioschi_point(const MetricJet& m);

/// Gather a closure/stencil-aware jet of a MetricField at node (i, j).
MetricJet metric_jet(const MetricField& g, int i, int j, int order = 2,
                     bool second = true);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// g_ij = d_i y . d_j y. Throws DegenerateSurface if det g <= 0 anywhere.
MetricField induced_metric(const Immersion& y);

/// Normalized (L, M, N) = (n . d11 y, n . d12 y, n . d22 y) / sqrt(det g).
FundamentalForm second_fundamental_form(const Immersion& y);

/// All six Christoffel symbols of an SPD metric.
ChristoffelField christoffel(const MetricField& g, int order = 2);

/// Gauss curvature from the metric alone (Brioschi).
ScalarField brioschi_curvature(const MetricField& g, int order = 2);

/// R1212 component of the Riemann tensor; kappa = R1212 / det g.
ScalarField riemann_R1212(const MetricField& g, int order = 2);

/// Residuals of the two Codazzi equations:
///   r1 = d1 N - d2 M + G^1_22 L - 2 G^1_12 M + G^1_11 N
///   r2 = d1 M - d2 L - G^2_22 L + 2 G^2_12 M - G^2_11 N
std::pair<ScalarField, ScalarField> codazzi_residual(const FundamentalForm& ff,
                                                     const ChristoffelField& G,
                                                     int order = 2);

/// Residual of the Gauss equation: L N - M^2 - kappa.
ScalarField gauss_residual(const FundamentalForm& ff, const ScalarField& kappa);

}  // namespace wrinkle
