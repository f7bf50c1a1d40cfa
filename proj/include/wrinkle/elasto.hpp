/// @file elasto.hpp
/// @brief Continuum-mechanics extension of the fluid dictionary: stress-based
/// fundamental forms, Neo-Hookean constitutive evaluation, shear traveling
/// waves with steadiness classification, degenerate-image field construction,
/// manifold-to-mechanics integration, and constrained-system residuals.
///
/// Conventions: L = rho v^2 - T22, M = -rho u v + T12, N = rho u^2 - T11, so
/// the hydrostatic stress T = -p Id reproduces the fluid dictionary
/// (L, M, N) = (rho v^2 + p, -rho u v, rho u^2 + p) exactly. The reference
/// density is spatially constant and det F > 0 is required throughout.

#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "wrinkle/fluid.hpp"
#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"

namespace wrinkle {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Planar motion x(X, t) given by analytic closures on the reference chart.
/// All callbacks take (X1, X2, t). Second derivatives (accelerations and
/// reference Laplacians) are carried analytically so wave-equation residuals
/// are free of differencing error.
struct Motion {
  using Fn = std::function<double(double, double, double)>;
  Fn x1, x2;                      ///< current positions
  Fn F11, F12, F21, F22;          ///< deformation gradient dx_i/dX_j
  Fn v1, v2;                      ///< material velocity dx_i/dt
  Fn a1, a2;                      ///< material acceleration d^2 x_i/dt^2
  Fn lap1, lap2;                  ///< reference Laplacian of x_i
  /// Closed-form inverse (x1, x2, t) -> (X1, X2) when the ansatz provides
  /// one; steadiness classification requires it.
  std::function<std::array<double, 2>(double, double, double)> invert;
};

/// Traveling-wave profile w with its first two derivatives.
struct WaveProfile {
  std::function<double(double)> w, wp, wpp;
};

/// Deformation gradient per node with a constant reference density;
/// the current density is rho = rho0 / det F.
struct DeformationState {
  ScalarField F11, F12, F21, F22;
  double rho0 = 1.0;

  DeformationState(ScalarField a, ScalarField b, ScalarField c, ScalarField d,
                   double rho0_ = 1.0);
  const Grid2D& grid() const { return F11.grid; }
  double det(int i, int j) const {
    return F11.at(i, j) * F22.at(i, j) - F12.at(i, j) * F21.at(i, j);
  }
  /// rho = rho0 / det F per node.
  ScalarField density() const;
};

/// Density-velocity triple at one time level.
struct ContinuumState {
  ScalarField rho, u, v;
};

/// Velocity trace of the material points occupying a fixed spatial point.
struct SteadinessReport {
  std::vector<std::array<double, 2>> trace;  ///< (u, v) per requested time
  double max_variation = 0.0;                ///< sup over components and times
  bool is_steady = false;                    ///< max_variation < 1e-10
};

/// Pointwise tensor rule for the identification equation: maps the symmetric
/// argument (a11, a12, a22) = rho u (x) u - T to a symmetric (f11, f12, f22).
using TensorRule =
    std::function<std::array<double, 3>(double, double, double)>;

/// Adjugate rule f(A) = adj A = [[a22, -a12], [-a12, a11]]; with
/// A = rho u (x) u - T this reproduces the (L, M, N) identification exactly,
/// so the fluid specialization recovers the incompressible residuals.
std::array<double, 3> adjugate_rule(double a11, double a12, double a22);

/// Identity rule f(A) = A.
std::array<double, 3> identity_rule(double a11, double a12, double a22);

/// Named residual fields of the constrained evolution system, evaluated in
/// its steady form (time-derivative terms zero).
struct ConstrainedResiduals {
  ScalarField mass;          ///< d1(rho u) + d2(rho v)
  ScalarField momentum1;     ///< d1(rho u^2 - T11) + d2(rho u v - T12)
  ScalarField momentum2;     ///< d1(rho u v - T12) + d2(rho v^2 - T22)
  ScalarField deformation;   ///< max over ij of |v . grad F_ij - (Lv F)_ij|
  ScalarField codazzi1, codazzi2, gauss;
  ScalarField ident11, ident12, ident22;  ///< [L M; M N] - f(rho u(x)u - T)
};

/// Momentum/density/velocity time series integrated from manifold data, plus
/// the internal consistency gap max |(m_u, m_v) - (rho u, rho v)|.
struct ManifoldMechanics {
  std::vector<double> times;
  std::vector<ContinuumState> states;
  double consistency_gap = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// (L, M, N) = (rho v^2 - T22, -rho u v + T12, rho u^2 - T11).
FundamentalForm lmn_from_stress(const ScalarField& rho, const ScalarField& u,
                                const ScalarField& v, const StressField& T);

/// det T + 2 rho u v T12 - rho v^2 T11 - rho u^2 T22; positive values mark
/// states whose induced geometry has positive Gauss curvature.
ScalarField positivity_condition(const ScalarField& rho, const ScalarField& u,
                                 const ScalarField& v, const StressField& T);

/// Neo-Hookean Cauchy stress T = rho F F^T with rho = rho0 / det F.
StressField neo_hookean_stress(const DeformationState& ds);

/// Shearing ansatz x1 = X1 + w(X2 + s1 t), x2 = X2 + s2 t for signs
/// s1, s2 in {+1, -1}; F = [[1, w'], [0, 1]], det F = 1, and the closed-form
/// inverse is attached. Throws ValidationError on missing profile callbacks
/// or signs other than +-1.
Motion traveling_wave_motion(const WaveProfile& w, int s1, int s2);

/// Residuals of the three steady Neo-Hookean equations plus the caveat:
///   r1 = (dx2/dt)^2 - |grad x2|^2
///   r2 = (dx1/dt)^2 - |grad x1|^2 + (J / |grad x2|)^2
///   r3 = Z(x2, t) |grad x2|^2 / rho0 + J       (J = det F)
///   caveat = (dx1/dt)(dx2/dt) - grad x1 . grad x2
/// evaluated on the reference grid at time t. Z defaults to the constant
/// -rho0 when the callback is empty.
std::array<ScalarField, 4> es2_residual(
    const Motion& m, const Grid2D& g, double t,
    const std::function<double(double, double)>& Z = nullptr,
    double rho0 = 1.0);

/// (d^2 x_i/dt^2 - Laplacian_X x_i) for i = 1, 2 from the analytic closures.
std::pair<ScalarField, ScalarField> wave_equation_residual(const Motion& m,
                                                           const Grid2D& g,
                                                           double t);

/// Sample the material velocity of whichever particle occupies the fixed
/// spatial point x0 at each requested time, via the motion's closed-form
/// inverse. Steady iff the trace varies by less than 1e-10.
SteadinessReport current_config_steadiness(const Motion& m,
                                           const std::array<double, 2>& x0,
                                           const std::vector<double>& times);

/// Degenerate-image fields: rho = rho1 t + rho2 and velocities integrated
/// from rho u_t = -rho1 u (RK4 per node), which keeps the momenta rho u,
/// rho v constant in time. Throws NonpositiveDensity (reporting the time) if
/// rho <= 0 anywhere over the requested times.
std::vector<ContinuumState> degenerate_continuum_fields(
    const ScalarField& rho1, const ScalarField& rho2, const ScalarField& u0,
    const ScalarField& v0, const std::vector<double>& times,
    int substeps = 64);

/// Integrate momenta from time-dependent manifold data (RK4 over `steps`
/// uniform steps to t_end):
///   dt m_u = G^1_22 L - 2 G^1_12 M + G^1_11 N   (same for m_v with G^2),
///   dt rho = -(d1 m_u + d2 m_v),
/// then re-integrate (u, v) with the momenta replaced by (rho u, rho v) and
/// report the gap max |(m_u, m_v) - (rho u, rho v)|. Throws
/// NonpositiveDensity if rho crosses zero.
ManifoldMechanics mechanics_from_manifold(
    const std::function<ChristoffelField(double)>& Gamma,
    const std::function<FundamentalForm(double)>& lmn,
    const ScalarField& rho0, const ScalarField& u0, const ScalarField& v0,
    double t_end, int steps, int order = 2);

/// Evaluate the steady constrained-system residuals for given fields: four
/// mechanical (mass, two momenta, deformation-gradient transport with the
/// velocity gradient taken by stencils on the shared grid), three geometric
/// (Codazzi pair and Gauss), and the tensorial identification under `rule`.
/// No solving.
ConstrainedResiduals constrained_system_residual(
    const ContinuumState& s, const DeformationState& F, const MetricField& g,
    const FundamentalForm& ff, const StressField& T,
    const TensorRule& rule = adjugate_rule, int order = 2);

}  // namespace wrinkle
