/// @file fluid.hpp
/// @brief Dictionary between planar mechanical states and fundamental forms:
/// forward/inverse maps, Euler and constraint residuals, geometric-flow
/// right-hand sides, the compressible curvature-transport law, and the
/// pointwise algebraic identification of velocity magnitudes.
///
/// Conventions: L = v^2 + p, M = -u v, N = u^2 + p (incompressible, unit
/// density); L = rho v^2 + p, M = -rho u v, N = rho u^2 + p with
/// p = rho^gamma / gamma (compressible). The Gauss curvature of the induced
/// geometry is kappa = L N - M^2 = p^2 + p q^2 with q^2 = u^2 + v^2.

#pragma once

#include <array>
#include <tuple>
#include <utility>

#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"

namespace wrinkle {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Incompressible planar state (unit density): velocity (u, v) and pressure p.
struct FluidState {
  ScalarField u, v, p;

  FluidState() = default;
  FluidState(ScalarField u_, ScalarField v_, ScalarField p_)
      : u(std::move(u_)), v(std::move(v_)), p(std::move(p_)) {
    require_same_grid(u.grid, v.grid, "FluidState");
    require_same_grid(u.grid, p.grid, "FluidState");
  }
  const Grid2D& grid() const { return u.grid; }
};

/// Compressible planar state with polytropic pressure p = rho^gamma / gamma.
struct CompressibleState {
  ScalarField rho, u, v;
  double gamma = 1.0;

  CompressibleState() = default;
  CompressibleState(ScalarField rho_, ScalarField u_, ScalarField v_,
                    double gamma_);
  const Grid2D& grid() const { return rho.grid; }
};

/// Symmetric Cauchy stress components per node.
struct StressField {
  ScalarField T11, T12, T22;

  StressField() = default;
  StressField(ScalarField a, ScalarField b, ScalarField c)
      : T11(std::move(a)), T12(std::move(b)), T22(std::move(c)) {
    require_same_grid(T11.grid, T12.grid, "StressField");
    require_same_grid(T11.grid, T22.grid, "StressField");
  }
  const Grid2D& grid() const { return T11.grid; }
};

/// Per-node triple (r1, r2, r3) of identified tensor-velocity combinations.
struct GromovTriple {
  ScalarField r1, r2, r3;

  GromovTriple() = default;
  GromovTriple(ScalarField a, ScalarField b, ScalarField c)
      : r1(std::move(a)), r2(std::move(b)), r3(std::move(c)) {
    require_same_grid(r1.grid, r2.grid, "GromovTriple");
    require_same_grid(r1.grid, r3.grid, "GromovTriple");
  }
  const Grid2D& grid() const { return r1.grid; }
};

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

/// "+" branch of p = -q^2/2 + sqrt(q^4 + 4 kappa)/2; the inverse of
/// kappa = p^2 + p q^2 on the branch p >= -q^2/2.
/// Throws NegativeDiscriminant if q^4 + 4 kappa < -tolerance.
double pressure_from_curvature_point(double q2, double kappa);

/// Unique positive root rho of kappa = rho^(2 gamma)/gamma^2
/// + q^2 rho^(gamma+1)/gamma. Closed form sqrt(kappa/(1+q^2)) for gamma = 1,
/// bisection otherwise. Throws NonpositiveCurvature if kappa <= 0.
double rho_from_kappa_point(double kappa, double q2, double gamma);

/// (U1, U2, P) with P = ((r1+r3) - sqrt((r1-r3)^2 + 4 r2^2))/2,
/// U1 = sqrt(r1 - P), U2 = sqrt(r3 - P); then U1*U2 = |r2|.
/// Throws NegativeRadicand when r1 - P or r3 - P is negative beyond rounding.
std::array<double, 3> gromov_point(double r1, double r2, double r3);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// (L, M, N) = (v^2 + p, -u v, u^2 + p); closures are propagated when present.
FundamentalForm lmn_from_fluid(const FluidState& s);

/// Per-node pressure_from_curvature_point.
ScalarField pressure_from_curvature(const ScalarField& q2,
                                    const ScalarField& kappa);

/// Velocity magnitudes: u^2 = (-(L-N) + sqrt((L-N)^2 + 4M^2))/2 and
/// v^2 = ((L-N) + sqrt(...))/2. Signs are the caller's burden.
std::pair<ScalarField, ScalarField> fluid_from_lmn(const FundamentalForm& ff);

/// Residuals of the conservative momentum balance and the divergence
/// constraint:
///   r1 = d1(u^2 + p) + d2(u v) + dt_u
///   r2 = d1(u v) + d2(v^2 + p) + dt_v
///   r3 = d1 u + d2 v
std::array<ScalarField, 3> euler_residual(const FluidState& s,
                                          const ScalarField& dt_u,
                                          const ScalarField& dt_v,
                                          int order = 2);

/// d11(u^2) + 2 d12(u v) + d22(v^2) + d11 p + d22 p per node.
ScalarField pressure_poisson_residual(const FluidState& s, int order = 2);

/// Right-hand sides of the induced evolution of the velocity field:
///   dt_u = G^1_22 L - 2 G^1_12 M + G^1_11 N
///   dt_v = G^2_22 L - 2 G^2_12 M + G^2_11 N
std::pair<ScalarField, ScalarField> geometric_flow_rhs(
    const FundamentalForm& ff, const ChristoffelField& G);

/// d1(rhs_u) + d2(rhs_v) of geometric_flow_rhs, by stencils.
ScalarField divergence_constraint_residual(const FundamentalForm& ff,
                                           const ChristoffelField& G,
                                           int order = 2);

/// (L, M, N) = (rho v^2 + p, -rho u v, rho u^2 + p), p = rho^gamma / gamma.
FundamentalForm lmn_from_compressible(const CompressibleState& s);

/// Velocity magnitudes from (L, M, N) at known density:
/// u^2 = [-(L-N) + sqrt((L-N)^2 + 4M^2)] / (2 rho), similarly v^2.
/// Throws NonpositiveDensity.
std::pair<ScalarField, ScalarField> compressible_from_lmn(
    const FundamentalForm& ff, const ScalarField& rho);

/// Per-node rho_from_kappa_point.
ScalarField rho_from_kappa(const ScalarField& kappa, const ScalarField& q2,
                           double gamma);

/// One explicit first-order upwind finite-volume step of the conservation law
/// dt w + div(velocity w) = 0 on w = sqrt(kappa / (1 + q^2)), with
/// zero-gradient ghost cells; returns kappa_new = w_new^2 (1 + q^2).
/// Throws CFLViolation if dt * max(|u|/h1, |v|/h2) > 0.5 and
/// NonpositiveCurvature if kappa <= 0 anywhere.
ScalarField kappa_transport_step(const ScalarField& kappa, const FluidState& s,
                                 double dt);
ScalarField kappa_transport_step(const ScalarField& kappa,
                                 const CompressibleState& s, double dt);

/// Per-node gromov_point.
std::tuple<ScalarField, ScalarField, ScalarField> gromov_identification(
    const GromovTriple& t);

/// Steady analytic test flow u = sin x1 cos x2, v = -cos x1 sin x2,
/// p = (cos 2x1 + cos 2x2)/4 + p_shift, with full analytic closures.
/// The default shift keeps p (hence kappa) strictly positive everywhere.
FluidState taylor_green_fixture(const Grid2D& grid, double p_shift = 1.0);

}  // namespace wrinkle
