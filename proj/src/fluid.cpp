#include "wrinkle/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "wrinkle/closure_algebra.hpp"

namespace wrinkle {

namespace {

// Pointwise product of two fields; the closure (with exact derivatives) is
// propagated when both factors carry one.
ScalarField mul_fields(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "mul_fields");
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = a.v[k] * b.v[k];
  if (a.closure && b.closure) out.closure = cl_mul(*a.closure, *b.closure);
  return out;
}

ScalarField add_fields(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "add_fields");
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = a.v[k] + b.v[k];
  if (a.closure && b.closure) out.closure = cl_add(*a.closure, *b.closure);
  return out;
}

ScalarField scale_field(const ScalarField& a, double s) {
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = s * a.v[k];
  if (a.closure) out.closure = cl_scale(*a.closure, s);
  return out;
}

// Velocity-magnitude-squared pair from the form invariants: trace difference
// d = L - N and s = sqrt(d^2 + 4 M^2) give u^2 = (s - d)/2, v^2 = (s + d)/2.
std::pair<double, double> uv_squared(double L, double M, double N) {
  const double d = L - N;
  const double s = std::sqrt(d * d + 4.0 * M * M);
  return {std::max(0.0, 0.5 * (s - d)), std::max(0.0, 0.5 * (s + d))};
}

double pressure_of_rho(double rho, double gamma) {
  return std::pow(rho, gamma) / gamma;
}

// kappa as a (strictly increasing) function of rho at fixed q^2 and gamma.
double kappa_of_rho(double rho, double q2, double gamma) {
  const double p = pressure_of_rho(rho, gamma);
  return p * p + p * q2 * rho;  // p^2 + q^2 rho^(gamma+1)/gamma
}

// One upwind finite-volume step for dt w + div(velocity w) = 0 with
// zero-gradient ghost cells; face velocities are arithmetic averages.
ScalarField upwind_step(const ScalarField& w, const ScalarField& u,
                        const ScalarField& v, double dt) {
  const Grid2D& g = w.grid;
  double cmax = 0.0;
  for (std::size_t k = 0; k < w.v.size(); ++k)
    cmax = std::max(cmax, std::max(std::abs(u.v[k]) / g.h1,
                                   std::abs(v.v[k]) / g.h2));
  if (dt * cmax > 0.5 + 1e-14)
    throw CFLViolation("kappa_transport_step: dt * max(|u|/h1, |v|/h2) = " +
                       std::to_string(dt * cmax) + " exceeds 0.5");

  auto clampi = [](int a, int lo, int hi) { return std::min(std::max(a, lo), hi); };
  auto flux = [](double a, double wl, double wr) {
    return a > 0.0 ? a * wl : a * wr;
  };

  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int il = clampi(i - 1, 0, g.nx - 1), ir = clampi(i + 1, 0, g.nx - 1);
      const int jl = clampi(j - 1, 0, g.ny - 1), jr = clampi(j + 1, 0, g.ny - 1);
      const double ae = 0.5 * (u.at(i, j) + u.at(ir, j));
      const double aw = 0.5 * (u.at(il, j) + u.at(i, j));
      const double an = 0.5 * (v.at(i, j) + v.at(i, jr));
      const double as = 0.5 * (v.at(i, jl) + v.at(i, j));
      const double fe = flux(ae, w.at(i, j), w.at(ir, j));
      const double fw = flux(aw, w.at(il, j), w.at(i, j));
      const double fn = flux(an, w.at(i, j), w.at(i, jr));
      const double fs = flux(as, w.at(i, jl), w.at(i, j));
      out.at(i, j) =
          w.at(i, j) - dt / g.h1 * (fe - fw) - dt / g.h2 * (fn - fs);
    }
  }
  return out;
}

ScalarField kappa_step_uv(const ScalarField& kappa, const ScalarField& u,
                          const ScalarField& v, double dt) {
  require_same_grid(kappa.grid, u.grid, "kappa_transport_step");
  ScalarField w(kappa.grid), one_q2(kappa.grid);
  for (std::size_t k = 0; k < kappa.v.size(); ++k) {
    if (!(kappa.v[k] > 0.0))
      throw NonpositiveCurvature(
          "kappa_transport_step: kappa must be positive everywhere");
    one_q2.v[k] = 1.0 + u.v[k] * u.v[k] + v.v[k] * v.v[k];
    w.v[k] = std::sqrt(kappa.v[k] / one_q2.v[k]);
  }
  ScalarField wn = upwind_step(w, u, v, dt);
  ScalarField out(kappa.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = wn.v[k] * wn.v[k] * one_q2.v[k];
  return out;
}

}  // namespace

CompressibleState::CompressibleState(ScalarField rho_, ScalarField u_,
                                     ScalarField v_, double gamma_)
    : rho(std::move(rho_)), u(std::move(u_)), v(std::move(v_)), gamma(gamma_) {
  require_same_grid(rho.grid, u.grid, "CompressibleState");
  require_same_grid(rho.grid, v.grid, "CompressibleState");
  if (!(gamma >= 1.0))
    throw ValidationError("CompressibleState: gamma must be >= 1");
  for (double r : rho.v)
    if (!(r > 0.0))
      throw NonpositiveDensity("CompressibleState: rho must be positive");
}

double pressure_from_curvature_point(double q2, double kappa) {
  double disc = q2 * q2 + 4.0 * kappa;
  if (disc < 0.0) {
    const double tol = 1e-12 * std::max(1.0, q2 * q2 + 4.0 * std::abs(kappa));
    if (disc < -tol)
      throw NegativeDiscriminant(
          "pressure_from_curvature: q^4 + 4 kappa = " + std::to_string(disc));
    disc = 0.0;
  }
  return 0.5 * (-q2 + std::sqrt(disc));
}

double rho_from_kappa_point(double kappa, double q2, double gamma) {
  if (!(kappa > 0.0))
    throw NonpositiveCurvature("rho_from_kappa: kappa must be positive, got " +
                               std::to_string(kappa));
  if (gamma == 1.0) return std::sqrt(kappa / (1.0 + q2));
  // kappa_of_rho is strictly increasing, so bracket by doubling/halving and
  // bisect.
  double lo = 1.0, hi = 1.0;
  while (kappa_of_rho(lo, q2, gamma) > kappa) lo *= 0.5;
  while (kappa_of_rho(hi, q2, gamma) < kappa) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kappa_of_rho(mid, q2, gamma) < kappa ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::array<double, 3> gromov_point(double r1, double r2, double r3) {
  const double d = r1 - r3;
  const double s = std::sqrt(d * d + 4.0 * r2 * r2);
  const double P = 0.5 * ((r1 + r3) - s);
  // r1 - P = (d + s)/2 and r3 - P = (s - d)/2 are nonnegative by
  // construction; the cancellation-prone branch is rewritten via
  // (s - |d|)(s + |d|) = 4 r2^2 to keep U1 U2 = |r2| to full precision.
  const double a = d >= 0.0 ? 0.5 * (d + s) : 2.0 * r2 * r2 / (s - d);
  const double b = d <= 0.0 ? 0.5 * (s - d) : 2.0 * r2 * r2 / (s + d);
  if (!(a >= 0.0) || !(b >= 0.0))
    throw NegativeRadicand("gromov_point: r - P negative beyond rounding");
  return {std::sqrt(a), std::sqrt(b), P};
}

FundamentalForm lmn_from_fluid(const FluidState& s) {
  ScalarField L = add_fields(mul_fields(s.v, s.v), s.p);
  ScalarField M = scale_field(mul_fields(s.u, s.v), -1.0);
  ScalarField N = add_fields(mul_fields(s.u, s.u), s.p);
  return FundamentalForm(std::move(L), std::move(M), std::move(N));
}

ScalarField pressure_from_curvature(const ScalarField& q2,
                                    const ScalarField& kappa) {
  require_same_grid(q2.grid, kappa.grid, "pressure_from_curvature");
  ScalarField out(q2.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = pressure_from_curvature_point(q2.v[k], kappa.v[k]);
  return out;
}

std::pair<ScalarField, ScalarField> fluid_from_lmn(const FundamentalForm& ff) {
  ScalarField au(ff.grid()), av(ff.grid());
  for (std::size_t k = 0; k < au.v.size(); ++k) {
    const auto [u2, v2] = uv_squared(ff.L.v[k], ff.M.v[k], ff.N.v[k]);
    au.v[k] = std::sqrt(u2);
    av.v[k] = std::sqrt(v2);
  }
  return {std::move(au), std::move(av)};
}

std::array<ScalarField, 3> euler_residual(const FluidState& s,
                                          const ScalarField& dt_u,
                                          const ScalarField& dt_v, int order) {
  require_same_grid(s.grid(), dt_u.grid, "euler_residual");
  require_same_grid(s.grid(), dt_v.grid, "euler_residual");
  const ScalarField f1 = add_fields(mul_fields(s.u, s.u), s.p);
  const ScalarField f2 = add_fields(mul_fields(s.v, s.v), s.p);
  const ScalarField uv = mul_fields(s.u, s.v);
  const Grid2D& g = s.grid();
  ScalarField r1(g), r2(g), r3(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      r1.at(i, j) = deriv(f1, i, j, fd::Part::d1, order) +
                    deriv(uv, i, j, fd::Part::d2, order) + dt_u.at(i, j);
      r2.at(i, j) = deriv(uv, i, j, fd::Part::d1, order) +
                    deriv(f2, i, j, fd::Part::d2, order) + dt_v.at(i, j);
      r3.at(i, j) = deriv(s.u, i, j, fd::Part::d1, order) +
                    deriv(s.v, i, j, fd::Part::d2, order);
    }
  }
  return {std::move(r1), std::move(r2), std::move(r3)};
}

ScalarField pressure_poisson_residual(const FluidState& s, int order) {
  const ScalarField uu = mul_fields(s.u, s.u);
  const ScalarField uv = mul_fields(s.u, s.v);
  const ScalarField vv = mul_fields(s.v, s.v);
  const Grid2D& g = s.grid();
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.at(i, j) = deriv(uu, i, j, fd::Part::d11, order) +
                     2.0 * deriv(uv, i, j, fd::Part::d12, order) +
                     deriv(vv, i, j, fd::Part::d22, order) +
                     deriv(s.p, i, j, fd::Part::d11, order) +
                     deriv(s.p, i, j, fd::Part::d22, order);
  return out;
}

std::pair<ScalarField, ScalarField> geometric_flow_rhs(
    const FundamentalForm& ff, const ChristoffelField& G) {
  require_same_grid(ff.grid(), G.grid(), "geometric_flow_rhs");
  ScalarField ru(ff.grid()), rv(ff.grid());
  for (std::size_t k = 0; k < ru.v.size(); ++k) {
    const double L = ff.L.v[k], M = ff.M.v[k], N = ff.N.v[k];
    ru.v[k] = G.c122.v[k] * L - 2.0 * G.c112.v[k] * M + G.c111.v[k] * N;
    rv.v[k] = G.c222.v[k] * L - 2.0 * G.c212.v[k] * M + G.c211.v[k] * N;
  }
  return {std::move(ru), std::move(rv)};
}

ScalarField divergence_constraint_residual(const FundamentalForm& ff,
                                           const ChristoffelField& G,
                                           int order) {
  auto [ru, rv] = geometric_flow_rhs(ff, G);
  const Grid2D& g = ff.grid();
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.at(i, j) = deriv(ru, i, j, fd::Part::d1, order) +
                     deriv(rv, i, j, fd::Part::d2, order);
  return out;
}

FundamentalForm lmn_from_compressible(const CompressibleState& s) {
  ScalarField L(s.grid()), M(s.grid()), N(s.grid());
  for (std::size_t k = 0; k < L.v.size(); ++k) {
    const double rho = s.rho.v[k], u = s.u.v[k], v = s.v.v[k];
    const double p = pressure_of_rho(rho, s.gamma);
    L.v[k] = rho * v * v + p;
    M.v[k] = -rho * u * v;
    N.v[k] = rho * u * u + p;
  }
  return FundamentalForm(std::move(L), std::move(M), std::move(N));
}

std::pair<ScalarField, ScalarField> compressible_from_lmn(
    const FundamentalForm& ff, const ScalarField& rho) {
  require_same_grid(ff.grid(), rho.grid, "compressible_from_lmn");
  ScalarField au(ff.grid()), av(ff.grid());
  for (std::size_t k = 0; k < au.v.size(); ++k) {
    if (!(rho.v[k] > 0.0))
      throw NonpositiveDensity("compressible_from_lmn: rho must be positive");
    const auto [ru2, rv2] = uv_squared(ff.L.v[k], ff.M.v[k], ff.N.v[k]);
    au.v[k] = std::sqrt(ru2 / rho.v[k]);
    av.v[k] = std::sqrt(rv2 / rho.v[k]);
  }
  return {std::move(au), std::move(av)};
}

ScalarField rho_from_kappa(const ScalarField& kappa, const ScalarField& q2,
                           double gamma) {
  require_same_grid(kappa.grid, q2.grid, "rho_from_kappa");
  ScalarField out(kappa.grid);
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = rho_from_kappa_point(kappa.v[k], q2.v[k], gamma);
  return out;
}

ScalarField kappa_transport_step(const ScalarField& kappa, const FluidState& s,
                                 double dt) {
  return kappa_step_uv(kappa, s.u, s.v, dt);
}

ScalarField kappa_transport_step(const ScalarField& kappa,
                                 const CompressibleState& s, double dt) {
  return kappa_step_uv(kappa, s.u, s.v, dt);
}

std::tuple<ScalarField, ScalarField, ScalarField> gromov_identification(
    const GromovTriple& t) {
  ScalarField U1(t.grid()), U2(t.grid()), P(t.grid());
  for (std::size_t k = 0; k < P.v.size(); ++k) {
    const auto out = gromov_point(t.r1.v[k], t.r2.v[k], t.r3.v[k]);
    U1.v[k] = out[0];
    U2.v[k] = out[1];
    P.v[k] = out[2];
  }
  return {std::move(U1), std::move(U2), std::move(P)};
}

FluidState taylor_green_fixture(const Grid2D& grid, double p_shift) {
  ScalarClosure u;
  u.f = [](double a, double b) { return std::sin(a) * std::cos(b); };
  u.f1 = [](double a, double b) { return std::cos(a) * std::cos(b); };
  u.f2 = [](double a, double b) { return -std::sin(a) * std::sin(b); };
  u.f11 = [](double a, double b) { return -std::sin(a) * std::cos(b); };
  u.f12 = [](double a, double b) { return -std::cos(a) * std::sin(b); };
  u.f22 = [](double a, double b) { return -std::sin(a) * std::cos(b); };
  ScalarClosure v;
  v.f = [](double a, double b) { return -std::cos(a) * std::sin(b); };
  v.f1 = [](double a, double b) { return std::sin(a) * std::sin(b); };
  v.f2 = [](double a, double b) { return -std::cos(a) * std::cos(b); };
  v.f11 = [](double a, double b) { return std::cos(a) * std::sin(b); };
  v.f12 = [](double a, double b) { return std::sin(a) * std::cos(b); };
  v.f22 = [](double a, double b) { return std::cos(a) * std::sin(b); };
  ScalarClosure p;
  p.f = [p_shift](double a, double b) {
    return 0.25 * (std::cos(2.0 * a) + std::cos(2.0 * b)) + p_shift;
  };
  p.f1 = [](double a, double) { return -0.5 * std::sin(2.0 * a); };
  p.f2 = [](double, double b) { return -0.5 * std::sin(2.0 * b); };
  p.f11 = [](double a, double) { return -std::cos(2.0 * a); };
  p.f12 = [](double, double) { return 0.0; };
  p.f22 = [](double, double b) { return -std::cos(2.0 * b); };
  return FluidState(ScalarField::from_closure(grid, u),
                    ScalarField::from_closure(grid, v),
                    ScalarField::from_closure(grid, p));
}

}  // namespace wrinkle
