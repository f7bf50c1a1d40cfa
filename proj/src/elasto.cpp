#include "wrinkle/elasto.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wrinkle/errors.hpp"
#include "wrinkle/stencil.hpp"

namespace wrinkle {

namespace {

void require_state_grids(const ScalarField& rho, const ScalarField& u,
                         const ScalarField& v, const StressField& T,
                         const char* where) {
  require_same_grid(rho.grid, u.grid, where);
  require_same_grid(rho.grid, v.grid, where);
  require_same_grid(rho.grid, T.grid(), where);
}

ScalarField zeros(const Grid2D& g) {
  return ScalarField::tabulate(g, [](double, double) { return 0.0; });
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  ScalarField out = zeros(a.grid);
  for (int i = 0; i < a.grid.nx; ++i) {
    for (int j = 0; j < a.grid.ny; ++j) {
      out.at(i, j) = a.at(i, j) + b.at(i, j);
    }
  }
  return out;
}

/// d1 a + d2 b by stencils.
ScalarField divergence(const ScalarField& a, const ScalarField& b, int order) {
  return add(deriv_field(a, fd::Part::d1, order),
             deriv_field(b, fd::Part::d2, order));
}

}  // namespace

// ---------------------------------------------------------------------------
// DeformationState
// ---------------------------------------------------------------------------

DeformationState::DeformationState(ScalarField a, ScalarField b, ScalarField c,
                                   ScalarField d, double rho0_)
    : F11(std::move(a)),
      F12(std::move(b)),
      F21(std::move(c)),
      F22(std::move(d)),
      rho0(rho0_) {
  require_same_grid(F11.grid, F12.grid, "DeformationState");
  require_same_grid(F11.grid, F21.grid, "DeformationState");
  require_same_grid(F11.grid, F22.grid, "DeformationState");
  if (!(rho0 > 0.0)) {
    throw NonpositiveDensity("DeformationState: rho0 must be positive");
  }
  for (int i = 0; i < F11.grid.nx; ++i) {
    for (int j = 0; j < F11.grid.ny; ++j) {
      if (!(det(i, j) > 0.0)) {
        std::ostringstream os;
        os << "DeformationState: det F = " << det(i, j) << " at node (" << i
           << ", " << j << ")";
        throw NonpositiveJacobian(os.str());
      }
    }
  }
}

ScalarField DeformationState::density() const {
  ScalarField rho = zeros(grid());
  for (int i = 0; i < grid().nx; ++i) {
    for (int j = 0; j < grid().ny; ++j) {
      rho.at(i, j) = rho0 / det(i, j);
    }
  }
  return rho;
}

// ---------------------------------------------------------------------------
// Pointwise rules
// ---------------------------------------------------------------------------

std::array<double, 3> adjugate_rule(double a11, double a12, double a22) {
  return {a22, -a12, a11};
}

std::array<double, 3> identity_rule(double a11, double a12, double a22) {
  return {a11, a12, a22};
}

// ---------------------------------------------------------------------------
// Stress-based forms
// ---------------------------------------------------------------------------

FundamentalForm lmn_from_stress(const ScalarField& rho, const ScalarField& u,
                                const ScalarField& v, const StressField& T) {
  require_state_grids(rho, u, v, T, "lmn_from_stress");
  ScalarField L = zeros(rho.grid), M = zeros(rho.grid), N = zeros(rho.grid);
  for (int i = 0; i < rho.grid.nx; ++i) {
    for (int j = 0; j < rho.grid.ny; ++j) {
      const double r = rho.at(i, j), uu = u.at(i, j), vv = v.at(i, j);
      L.at(i, j) = r * vv * vv - T.T22.at(i, j);
      M.at(i, j) = -r * uu * vv + T.T12.at(i, j);
      N.at(i, j) = r * uu * uu - T.T11.at(i, j);
    }
  }
  return FundamentalForm(std::move(L), std::move(M), std::move(N));
}

ScalarField positivity_condition(const ScalarField& rho, const ScalarField& u,
                                 const ScalarField& v, const StressField& T) {
  require_state_grids(rho, u, v, T, "positivity_condition");
  ScalarField out = zeros(rho.grid);
  for (int i = 0; i < rho.grid.nx; ++i) {
    for (int j = 0; j < rho.grid.ny; ++j) {
      const double r = rho.at(i, j), uu = u.at(i, j), vv = v.at(i, j);
      const double t11 = T.T11.at(i, j), t12 = T.T12.at(i, j),
                   t22 = T.T22.at(i, j);
      out.at(i, j) = t11 * t22 - t12 * t12 + 2.0 * r * uu * vv * t12 -
                     r * vv * vv * t11 - r * uu * uu * t22;
    }
  }
  return out;
}

StressField neo_hookean_stress(const DeformationState& ds) {
  const Grid2D& g = ds.grid();
  ScalarField T11 = zeros(g), T12 = zeros(g), T22 = zeros(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double f11 = ds.F11.at(i, j), f12 = ds.F12.at(i, j);
      const double f21 = ds.F21.at(i, j), f22 = ds.F22.at(i, j);
      const double rho = ds.rho0 / ds.det(i, j);
      T11.at(i, j) = rho * (f11 * f11 + f12 * f12);
      T12.at(i, j) = rho * (f11 * f21 + f12 * f22);
      T22.at(i, j) = rho * (f21 * f21 + f22 * f22);
    }
  }
  return StressField(std::move(T11), std::move(T12), std::move(T22));
}

// ---------------------------------------------------------------------------
// Traveling waves
// ---------------------------------------------------------------------------

Motion traveling_wave_motion(const WaveProfile& w, int s1, int s2) {
  if (!w.w || !w.wp || !w.wpp) {
    throw ValidationError(
        "traveling_wave_motion: profile needs w, w', and w''");
  }
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) {
    throw ValidationError("traveling_wave_motion: signs must be +1 or -1");
  }
  const double c1 = static_cast<double>(s1);
  const double c2 = static_cast<double>(s2);
  const auto f = w.w, fp = w.wp, fpp = w.wpp;

  Motion m;
  m.x1 = [f, c1](double X1, double X2, double t) {
    return X1 + f(X2 + c1 * t);
  };
  m.x2 = [c2](double, double X2, double t) { return X2 + c2 * t; };
  m.F11 = [](double, double, double) { return 1.0; };
  m.F12 = [fp, c1](double, double X2, double t) { return fp(X2 + c1 * t); };
  m.F21 = [](double, double, double) { return 0.0; };
  m.F22 = [](double, double, double) { return 1.0; };
  m.v1 = [fp, c1](double, double X2, double t) {
    return c1 * fp(X2 + c1 * t);
  };
  m.v2 = [c2](double, double, double) { return c2; };
  // c1^2 = 1, so the acceleration equals the reference Laplacian and the
  // wave-equation residual vanishes identically for any profile.
  m.a1 = [fpp, c1](double, double X2, double t) { return fpp(X2 + c1 * t); };
  m.a2 = [](double, double, double) { return 0.0; };
  m.lap1 = [fpp, c1](double, double X2, double t) {
    return fpp(X2 + c1 * t);
  };
  m.lap2 = [](double, double, double) { return 0.0; };
  m.invert = [f, c1, c2](double x1, double x2,
                         double t) -> std::array<double, 2> {
    const double X2 = x2 - c2 * t;
    return {x1 - f(X2 + c1 * t), X2};
  };
  return m;
}

std::array<ScalarField, 4> es2_residual(
    const Motion& m, const Grid2D& g, double t,
    const std::function<double(double, double)>& Z, double rho0) {
  if (!(rho0 > 0.0)) {
    throw NonpositiveDensity("es2_residual: rho0 must be positive");
  }
  auto z = Z ? Z : [rho0](double, double) { return -rho0; };
  ScalarField r1 = zeros(g), r2 = zeros(g), r3 = zeros(g), caveat = zeros(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double X1 = g.x1(i), X2 = g.x2(j);
      const double f11 = m.F11(X1, X2, t), f12 = m.F12(X1, X2, t);
      const double f21 = m.F21(X1, X2, t), f22 = m.F22(X1, X2, t);
      const double J = f11 * f22 - f12 * f21;
      if (!(J > 0.0)) {
        std::ostringstream os;
        os << "es2_residual: det F = " << J << " at (" << X1 << ", " << X2
           << ")";
        throw NonpositiveJacobian(os.str());
      }
      const double g1sq = f11 * f11 + f12 * f12;  // |grad x1|^2
      const double g2sq = f21 * f21 + f22 * f22;  // |grad x2|^2
      if (g2sq == 0.0) {
        throw DivisionByZeroForm("es2_residual: grad x2 vanishes");
      }
      const double u1 = m.v1(X1, X2, t), u2 = m.v2(X1, X2, t);
      r1.at(i, j) = u2 * u2 - g2sq;
      r2.at(i, j) = u1 * u1 - g1sq + (J * J) / g2sq;
      r3.at(i, j) = z(m.x2(X1, X2, t), t) * g2sq / rho0 + J;
      caveat.at(i, j) = u1 * u2 - (f11 * f21 + f12 * f22);
    }
  }
  return {std::move(r1), std::move(r2), std::move(r3), std::move(caveat)};
}

std::pair<ScalarField, ScalarField> wave_equation_residual(const Motion& m,
                                                           const Grid2D& g,
                                                           double t) {
  if (!m.a1 || !m.a2 || !m.lap1 || !m.lap2) {
    throw ValidationError(
        "wave_equation_residual: motion lacks second-derivative closures");
  }
  ScalarField r1 = ScalarField::tabulate(g, [&](double X1, double X2) {
    return m.a1(X1, X2, t) - m.lap1(X1, X2, t);
  });
  ScalarField r2 = ScalarField::tabulate(g, [&](double X1, double X2) {
    return m.a2(X1, X2, t) - m.lap2(X1, X2, t);
  });
  return {std::move(r1), std::move(r2)};
}

SteadinessReport current_config_steadiness(const Motion& m,
                                           const std::array<double, 2>& x0,
                                           const std::vector<double>& times) {
  if (!m.invert) {
    throw ValidationError(
        "current_config_steadiness: motion lacks a closed-form inverse");
  }
  if (times.empty()) {
    throw ValidationError("current_config_steadiness: empty time list");
  }
  SteadinessReport rep;
  rep.trace.reserve(times.size());
  for (double t : times) {
    const auto X = m.invert(x0[0], x0[1], t);
    rep.trace.push_back({m.v1(X[0], X[1], t), m.v2(X[0], X[1], t)});
  }
  for (const auto& uv : rep.trace) {
    rep.max_variation =
        std::max({rep.max_variation, std::abs(uv[0] - rep.trace[0][0]),
                  std::abs(uv[1] - rep.trace[0][1])});
  }
  rep.is_steady = rep.max_variation < 1e-10;
  return rep;
}

// ---------------------------------------------------------------------------
// Degenerate-image fields
// ---------------------------------------------------------------------------

std::vector<ContinuumState> degenerate_continuum_fields(
    const ScalarField& rho1, const ScalarField& rho2, const ScalarField& u0,
    const ScalarField& v0, const std::vector<double>& times, int substeps) {
  require_same_grid(rho1.grid, rho2.grid, "degenerate_continuum_fields");
  require_same_grid(rho1.grid, u0.grid, "degenerate_continuum_fields");
  require_same_grid(rho1.grid, v0.grid, "degenerate_continuum_fields");
  if (times.empty()) {
    throw ValidationError("degenerate_continuum_fields: empty time list");
  }
  if (substeps < 1) {
    throw ValidationError("degenerate_continuum_fields: substeps must be >= 1");
  }
  const Grid2D& g = rho1.grid;

  // rho is affine in t, so positivity over [0, t] (or [t, 0]) only needs the
  // endpoints.
  auto check_rho = [&](double t) {
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        if (!(rho1.at(i, j) * t + rho2.at(i, j) > 0.0)) {
          std::ostringstream os;
          os << "degenerate_continuum_fields: rho <= 0 at t = " << t;
          throw NonpositiveDensity(os.str());
        }
      }
    }
  };
  check_rho(0.0);

  std::vector<ContinuumState> out;
  out.reserve(times.size());
  for (double t : times) {
    check_rho(t);
    ScalarField rho = zeros(g), u = zeros(g), v = zeros(g);
    const int n = substeps;
    const double dt = t / n;
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        const double r1 = rho1.at(i, j), r2 = rho2.at(i, j);
        auto rhs = [r1, r2](double tt, double w) {
          return -r1 * w / (r1 * tt + r2);
        };
        double uu = u0.at(i, j), vv = v0.at(i, j);
        for (int k = 0; k < n; ++k) {
          const double tk = k * dt;
          auto rk4 = [&](double& w) {
            const double k1 = rhs(tk, w);
            const double k2 = rhs(tk + 0.5 * dt, w + 0.5 * dt * k1);
            const double k3 = rhs(tk + 0.5 * dt, w + 0.5 * dt * k2);
            const double k4 = rhs(tk + dt, w + dt * k3);
            w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          };
          rk4(uu);
          rk4(vv);
        }
        rho.at(i, j) = r1 * t + r2;
        u.at(i, j) = uu;
        v.at(i, j) = vv;
      }
    }
    out.push_back({std::move(rho), std::move(u), std::move(v)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifold -> mechanics
// ---------------------------------------------------------------------------

ManifoldMechanics mechanics_from_manifold(
    const std::function<ChristoffelField(double)>& Gamma,
    const std::function<FundamentalForm(double)>& lmn,
    const ScalarField& rho0, const ScalarField& u0, const ScalarField& v0,
    double t_end, int steps, int order) {
  require_same_grid(rho0.grid, u0.grid, "mechanics_from_manifold");
  require_same_grid(rho0.grid, v0.grid, "mechanics_from_manifold");
  if (!Gamma || !lmn) {
    throw ValidationError("mechanics_from_manifold: missing time closures");
  }
  if (steps < 1) {
    throw ValidationError("mechanics_from_manifold: steps must be >= 1");
  }
  const Grid2D& g = rho0.grid;
  const int n = g.nx * g.ny;
  const double dt = t_end / steps;

  // Flat state layout: [m_u, m_v, rho_m | rho, u, v]. The first block
  // integrates the momenta directly; the second integrates density and
  // velocity, so the gap between m and rho*u measures internal consistency.
  std::vector<double> y(6 * n);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const int k = i * g.ny + j;
      const double r = rho0.at(i, j);
      if (!(r > 0.0)) {
        throw NonpositiveDensity("mechanics_from_manifold: rho0 <= 0");
      }
      y[k] = r * u0.at(i, j);
      y[n + k] = r * v0.at(i, j);
      y[2 * n + k] = r;
      y[3 * n + k] = r;
      y[4 * n + k] = u0.at(i, j);
      y[5 * n + k] = v0.at(i, j);
    }
  }

  auto field_of = [&](const std::vector<double>& s, int block) {
    ScalarField f = zeros(g);
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        f.at(i, j) = s[block * n + i * g.ny + j];
      }
    }
    return f;
  };

  auto rhs = [&](double t, const std::vector<double>& s) {
    std::vector<double> d(6 * n);
    const ChristoffelField G = Gamma(t);
    require_same_grid(G.grid(), g, "mechanics_from_manifold");
    const FundamentalForm ff = lmn(t);
    require_same_grid(ff.grid(), g, "mechanics_from_manifold");
    const auto [ru, rv] = geometric_flow_rhs(ff, G);

    const ScalarField mu = field_of(s, 0), mv = field_of(s, 1);
    ScalarField pu = zeros(g), pv = zeros(g);
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        const int k = i * g.ny + j;
        pu.at(i, j) = s[3 * n + k] * s[4 * n + k];
        pv.at(i, j) = s[3 * n + k] * s[5 * n + k];
      }
    }
    const ScalarField div_m = divergence(mu, mv, order);
    const ScalarField div_p = divergence(pu, pv, order);
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        const int k = i * g.ny + j;
        const double r = s[3 * n + k];
        if (!(r > 0.0)) {
          std::ostringstream os;
          os << "mechanics_from_manifold: rho <= 0 at t = " << t;
          throw NonpositiveDensity(os.str());
        }
        const double drho = -div_p.at(i, j);
        d[k] = ru.at(i, j);
        d[n + k] = rv.at(i, j);
        d[2 * n + k] = -div_m.at(i, j);
        d[3 * n + k] = drho;
        d[4 * n + k] = (ru.at(i, j) - drho * s[4 * n + k]) / r;
        d[5 * n + k] = (rv.at(i, j) - drho * s[5 * n + k]) / r;
      }
    }
    return d;
  };

  ManifoldMechanics out;
  auto record = [&](double t) {
    out.times.push_back(t);
    out.states.push_back(
        {field_of(y, 3), field_of(y, 4), field_of(y, 5)});
    for (int k = 0; k < n; ++k) {
      out.consistency_gap =
          std::max({out.consistency_gap,
                    std::abs(y[k] - y[3 * n + k] * y[4 * n + k]),
                    std::abs(y[n + k] - y[3 * n + k] * y[5 * n + k])});
    }
  };
  record(0.0);
  std::vector<double> tmp(6 * n);
  auto axpy = [&](const std::vector<double>& base, double c,
                  const std::vector<double>& d) {
    for (int k = 0; k < 6 * n; ++k) tmp[k] = base[k] + c * d[k];
    return tmp;
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const auto k1 = rhs(t, y);
    const auto k2 = rhs(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
    const auto k3 = rhs(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
    const auto k4 = rhs(t + dt, axpy(y, dt, k3));
    for (int k = 0; k < 6 * n; ++k) {
      y[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    record((s + 1) * dt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constrained-system residuals
// ---------------------------------------------------------------------------

ConstrainedResiduals constrained_system_residual(
    const ContinuumState& s, const DeformationState& F, const MetricField& g,
    const FundamentalForm& ff, const StressField& T, const TensorRule& rule,
    int order) {
  const Grid2D& grid = s.rho.grid;
  require_same_grid(grid, s.u.grid, "constrained_system_residual");
  require_same_grid(grid, s.v.grid, "constrained_system_residual");
  require_same_grid(grid, F.grid(), "constrained_system_residual");
  require_same_grid(grid, g.grid(), "constrained_system_residual");
  require_same_grid(grid, ff.grid(), "constrained_system_residual");
  require_same_grid(grid, T.grid(), "constrained_system_residual");
  if (!rule) {
    throw ValidationError("constrained_system_residual: missing tensor rule");
  }

  auto product = [&](auto&& fn) {
    ScalarField out = zeros(grid);
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 0; j < grid.ny; ++j) {
        out.at(i, j) = fn(i, j);
      }
    }
    return out;
  };
  const ScalarField ru = product(
      [&](int i, int j) { return s.rho.at(i, j) * s.u.at(i, j); });
  const ScalarField rv = product(
      [&](int i, int j) { return s.rho.at(i, j) * s.v.at(i, j); });

  ConstrainedResiduals out{
      zeros(grid), zeros(grid), zeros(grid), zeros(grid), zeros(grid),
      zeros(grid), zeros(grid), zeros(grid), zeros(grid), zeros(grid)};

  out.mass = divergence(ru, rv, order);

  const ScalarField flux11 = product([&](int i, int j) {
    return ru.at(i, j) * s.u.at(i, j) - T.T11.at(i, j);
  });
  const ScalarField flux12 = product([&](int i, int j) {
    return ru.at(i, j) * s.v.at(i, j) - T.T12.at(i, j);
  });
  const ScalarField flux22 = product([&](int i, int j) {
    return rv.at(i, j) * s.v.at(i, j) - T.T22.at(i, j);
  });
  out.momentum1 = divergence(flux11, flux12, order);
  out.momentum2 = divergence(flux12, flux22, order);

  // Steady transport of F: v . grad F = (grad v) F, with the spatial velocity
  // gradient taken by stencils on the shared chart.
  const ScalarField L11 = deriv_field(s.u, fd::Part::d1, order);
  const ScalarField L12 = deriv_field(s.u, fd::Part::d2, order);
  const ScalarField L21 = deriv_field(s.v, fd::Part::d1, order);
  const ScalarField L22 = deriv_field(s.v, fd::Part::d2, order);
  const std::array<const ScalarField*, 4> Fc = {&F.F11, &F.F12, &F.F21,
                                                &F.F22};
  std::array<ScalarField, 4> dF1, dF2;
  for (int c = 0; c < 4; ++c) {
    dF1[c] = deriv_field(*Fc[c], fd::Part::d1, order);
    dF2[c] = deriv_field(*Fc[c], fd::Part::d2, order);
  }
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double uu = s.u.at(i, j), vv = s.v.at(i, j);
      const double l11 = L11.at(i, j), l12 = L12.at(i, j);
      const double l21 = L21.at(i, j), l22 = L22.at(i, j);
      const double f11 = F.F11.at(i, j), f12 = F.F12.at(i, j);
      const double f21 = F.F21.at(i, j), f22 = F.F22.at(i, j);
      const std::array<double, 4> lvf = {
          l11 * f11 + l12 * f21, l11 * f12 + l12 * f22,
          l21 * f11 + l22 * f21, l21 * f12 + l22 * f22};
      double worst = 0.0;
      for (int c = 0; c < 4; ++c) {
        worst = std::max(worst, std::abs(uu * dF1[c].at(i, j) +
                                         vv * dF2[c].at(i, j) - lvf[c]));
      }
      out.deformation.at(i, j) = worst;
    }
  }

  const ChristoffelField G = christoffel(g, order);
  std::tie(out.codazzi1, out.codazzi2) = codazzi_residual(ff, G, order);
  out.gauss = gauss_residual(ff, brioschi_curvature(g, order));

  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double a11 = ru.at(i, j) * s.u.at(i, j) - T.T11.at(i, j);
      const double a12 = ru.at(i, j) * s.v.at(i, j) - T.T12.at(i, j);
      const double a22 = rv.at(i, j) * s.v.at(i, j) - T.T22.at(i, j);
      const auto f = rule(a11, a12, a22);
      out.ident11.at(i, j) = ff.L.at(i, j) - f[0];
      out.ident12.at(i, j) = ff.M.at(i, j) - f[1];
      out.ident22.at(i, j) = ff.N.at(i, j) - f[2];
    }
  }
  return out;
}

}  // namespace wrinkle
