#include "wrinkle/constraint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace wrinkle {

namespace {

// -- forward-mode dual number (one derivative direction) ---------------------

struct Dn {
  double v = 0.0, d = 0.0;
};
inline Dn operator+(Dn a, Dn b) { return {a.v + b.v, a.d + b.d}; }
inline Dn operator-(Dn a, Dn b) { return {a.v - b.v, a.d - b.d}; }
inline Dn operator*(Dn a, Dn b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dn operator/(Dn a, Dn b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dn operator*(double c, Dn a) { return {c * a.v, c * a.d}; }
inline Dn operator-(Dn a) { return {-a.v, -a.d}; }

// -- the tangential-derivative solve, shared by double and dual paths --------
//
// Codazzi's two equations, with Christoffel symbols expanded in the metric,
// form a linear 2x2 system for (d1 g12, d2 g12); this is its explicit
// solution. G1/G2 collect the 11/22-derivative terms.

template <class T>
void pq_solve(T g11, T g12, T g22, T d1g11, T d2g11, T d1g22, T d2g22, T L,
              T M, T N, T r, T st, T& P, T& Q) {
  const T D = g11 * g22 - g12 * g12;
  const T G1 = 0.5 * (g22 * (-d1g22) - g12 * d2g22) * L -
               (g22 * d2g11 - g12 * d1g22) * M +
               0.5 * (g22 * d1g11 + g12 * d2g11) * N;
  const T G2 = 0.5 * (g12 * d1g22 + g11 * d2g22) * L -
               (g11 * d1g22 - g12 * d2g11) * M +
               0.5 * (-g12 * d1g11 - g11 * d2g11) * N;
  const T W1 = r + G1 / D;
  const T W2 = st + G2 / D;
  P = -(g12 * W1 + g22 * W2) / N;
  Q = -(g11 * W1 + g12 * W2) / L;
}

// -- small utilities ----------------------------------------------------------

double line_deriv(const std::vector<double>& f, int j, int n, double h, int m,
                  int order) {
  const fd::Window w = fd::axis_window(j, n, h, m, order);
  double acc = 0.0;
  for (int k = 0; k < w.n; ++k) acc += f[w.start + k] * w.w[k];
  return acc;
}

// 3-point Lagrange interpolation along the s-axis of a grid-shaped array.
double interp_s(const Grid2D& g, const std::vector<double>& q, double s,
                int j) {
  const double t = (s - g.x10) / g.h1;
  int i0 = static_cast<int>(std::lround(t)) - 1;
  i0 = std::clamp(i0, 0, g.nx - 3);
  const double x = t - i0;
  const double w0 = 0.5 * (x - 1.0) * (x - 2.0);
  const double w1 = -x * (x - 2.0);
  const double w2 = 0.5 * x * (x - 1.0);
  return w0 * q[g.index(i0, j)] + w1 * q[g.index(i0 + 1, j)] +
         w2 * q[g.index(i0 + 2, j)];
}

// Form values, first s-derivatives, and the Codazzi combinations
// r = d1 N - d2 M, st = -d1 M + d2 L with their s-derivatives, tabulated on
// the chart grid (exact closures where available, stencils otherwise).
struct FormTables {
  Grid2D grid;
  std::vector<double> L, M, N, dsL, dsM, dsN, r, st, dsr, dsst, kap;

  FormTables(const FundamentalForm& ff, int order) : grid(ff.grid()) {
    const std::size_t sz = grid.size();
    for (auto* p : {&L, &M, &N, &dsL, &dsM, &dsN, &r, &st, &dsr, &dsst, &kap})
      p->assign(sz, 0.0);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const std::size_t k = grid.index(i, j);
        L[k] = ff.L.at(i, j);
        M[k] = ff.M.at(i, j);
        N[k] = ff.N.at(i, j);
        kap[k] = L[k] * N[k] - M[k] * M[k];
        const double Ls = deriv(ff.L, i, j, fd::Part::d1, order);
        const double Lt = deriv(ff.L, i, j, fd::Part::d2, order);
        const double Ms = deriv(ff.M, i, j, fd::Part::d1, order);
        const double Mt = deriv(ff.M, i, j, fd::Part::d2, order);
        const double Ns = deriv(ff.N, i, j, fd::Part::d1, order);
        const double Nt = deriv(ff.N, i, j, fd::Part::d2, order);
        dsL[k] = Ls;
        dsM[k] = Ms;
        dsN[k] = Ns;
        r[k] = (Ns + Nt) - (Ms - Mt);
        st[k] = -(Ms + Mt) + (Ls - Lt);
        const double Lss = deriv(ff.L, i, j, fd::Part::d11, order);
        const double Lst = deriv(ff.L, i, j, fd::Part::d12, order);
        const double Mss = deriv(ff.M, i, j, fd::Part::d11, order);
        const double Mst = deriv(ff.M, i, j, fd::Part::d12, order);
        const double Nss = deriv(ff.N, i, j, fd::Part::d11, order);
        const double Nst = deriv(ff.N, i, j, fd::Part::d12, order);
        dsr[k] = (Nss + Nst) - (Mss - Mst);
        dsst[k] = -(Mss + Mst) + (Lss - Lst);
      }
  }

  double at(const std::vector<double>& q, double s, int j) const {
    return interp_s(grid, q, s, j);
  }
};

// Map a jet taken in rotated coordinates (d1 ~ d/ds, d2 ~ d/dtau) to a jet in
// the original coordinates.
MetricJet rotate_jet(const MetricJet& m) {
  MetricJet o;
  o.g11 = m.g11;
  o.g12 = m.g12;
  o.g22 = m.g22;
  auto rot1 = [](double fs, double ft, double& f1, double& f2) {
    f1 = fs + ft;
    f2 = fs - ft;
  };
  rot1(m.d1g11, m.d2g11, o.d1g11, o.d2g11);
  rot1(m.d1g12, m.d2g12, o.d1g12, o.d2g12);
  rot1(m.d1g22, m.d2g22, o.d1g22, o.d2g22);
  auto rot2 = [](double fss, double fst, double ftt, double& f11, double& f12,
                 double& f22) {
    f11 = fss + 2.0 * fst + ftt;
    f22 = fss - 2.0 * fst + ftt;
    f12 = fss - ftt;
  };
  rot2(m.d11g11, m.d12g11, m.d22g11, o.d11g11, o.d12g11, o.d22g11);
  rot2(m.d11g12, m.d12g12, m.d22g12, o.d11g12, o.d12g12, o.d22g12);
  rot2(m.d11g22, m.d12g22, m.d22g22, o.d11g22, o.d12g22, o.d22g22);
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

ScalarClosure cl_rotate(const ScalarClosure& c, const RotatedChart& chart) {
  ScalarClosure out;
  auto x = [chart](double s, double t) { return chart.to_original(s, t); };
  if (c.f)
    out.f = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return c.f(a, b);
    };
  if (c.f1 && c.f2) {
    out.f1 = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return 0.5 * (c.f1(a, b) + c.f2(a, b));
    };
    out.f2 = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return 0.5 * (c.f1(a, b) - c.f2(a, b));
    };
  }
  if (c.f11 && c.f12 && c.f22) {
    out.f11 = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return 0.25 * (c.f11(a, b) + 2.0 * c.f12(a, b) + c.f22(a, b));
    };
    out.f12 = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return 0.25 * (c.f11(a, b) - c.f22(a, b));
    };
    out.f22 = [c, x](double s, double t) {
      auto [a, b] = x(s, t);
      return 0.25 * (c.f11(a, b) - 2.0 * c.f12(a, b) + c.f22(a, b));
    };
  }
  return out;
}

MetricJet rotate_jet_to_original(const MetricJet& rotated) {
  return rotate_jet(rotated);
}

std::pair<double, double> g12_tangential_derivatives(
    double g11, double g12, double g22, double d1g11, double d2g11,
    double d1g22, double d2g22, double L, double M, double N, double r,
    double st) {
  if (std::abs(L) < 1e-10 || std::abs(N) < 1e-10)
    throw DivisionByZeroForm("g12_tangential_derivatives: |L| or |N| < 1e-10");
  double P, Q;
  pq_solve<double>(g11, g12, g22, d1g11, d2g11, d1g22, d2g22, L, M, N, r, st,
                   P, Q);
  return {P, Q};
}

std::array<double, 4> coefficient_matrix_point(double L, double M, double N) {
  if (std::abs(L) < 1e-10 || std::abs(N) < 1e-10)
    throw DivisionByZeroForm("coefficient_matrix: |L| or |N| < 1e-10");
  return {0.25 * N / L - 0.5 * M / L - 0.25,
          -0.25 - 0.5 * M / N + 0.25 * L / N,
          -0.5 * N / L + M / L - 0.5,
          0.5 - M / N + 0.5 * L / N};
}

double shear_symbol_determinant(double u2, double p, double xi1, double xi2) {
  const double a = (u2 + p) / p;
  const double b = p / (u2 + p);
  const double x = xi1 * xi1, y = xi2 * xi2;
  const double m11 = 0.25 * a * x - 0.25 * y;
  const double m12 = -0.25 * x + 0.25 * b * y;
  const double m21 = -0.5 * a * x - 0.5 * y;
  const double m22 = 0.5 * x + 0.5 * b * y;
  return m11 * m22 - m12 * m21;
}

// ---------------------------------------------------------------------------
// Line ODE
// ---------------------------------------------------------------------------

std::vector<double> g12_initial_ode(const FundamentalForm& ff) {
  const Grid2D& g = ff.grid();
  const int n = g.ny;
  // Line quantities at the first s-column, closure-aware.
  std::vector<double> Lj(n), Nj(n), rj(n), stj(n);
  for (int j = 0; j < n; ++j) {
    Lj[j] = ff.L.at(0, j);
    Nj[j] = ff.N.at(0, j);
    if (std::abs(Lj[j]) < 1e-10 || std::abs(Nj[j]) < 1e-10)
      throw DivisionByZeroForm("g12_initial_ode: |L| or |N| < 1e-10 on line");
    const double Ls = deriv(ff.L, 0, j, fd::Part::d1);
    const double Lt = deriv(ff.L, 0, j, fd::Part::d2);
    const double Ms = deriv(ff.M, 0, j, fd::Part::d1);
    const double Mt = deriv(ff.M, 0, j, fd::Part::d2);
    const double Ns = deriv(ff.N, 0, j, fd::Part::d1);
    const double Nt = deriv(ff.N, 0, j, fd::Part::d2);
    rj[j] = (Ns + Nt) - (Ms - Mt);
    stj[j] = -(Ms + Mt) + (Ls - Lt);
  }
  auto sample = [&](const std::vector<double>& q, double tau) {
    const double t = (tau - g.x20) / g.h2;
    int j0 = std::clamp(static_cast<int>(std::lround(t)) - 1, 0, n - 3);
    const double x = t - j0;
    return 0.5 * (x - 1.0) * (x - 2.0) * q[j0] - x * (x - 2.0) * q[j0 + 1] +
           0.5 * x * (x - 1.0) * q[j0 + 2];
  };
  // dg12/dtau = (P - Q)/2 with the line prescription g11 = g22 = 1 and
  // vanishing 11/22 tangential derivatives (so the G terms drop out).
  auto rhs = [&](double tau, double w) {
    const double L = sample(Lj, tau), N = sample(Nj, tau);
    const double r = sample(rj, tau), st = sample(stj, tau);
    return 0.5 * ((r + w * st) / L - (w * r + st) / N);
  };
  // Start at the node nearest tau = 0.
  int j0 = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(g.x2(j)) < std::abs(g.x2(j0))) j0 = j;
  std::vector<double> out(n, 0.0);
  auto rk4_sweep = [&](int dir) {
    double w = 0.0;
    for (int j = j0; j + dir >= 0 && j + dir < n; j += dir) {
      const double tau = g.x2(j), h = dir * g.h2;
      const double k1 = rhs(tau, w);
      const double k2 = rhs(tau + 0.5 * h, w + 0.5 * h * k1);
      const double k3 = rhs(tau + 0.5 * h, w + 0.5 * h * k2);
      const double k4 = rhs(tau + h, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      out[j + dir] = w;
    }
  };
  rk4_sweep(+1);
  rk4_sweep(-1);
  return out;
}

InitialLineData default_initial_line(const FundamentalForm& ff) {
  const int n = ff.grid().ny;
  InitialLineData line;
  line.g11.assign(n, 1.0);
  line.g22.assign(n, 1.0);
  line.ds_g11.assign(n, 0.0);
  line.ds_g22.assign(n, 0.0);
  line.g12 = g12_initial_ode(ff);
  return line;
}

// ---------------------------------------------------------------------------
// Coefficient matrix and characteristic test
// ---------------------------------------------------------------------------

CoefficientMatrixField coefficient_matrix(const FundamentalForm& ff) {
  const Grid2D& g = ff.grid();
  CoefficientMatrixField out{ScalarField(g), ScalarField(g), ScalarField(g),
                             ScalarField(g), ScalarField(g)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const auto a =
          coefficient_matrix_point(ff.L.at(i, j), ff.M.at(i, j), ff.N.at(i, j));
      out.a11.at(i, j) = a[0];
      out.a12.at(i, j) = a[1];
      out.a21.at(i, j) = a[2];
      out.a22.at(i, j) = a[3];
      out.det.at(i, j) = a[0] * a[3] - a[1] * a[2];
    }
  return out;
}

ScalarField noncharacteristic_check(const FundamentalForm& ff,
                                    const ScalarField& kappa,
                                    const ScalarField& p) {
  require_same_grid(ff.grid(), kappa.grid, "noncharacteristic_check");
  require_same_grid(ff.grid(), p.grid, "noncharacteristic_check");
  const double tol_k = 1e-8 * std::max(1.0, kappa.max_abs());
  const double tol_m = 1e-8 * std::max(1.0, ff.M.max_abs());
  ScalarField out(ff.grid());
  for (std::size_t k = 0; k < out.v.size(); ++k)
    out.v[k] = (kappa.v[k] > tol_k && std::abs(ff.M.v[k]) > tol_m &&
                p.v[k] > 0.0)
                   ? 1.0
                   : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Marching
// ---------------------------------------------------------------------------

namespace {

struct MarchState {
  std::vector<double> g11, g22, g12, p11, p22;
};

MarchState axpy(const MarchState& y, double h, const MarchState& d) {
  MarchState out = y;
  for (std::size_t j = 0; j < y.g11.size(); ++j) {
    out.g11[j] += h * d.g11[j];
    out.g22[j] += h * d.g22[j];
    out.g12[j] += h * d.g12[j];
    out.p11[j] += h * d.p11[j];
    out.p22[j] += h * d.p22[j];
  }
  return out;
}

}  // namespace

MarchResult march_metric(const InitialLineData& line,
                         const FundamentalForm& ff, int steps,
                         const MarchOptions& opt) {
  const Grid2D& g = ff.grid();
  const int n = g.ny;
  if (g.h1 > 0.25 * g.h2 + 1e-14)
    throw ValidationError("march_metric: need step ratio h1/h2 <= 1/4");
  if (steps < 1 || steps > g.nx - 1)
    throw ValidationError("march_metric: steps must be in [1, nx-1]");
  if (static_cast<int>(line.g11.size()) != n ||
      static_cast<int>(line.g12.size()) != n ||
      static_cast<int>(line.g22.size()) != n ||
      static_cast<int>(line.ds_g11.size()) != n ||
      static_cast<int>(line.ds_g22.size()) != n)
    throw ValidationError("march_metric: line data size != grid ny");

  // The initial line must be non-characteristic.
  double amax = 0.0;
  std::vector<double> adet(n);
  for (int j = 0; j < n; ++j) {
    const auto a =
        coefficient_matrix_point(ff.L.at(0, j), ff.M.at(0, j), ff.N.at(0, j));
    adet[j] = a[0] * a[3] - a[1] * a[2];
    for (double e : a) amax = std::max(amax, std::abs(e));
  }
  for (int j = 0; j < n; ++j)
    if (std::abs(adet[j]) < 1e-10 * std::max(1.0, amax * amax))
      throw DegenerateSymbol(
          "march_metric: coefficient matrix singular on the initial line at "
          "tau index " +
          std::to_string(j));

  const FormTables T(ff, opt.order);
  auto f1 = [&](double s, double t) { return opt.f1 ? opt.f1(s, t) : 0.0; };
  auto f2 = [&](double s, double t) { return opt.f2 ? opt.f2(s, t) : 0.0; };
  auto f3 = [&](double s, double t) { return opt.f3 ? opt.f3(s, t) : 0.0; };

  MarchState st{line.g11, line.g22, line.g12, line.ds_g11, line.ds_g22};

  MetricField out{ScalarField(g), ScalarField(g), ScalarField(g)};
  auto write_level = [&](int lvl, const MarchState& y) {
    for (int j = 0; j < n; ++j) {
      out.g11.at(lvl, j) = y.g11[j];
      out.g12.at(lvl, j) = y.g12[j];
      out.g22.at(lvl, j) = y.g22[j];
    }
  };
  for (int i = 0; i < g.nx; ++i) write_level(i, st);

  // One right-hand-side evaluation of the first-order system in s.
  auto eval_rhs = [&](const MarchState& y, double s, MarchState& rhs) -> bool {
    auto d1 = [&](const std::vector<double>& f, int j) {
      return line_deriv(f, j, n, g.h2, 1, opt.order);
    };
    auto d2 = [&](const std::vector<double>& f, int j) {
      return line_deriv(f, j, n, g.h2, 2, opt.order);
    };
    std::vector<double> Pv(n), Qv(n), Fv(n);
    std::vector<double> dtg11(n), dtg22(n), dtg12(n), dtp11(n), dtp22(n);
    std::vector<double> dttg11(n), dttg22(n), dttg12(n);
    for (int j = 0; j < n; ++j) {
      dtg11[j] = d1(y.g11, j);
      dtg22[j] = d1(y.g22, j);
      dtg12[j] = d1(y.g12, j);
      dtp11[j] = d1(y.p11, j);
      dtp22[j] = d1(y.p22, j);
      dttg11[j] = d2(y.g11, j);
      dttg22[j] = d2(y.g22, j);
      dttg12[j] = d2(y.g12, j);
    }
    for (int j = 0; j < n; ++j) {
      const double L = T.at(T.L, s, j), M = T.at(T.M, s, j),
                   N = T.at(T.N, s, j);
      if (std::abs(L) < 1e-10 || std::abs(N) < 1e-10) return false;
      double P, Q;
      pq_solve<double>(y.g11[j], y.g12[j], y.g22[j], y.p11[j] + dtg11[j],
                       y.p11[j] - dtg11[j], y.p22[j] + dtg22[j],
                       y.p22[j] - dtg22[j], L, M, N, T.at(T.r, s, j),
                       T.at(T.st, s, j), P, Q);
      Pv[j] = P;
      Qv[j] = Q;
      Fv[j] = 0.5 * (P + Q) + f3(s, g.x2(j));
    }
    std::vector<double> dtP(n), dtQ(n), dtF(n);
    for (int j = 0; j < n; ++j) {
      dtP[j] = d1(Pv, j);
      dtQ[j] = d1(Qv, j);
      dtF[j] = d1(Fv, j);
    }
    const double dlt = 1e-4;
    for (int j = 0; j < n; ++j) {
      const double tau = g.x2(j);
      const double L = T.at(T.L, s, j), M = T.at(T.M, s, j),
                   N = T.at(T.N, s, j);
      const double f3s =
          opt.f3 ? (opt.f3(s + dlt, tau) - opt.f3(s - dlt, tau)) / (2.0 * dlt)
                 : 0.0;
      // Residuals of the curvature equation and the cross-derivative
      // consistency equation, affine in (a11, a22) = (dss g11, dss g22).
      auto residual = [&](double a11, double a22, double& R1, double& R2) {
        const Dn G11{y.g11[j], y.p11[j]}, G22{y.g22[j], y.p22[j]},
            G12{y.g12[j], Fv[j]};
        const Dn D1g11{y.p11[j] + dtg11[j], a11 + dtp11[j]};
        const Dn D2g11{y.p11[j] - dtg11[j], a11 - dtp11[j]};
        const Dn D1g22{y.p22[j] + dtg22[j], a22 + dtp22[j]};
        const Dn D2g22{y.p22[j] - dtg22[j], a22 - dtp22[j]};
        const Dn Ld{L, T.at(T.dsL, s, j)}, Md{M, T.at(T.dsM, s, j)},
            Nd{N, T.at(T.dsN, s, j)};
        const Dn rd{T.at(T.r, s, j), T.at(T.dsr, s, j)};
        const Dn std_{T.at(T.st, s, j), T.at(T.dsst, s, j)};
        Dn Pd, Qd;
        pq_solve<Dn>(G11, G12, G22, D1g11, D2g11, D1g22, D2g22, Ld, Md, Nd, rd,
                     std_, Pd, Qd);
        const double dsF = 0.5 * (Pd.d + Qd.d) + f3s;
        R2 = (Pd.d - dtP[j]) - (Qd.d + dtQ[j]) - f2(s, tau);

        MetricJet mj;
        mj.g11 = y.g11[j];
        mj.g12 = y.g12[j];
        mj.g22 = y.g22[j];
        mj.d1g11 = y.p11[j] + dtg11[j];
        mj.d2g11 = y.p11[j] - dtg11[j];
        mj.d1g22 = y.p22[j] + dtg22[j];
        mj.d2g22 = y.p22[j] - dtg22[j];
        mj.d1g12 = Fv[j] + dtg12[j];
        mj.d2g12 = Fv[j] - dtg12[j];
        mj.d11g11 = a11 + 2.0 * dtp11[j] + dttg11[j];
        mj.d22g11 = a11 - 2.0 * dtp11[j] + dttg11[j];
        mj.d12g11 = a11 - dttg11[j];
        mj.d11g22 = a22 + 2.0 * dtp22[j] + dttg22[j];
        mj.d22g22 = a22 - 2.0 * dtp22[j] + dttg22[j];
        mj.d12g22 = a22 - dttg22[j];
        mj.d11g12 = dsF + 2.0 * dtF[j] + dttg12[j];
        mj.d22g12 = dsF - 2.0 * dtF[j] + dttg12[j];
        mj.d12g12 = dsF - dttg12[j];
        R1 = brioschi_point(mj) - T.at(T.kap, s, j) - f1(s, tau);
      };
      double R10, R20, R1a, R2a, R1b, R2b;
      residual(0.0, 0.0, R10, R20);
      residual(1.0, 0.0, R1a, R2a);
      residual(0.0, 1.0, R1b, R2b);
      const double c11 = R1a - R10, c12 = R1b - R10;
      const double c21 = R2a - R20, c22 = R2b - R20;
      const double det = c11 * c22 - c12 * c21;
      const double scale = std::max({std::abs(c11), std::abs(c12),
                                     std::abs(c21), std::abs(c22), 1e-30});
      if (std::abs(det) < 1e-10 * scale * scale) return false;
      const double a11 = (-R10 * c22 + R20 * c12) / det;
      const double a22 = (-c11 * R20 + c21 * R10) / det;
      rhs.g11[j] = y.p11[j];
      rhs.g22[j] = y.p22[j];
      rhs.g12[j] = Fv[j];
      rhs.p11[j] = a11;
      rhs.p22[j] = a22;
    }
    return true;
  };

  auto filter = [&](std::vector<double>& f) {
    std::vector<double> tmp = f;
    for (int j = 2; j < n - 2; ++j)
      tmp[j] = (-f[j - 2] + 4.0 * f[j - 1] + 10.0 * f[j] + 4.0 * f[j + 1] -
                f[j + 2]) /
               16.0;
    f = std::move(tmp);
  };

  MarchResult res;
  res.levels = 1;
  res.truncated = false;
  MarchState rhs1{std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n)};
  MarchState rhs2 = rhs1;
  for (int k = 0; k < steps; ++k) {
    const double s0 = g.x1(k);
    if (!eval_rhs(st, s0, rhs1)) {
      res.truncated = true;
      break;
    }
    MarchState mid = axpy(st, 0.5 * g.h1, rhs1);
    if (!eval_rhs(mid, s0 + 0.5 * g.h1, rhs2)) {
      res.truncated = true;
      break;
    }
    MarchState next = axpy(st, g.h1, rhs2);
    if (opt.filter) {
      filter(next.g11);
      filter(next.g22);
      filter(next.g12);
      filter(next.p11);
      filter(next.p22);
    }
    bool spd = true;
    for (int j = 0; j < n; ++j) {
      const double det =
          next.g11[j] * next.g22[j] - next.g12[j] * next.g12[j];
      if (!(next.g11[j] > 0.0) || !(det > kDetFloor)) {
        spd = false;
        break;
      }
    }
    if (!spd) {
      res.truncated = true;
      break;
    }
    st = std::move(next);
    write_level(k + 1, st);
    res.levels = k + 2;
  }
  if (res.levels - 1 < steps) res.truncated = true;
  res.width = (res.levels - 1) * g.h1;
  res.g = std::move(out);
  return res;
}

// ---------------------------------------------------------------------------
// Constraint residuals
// ---------------------------------------------------------------------------

ConstraintResiduals constraint_residuals(const FundamentalForm& ff,
                                         const MetricField& g,
                                         bool rotated_chart, int order) {
  require_same_grid(ff.grid(), g.grid(), "constraint_residuals");
  const Grid2D& grid = ff.grid();

  auto d_orig = [&](const ScalarField& f, int i, int j, int which) {
    if (!rotated_chart)
      return deriv(f, i, j, which == 1 ? fd::Part::d1 : fd::Part::d2, order);
    const double fs = deriv(f, i, j, fd::Part::d1, order);
    const double ft = deriv(f, i, j, fd::Part::d2, order);
    return which == 1 ? fs + ft : fs - ft;
  };

  // Velocity magnitudes and flow right-hand sides as tabulated fields so the
  // divergence residuals can be taken by stencils.
  ScalarField U(grid), V(grid), fu(grid), fv(grid);
  std::vector<ChristoffelValues> cv(grid.size());
  std::vector<double> kap(grid.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double L = ff.L.at(i, j), M = ff.M.at(i, j), N = ff.N.at(i, j);
      const double sdisc = std::sqrt((L - N) * (L - N) + 4.0 * M * M);
      U.at(i, j) = std::sqrt(std::max(0.0, 0.5 * (-(L - N) + sdisc)));
      V.at(i, j) = std::sqrt(std::max(0.0, 0.5 * ((L - N) + sdisc)));
      MetricJet mj = metric_jet(g, i, j, order, true);
      if (rotated_chart) mj = rotate_jet(mj);
      const std::size_t k = grid.index(i, j);
      cv[k] = christoffel_point(mj);
      kap[k] = brioschi_point(mj);
      fu.at(i, j) = cv[k].c122 * L - 2.0 * cv[k].c112 * M + cv[k].c111 * N;
      fv.at(i, j) = cv[k].c222 * L - 2.0 * cv[k].c212 * M + cv[k].c211 * N;
    }

  ConstraintResiduals out{ScalarField(grid), ScalarField(grid),
                          ScalarField(grid), ScalarField(grid),
                          ScalarField(grid)};
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const double L = ff.L.at(i, j), M = ff.M.at(i, j), N = ff.N.at(i, j);
      out.c1.at(i, j) = d_orig(U, i, j, 1) + d_orig(V, i, j, 2);
      out.c2.at(i, j) = d_orig(fu, i, j, 1) + d_orig(fv, i, j, 2);
      out.c3.at(i, j) = d_orig(ff.N, i, j, 1) - d_orig(ff.M, i, j, 2) +
                        cv[k].c122 * L - 2.0 * cv[k].c112 * M +
                        cv[k].c111 * N;
      out.c4.at(i, j) = d_orig(ff.M, i, j, 1) - d_orig(ff.L, i, j, 2) -
                        cv[k].c222 * L + 2.0 * cv[k].c212 * M -
                        cv[k].c211 * N;
      out.c5.at(i, j) = L * N - M * M - kap[k];
    }
  return out;
}

}  // namespace wrinkle
