#include "wrinkle/developable.hpp"

#include <cmath>
#include <sstream>

#include "wrinkle/errors.hpp"

namespace wrinkle {

namespace {

// d/dx2 of the state (f, f') under the profile equation.
struct SlopeRhs {
  const ShearProfile& sp;
  void operator()(double x2, const double y[2], double dy[2]) const {
    const double u = sp.u(x2);
    dy[0] = y[1];
    dy[1] = -u * u * (y[1] * y[1] + sp.A * sp.A);
  }
};

// Second derivative f'' from the profile equation at (x2, f').
double fpp_of(const ShearProfile& sp, double x2, double fp) {
  const double u = sp.u(x2);
  return -u * u * (fp * fp + sp.A * sp.A);
}

// Third derivative f''' ; u^2 is differentiated by a central difference
// since the profile carries no derivative callback.
double fppp_of(const ShearProfile& sp, double x2, double fp) {
  const double d = 1e-6;
  const double up = sp.u(x2 + d), um = sp.u(x2 - d);
  const double du2 = (up * up - um * um) / (2.0 * d);
  const double u = sp.u(x2);
  const double fpp = fpp_of(sp, x2, fp);
  return -du2 * (fp * fp + sp.A * sp.A) - u * u * 2.0 * fp * fpp;
}

}  // namespace

ShearProfile::ShearProfile(std::function<double(double)> u_, double A_)
    : u(std::move(u_)), A(A_) {
  if (!u) throw ValidationError("ShearProfile: missing shear function");
  if (!(A > 1.0))
    throw ValidationError("ShearProfile: stretch factor A must exceed 1");
}

std::pair<double, double> shear_slope_point(const ShearProfile& sp,
                                            double x2) {
  const SlopeRhs rhs{sp};
  const double guard = 10.0 * sp.A;
  const int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(x2) * 512.0)));
  const double h = x2 / nsub;
  double y[2] = {0.0, 0.0};
  for (int k = 0; k < nsub; ++k) {
    const double t = k * h;
    double k1[2], k2[2], k3[2], k4[2], tmp[2];
    rhs(t, y, k1);
    tmp[0] = y[0] + 0.5 * h * k1[0];
    tmp[1] = y[1] + 0.5 * h * k1[1];
    rhs(t + 0.5 * h, tmp, k2);
    tmp[0] = y[0] + 0.5 * h * k2[0];
    tmp[1] = y[1] + 0.5 * h * k2[1];
    rhs(t + 0.5 * h, tmp, k3);
    tmp[0] = y[0] + h * k3[0];
    tmp[1] = y[1] + h * k3[1];
    rhs(t + h, tmp, k4);
    y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    if (!std::isfinite(y[1]) || std::abs(y[1]) > guard) {
      std::ostringstream msg;
      msg << "shear profile slope crossed the guard |f'| = 10 A near x2 = "
          << t + h << " (requested " << x2 << ")";
      throw ProfileBlowup(msg.str());
    }
  }
  return {y[0], y[1]};
}

double min_eigenvalue_sym(double a, double b, double c) {
  return 0.5 * (a + c) - std::hypot(0.5 * (a - c), b);
}

ScalarField shear_profile_slope(const ShearProfile& sp, const Grid2D& g) {
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j) {
    const double fp = shear_slope_point(sp, g.x2(j)).second;
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = fp;
  }
  ScalarClosure c;
  c.f = [sp](double, double b) { return shear_slope_point(sp, b).second; };
  c.f1 = c.f11 = c.f12 = [](double, double) { return 0.0; };
  c.f2 = [sp](double, double b) {
    return fpp_of(sp, b, shear_slope_point(sp, b).second);
  };
  c.f22 = [sp](double, double b) {
    return fppp_of(sp, b, shear_slope_point(sp, b).second);
  };
  out.closure = c;
  return out;
}

Immersion shear_surface(const ShearProfile& sp, const Grid2D& g) {
  const double A = sp.A;
  ImmersionClosure c;
  c.y = [sp, A](double a, double b) {
    return Eigen::Vector3d(A * b, A * a, shear_slope_point(sp, b).first);
  };
  c.d1 = [A](double, double) { return Eigen::Vector3d(0.0, A, 0.0); };
  c.d2 = [sp, A](double, double b) {
    return Eigen::Vector3d(A, 0.0, shear_slope_point(sp, b).second);
  };
  c.d11 = c.d12 = [](double, double) { return Eigen::Vector3d::Zero().eval(); };
  c.d22 = [sp](double, double b) {
    const double fp = shear_slope_point(sp, b).second;
    return Eigen::Vector3d(0.0, 0.0, fpp_of(sp, b, fp));
  };
  return Immersion::from_closure(g, std::move(c));
}

MetricField gstar_metric(const ShearProfile& sp, const Grid2D& g) {
  const double A2 = sp.A * sp.A;
  ScalarClosure c11;
  c11.f = [A2](double, double) { return A2; };
  c11.f1 = c11.f2 = c11.f11 = c11.f12 = c11.f22 =
      [](double, double) { return 0.0; };
  ScalarClosure c12 = c11;
  c12.f = [](double, double) { return 0.0; };
  ScalarClosure c22;
  c22.f = [sp, A2](double, double b) {
    const double fp = shear_slope_point(sp, b).second;
    return fp * fp + A2;
  };
  c22.f1 = c22.f11 = c22.f12 = [](double, double) { return 0.0; };
  c22.f2 = [sp](double, double b) {
    const double fp = shear_slope_point(sp, b).second;
    return 2.0 * fp * fpp_of(sp, b, fp);
  };
  c22.f22 = [sp](double, double b) {
    const double fp = shear_slope_point(sp, b).second;
    const double fpp = fpp_of(sp, b, fp);
    return 2.0 * fpp * fpp + 2.0 * fp * fppp_of(sp, b, fp);
  };
  return MetricField(ScalarField::from_closure(g, c11),
                     ScalarField::from_closure(g, c12),
                     ScalarField::from_closure(g, c22));
}

ScalarField shortness_margin(const MetricField& g, const MetricField& gstar) {
  require_same_grid(g.g11.grid, gstar.g11.grid, "shortness_margin");
  ScalarField out(g.g11.grid);
  for (int j = 0; j < out.grid.ny; ++j)
    for (int i = 0; i < out.grid.nx; ++i)
      out.at(i, j) = min_eigenvalue_sym(
          gstar.g11.at(i, j) - g.g11.at(i, j),
          gstar.g12.at(i, j) - g.g12.at(i, j),
          gstar.g22.at(i, j) - g.g22.at(i, j));
  return out;
}

double energy(const MetricField& g) {
  require_same_grid(g.g11.grid, g.g22.grid, "energy");
  const Grid2D& gr = g.g11.grid;
  double acc = 0.0;
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      double w = 1.0;
      if (i == 0 || i == gr.nx - 1) w *= 0.5;
      if (j == 0 || j == gr.ny - 1) w *= 0.5;
      acc += w * (g.g11.at(i, j) + g.g22.at(i, j));
    }
  return acc * gr.h1 * gr.h2;
}

double energy(const Immersion& y) { return energy(induced_metric(y)); }

}  // namespace wrinkle
