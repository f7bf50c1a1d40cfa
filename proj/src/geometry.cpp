/// @file geometry.cpp
/// @brief Implementation of the differential-geometry primitives.

#include "wrinkle/geometry.hpp"

#include <cmath>

namespace wrinkle {

// ---------------------------------------------------------------------------
// Immersion derivative access
// ---------------------------------------------------------------------------

namespace {
Eigen::Vector3d stencil_vec(const Immersion& im, int i, int j, fd::Part part) {
  return fd::stencil_deriv(
      im.grid, [&im](int a, int b) { return im.at(a, b); }, i, j, part,
      im.order);
}
}  // namespace

Eigen::Vector3d Immersion::d1(int i, int j) const {
  if (closure && closure->d1) return closure->d1(grid.x1(i), grid.x2(j));
  if (has_tangents()) return t1[grid.index(i, j)];
  return stencil_vec(*this, i, j, fd::Part::d1);
}

Eigen::Vector3d Immersion::d2(int i, int j) const {
  if (closure && closure->d2) return closure->d2(grid.x1(i), grid.x2(j));
  if (has_tangents()) return t2[grid.index(i, j)];
  return stencil_vec(*this, i, j, fd::Part::d2);
}

Eigen::Vector3d Immersion::d11(int i, int j) const {
  if (closure && closure->d11) return closure->d11(grid.x1(i), grid.x2(j));
  if (has_tangents())
    return fd::stencil_deriv(
        grid, [this](int a, int b) { return t1[grid.index(a, b)]; }, i, j,
        fd::Part::d1, order);
  return stencil_vec(*this, i, j, fd::Part::d11);
}

Eigen::Vector3d Immersion::d12(int i, int j) const {
  if (closure && closure->d12) return closure->d12(grid.x1(i), grid.x2(j));
  if (has_tangents())
    return fd::stencil_deriv(
        grid, [this](int a, int b) { return t1[grid.index(a, b)]; }, i, j,
        fd::Part::d2, order);
  return stencil_vec(*this, i, j, fd::Part::d12);
}

Eigen::Vector3d Immersion::d22(int i, int j) const {
  if (closure && closure->d22) return closure->d22(grid.x1(i), grid.x2(j));
  if (has_tangents())
    return fd::stencil_deriv(
        grid, [this](int a, int b) { return t2[grid.index(a, b)]; }, i, j,
        fd::Part::d2, order);
  return stencil_vec(*this, i, j, fd::Part::d22);
}

Immersion Immersion::tabulate(const Grid2D& g, const ImmersionClosure::VFn& fn,
                              int order) {
  Immersion im;
  im.grid = g;
  im.order = order;
  im.y.resize(g.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) im.at(i, j) = fn(g.x1(i), g.x2(j));
  return im;
}

Immersion Immersion::from_closure(const Grid2D& g, ImmersionClosure c,
                                  int order) {
  Immersion im = tabulate(g, c.y, order);
  im.closure = std::move(c);
  return im;
}

// ---------------------------------------------------------------------------
// Pointwise kernels
// ---------------------------------------------------------------------------

void MetricField::require_spd(const char* where) const {
  const Grid2D& g = grid();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!(g11.at(i, j) > 0.0) || det(i, j) < kDetFloor)
        throw SingularMetric(std::string(where) +
                             ": metric not SPD (det below floor) at node (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
    }
}

ChristoffelValues christoffel_point(const MetricJet& m) {
  const double D = m.det();
  const double inv2D = 1.0 / (2.0 * D);
  ChristoffelValues c;
  c.c111 = inv2D * (m.g22 * m.d1g11 - m.g12 * (2.0 * m.d1g12 - m.d2g11));
  c.c112 = inv2D * (m.g22 * m.d2g11 - m.g12 * m.d1g22);
  c.c122 = inv2D * (m.g22 * (2.0 * m.d2g12 - m.d1g22) - m.g12 * m.d2g22);
  c.c211 = inv2D * (-m.g12 * m.d1g11 + m.g11 * (2.0 * m.d1g12 - m.d2g11));
  c.c212 = inv2D * (-m.g12 * m.d2g11 + m.g11 * m.d1g22);
  c.c222 = inv2D * (-m.g12 * (2.0 * m.d2g12 - m.d1g22) + m.g11 * m.d2g22);
  return c;
}

double brioschi_point(const MetricJet& m) {
  const double D = m.det();
  const double T = -m.d22g11 + 2.0 * m.d12g12 - m.d11g22;
  auto det3 = [](double a11, double a12, double a13, double a21, double a22,
                 double a23, double a31, double a32, double a33) {
    return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) +
           a13 * (a21 * a32 - a22 * a31);
  };
  const double det1 =
      det3(T, m.d1g11, 2.0 * m.d1g12 - m.d2g11,
           2.0 * m.d2g12 - m.d1g22, 2.0 * m.g11, 2.0 * m.g12,
           m.d2g22, 2.0 * m.g12, 2.0 * m.g22);
  const double det2 =
      det3(0.0, m.d2g11, m.d1g22,
           m.d2g11, 2.0 * m.g11, 2.0 * m.g12,
           m.d1g22, 2.0 * m.g12, 2.0 * m.g22);
  // The doubled-row matrices carry a factor 8 relative to the classical
  // Brioschi matrices, hence the 1/8 normalization (validated on sphere and
  // polar metrics).
  return (det1 - det2) / (8.0 * D * D);
}

MetricJet metric_jet(const MetricField& g, int i, int j, int order,
                     bool second) {
  MetricJet m;
  m.g11 = g.g11.at(i, j);
  m.g12 = g.g12.at(i, j);
  m.g22 = g.g22.at(i, j);
  m.d1g11 = deriv(g.g11, i, j, fd::Part::d1, order);
  m.d2g11 = deriv(g.g11, i, j, fd::Part::d2, order);
  m.d1g12 = deriv(g.g12, i, j, fd::Part::d1, order);
  m.d2g12 = deriv(g.g12, i, j, fd::Part::d2, order);
  m.d1g22 = deriv(g.g22, i, j, fd::Part::d1, order);
  m.d2g22 = deriv(g.g22, i, j, fd::Part::d2, order);
  if (second) {
    m.d11g11 = deriv(g.g11, i, j, fd::Part::d11, order);
    m.d12g11 = deriv(g.g11, i, j, fd::Part::d12, order);
    m.d22g11 = deriv(g.g11, i, j, fd::Part::d22, order);
    m.d11g12 = deriv(g.g12, i, j, fd::Part::d11, order);
    m.d12g12 = deriv(g.g12, i, j, fd::Part::d12, order);
    m.d22g12 = deriv(g.g12, i, j, fd::Part::d22, order);
    m.d11g22 = deriv(g.g22, i, j, fd::Part::d11, order);
    m.d12g22 = deriv(g.g22, i, j, fd::Part::d12, order);
    m.d22g22 = deriv(g.g22, i, j, fd::Part::d22, order);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Field operations
// ---------------------------------------------------------------------------

MetricField induced_metric(const Immersion& im) {
  const Grid2D& g = im.grid;
  ScalarField g11(g), g12(g), g22(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Eigen::Vector3d a = im.d1(i, j), b = im.d2(i, j);
      g11.at(i, j) = a.dot(a);
      g12.at(i, j) = a.dot(b);
      g22.at(i, j) = b.dot(b);
      if (g11.at(i, j) * g22.at(i, j) - g12.at(i, j) * g12.at(i, j) <= 0.0)
        throw DegenerateSurface("induced_metric: det g <= 0 at node (" +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ")");
    }
  return MetricField(std::move(g11), std::move(g12), std::move(g22));
}

FundamentalForm second_fundamental_form(const Immersion& im) {
  const Grid2D& g = im.grid;
  ScalarField L(g), M(g), N(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Eigen::Vector3d a = im.d1(i, j), b = im.d2(i, j);
      const Eigen::Vector3d cr = a.cross(b);
      const double det = cr.squaredNorm();  // |d1 x d2|^2 = det g
      if (det <= 0.0)
        throw DegenerateSurface("second_fundamental_form: degenerate at node (" +
                                std::to_string(i) + ", " + std::to_string(j) +
                                ")");
      // Normalized convention: n/|cr| dotted with second derivatives, then an
      // extra 1/sqrt(det g); combined this is cr / det g.
      const Eigen::Vector3d w = cr / det;
      L.at(i, j) = w.dot(im.d11(i, j));
      M.at(i, j) = w.dot(im.d12(i, j));
      N.at(i, j) = w.dot(im.d22(i, j));
    }
  return FundamentalForm(std::move(L), std::move(M), std::move(N));
}

ChristoffelField christoffel(const MetricField& g, int order) {
  g.require_spd("christoffel");
  const Grid2D& gr = g.grid();
  ChristoffelField out{ScalarField(gr), ScalarField(gr), ScalarField(gr),
                       ScalarField(gr), ScalarField(gr), ScalarField(gr)};
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      const ChristoffelValues c =
          christoffel_point(metric_jet(g, i, j, order, /*second=*/false));
      out.c111.at(i, j) = c.c111;
      out.c112.at(i, j) = c.c112;
      out.c122.at(i, j) = c.c122;
      out.c211.at(i, j) = c.c211;
      out.c212.at(i, j) = c.c212;
      out.c222.at(i, j) = c.c222;
    }
  return out;
}

ScalarField brioschi_curvature(const MetricField& g, int order) {
  g.require_spd("brioschi_curvature");
  const Grid2D& gr = g.grid();
  ScalarField out(gr);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      out.at(i, j) = brioschi_point(metric_jet(g, i, j, order));
  return out;
}

ScalarField riemann_R1212(const MetricField& g, int order) {
  g.require_spd("riemann_R1212");
  const Grid2D& gr = g.grid();
  const ChristoffelField G = christoffel(g, order);
  ScalarField out(gr);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      const double d2c111 = deriv(G.c111, i, j, fd::Part::d2, order);
      const double d1c112 = deriv(G.c112, i, j, fd::Part::d1, order);
      const double d2c211 = deriv(G.c211, i, j, fd::Part::d2, order);
      const double d1c212 = deriv(G.c212, i, j, fd::Part::d1, order);
      const double c111 = G.c111.at(i, j), c112 = G.c112.at(i, j);
      const double c122 = G.c122.at(i, j), c211 = G.c211.at(i, j);
      const double c212 = G.c212.at(i, j), c222 = G.c222.at(i, j);
      const double b1 = d2c111 - d1c112 + c211 * c122 - c212 * c112;
      const double b2 = d2c211 - d1c212 + c111 * c212 + c211 * c222 -
                        c112 * c211 - c212 * c212;
      out.at(i, j) = g.g12.at(i, j) * b1 + g.g22.at(i, j) * b2;
    }
  return out;
}

std::pair<ScalarField, ScalarField> codazzi_residual(const FundamentalForm& ff,
                                                     const ChristoffelField& G,
                                                     int order) {
  require_same_grid(ff.grid(), G.grid(), "codazzi_residual");
  const Grid2D& gr = ff.grid();
  ScalarField r1(gr), r2(gr);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i) {
      const double L = ff.L.at(i, j), M = ff.M.at(i, j), N = ff.N.at(i, j);
      const double d1N = deriv(ff.N, i, j, fd::Part::d1, order);
      const double d2M = deriv(ff.M, i, j, fd::Part::d2, order);
      const double d1M = deriv(ff.M, i, j, fd::Part::d1, order);
      const double d2L = deriv(ff.L, i, j, fd::Part::d2, order);
      r1.at(i, j) = d1N - d2M + G.c122.at(i, j) * L -
                    2.0 * G.c112.at(i, j) * M + G.c111.at(i, j) * N;
      r2.at(i, j) = d1M - d2L - G.c222.at(i, j) * L +
                    2.0 * G.c212.at(i, j) * M - G.c211.at(i, j) * N;
    }
  return {std::move(r1), std::move(r2)};
}

ScalarField gauss_residual(const FundamentalForm& ff, const ScalarField& kappa) {
  require_same_grid(ff.grid(), kappa.grid, "gauss_residual");
  const Grid2D& gr = ff.grid();
  ScalarField out(gr);
  for (int j = 0; j < gr.ny; ++j)
    for (int i = 0; i < gr.nx; ++i)
      out.at(i, j) = ff.L.at(i, j) * ff.N.at(i, j) -
                     ff.M.at(i, j) * ff.M.at(i, j) - kappa.at(i, j);
  return out;
}

}  // namespace wrinkle
