/// @file grid.hpp
/// @brief Uniform rectangular sample grid and node-valued scalar fields.
///
/// PURPOSE: the common discretization substrate. A Grid2D is a uniform
/// rectangular lattice of nodes in dimensionless coordinates (x1, x2); a
/// ScalarField stores one real value per node and may additionally carry an
/// analytic closure (exact value/derivative callbacks). Operations that need
/// derivatives prefer the closure when present, which separates
/// discretization error from formula error in tests.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wrinkle/errors.hpp"

namespace wrinkle {

/// Uniform rectangular node grid. Immutable value object.
struct Grid2D {
  int nx = 0;       ///< node count along x1 (>= 5)
  int ny = 0;       ///< node count along x2 (>= 5)
  double h1 = 0.0;  ///< spacing along x1 (> 0)
  double h2 = 0.0;  ///< spacing along x2 (> 0)
  double x10 = 0.0; ///< origin, x1 coordinate of node (0, 0)
  double x20 = 0.0; ///< origin, x2 coordinate of node (0, 0)

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double h1_, double h2_, double x10_ = 0.0,
         double x20_ = 0.0)
      : nx(nx_), ny(ny_), h1(h1_), h2(h2_), x10(x10_), x20(x20_) {
    if (nx < 5 || ny < 5)
      throw ValidationError("Grid2D: need nx, ny >= 5, got " +
                            std::to_string(nx) + "x" + std::to_string(ny));
    if (!(h1 > 0.0) || !(h2 > 0.0))
      throw ValidationError("Grid2D: spacings must be positive");
  }

  /// Convenience: grid covering [x10, x10+L1] x [x20, x20+L2] with nx*ny nodes.
  static Grid2D covering(int nx, int ny, double L1, double L2,
                         double x10 = 0.0, double x20 = 0.0) {
    return Grid2D(nx, ny, L1 / (nx - 1), L2 / (ny - 1), x10, x20);
  }

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  double x1(int i) const { return x10 + i * h1; }
  double x2(int j) const { return x20 + j * h2; }

  bool same_as(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && h1 == o.h1 && h2 == o.h2 &&
           x10 == o.x10 && x20 == o.x20;
  }
};

inline void require_same_grid(const Grid2D& a, const Grid2D& b,
                              const char* where) {
  if (!a.same_as(b))
    throw GridMismatch(std::string(where) + ": operands live on different grids");
}

/// Analytic closure for a scalar field: exact value and partial derivatives.
/// Any callback may be empty; consumers fall back to stencils for missing
/// entries. All callbacks take (x1, x2).
struct ScalarClosure {
  using Fn = std::function<double(double, double)>;
  Fn f;   ///< value
  Fn f1;  ///< d/dx1
  Fn f2;  ///< d/dx2
  Fn f11; ///< d2/dx1^2
  Fn f12; ///< d2/dx1 dx2
  Fn f22; ///< d2/dx2^2
};

/// One real value per grid node, optionally backed by an analytic closure.
struct ScalarField {
  Grid2D grid;
  std::vector<double> v;
  std::optional<ScalarClosure> closure;

  ScalarField() = default;
  explicit ScalarField(const Grid2D& g, double fill = 0.0)
      : grid(g), v(g.size(), fill) {}

  double& at(int i, int j) { return v[grid.index(i, j)]; }
  double at(int i, int j) const { return v[grid.index(i, j)]; }

  /// Tabulate fn over the grid; no closure attached.
  static ScalarField tabulate(const Grid2D& g,
                              const std::function<double(double, double)>& fn) {
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        out.at(i, j) = fn(g.x1(i), g.x2(j));
    return out;
  }

  /// Tabulate a closure's value and keep the closure for exact derivatives.
  static ScalarField from_closure(const Grid2D& g, ScalarClosure c) {
    ScalarField out = tabulate(g, c.f);
    out.closure = std::move(c);
    return out;
  }

  /// Max |value| over all nodes.
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  /// Max |value| over the interior excluding `skip` boundary nodes per side.
  double max_abs_interior(int skip = 2) const {
    double m = 0.0;
    for (int j = skip; j < grid.ny - skip; ++j)
      for (int i = skip; i < grid.nx - skip; ++i)
        m = std::max(m, std::abs(at(i, j)));
    return m;
  }
};

}  // namespace wrinkle
