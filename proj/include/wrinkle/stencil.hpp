/// @file stencil.hpp
/// @brief Finite-difference stencils: central in the interior, one-sided at
/// the boundary, order 2 (default) or 4.
///
/// Weights are generated with Fornberg's recurrence for arbitrary node
/// windows, so boundary stencils keep the nominal order. Mixed partials are
/// tensor products of two first-derivative windows. Fields carrying analytic
/// closures short-circuit to the exact callbacks.

#pragma once

#include <array>
#include <cmath>
#include <type_traits>

#include "wrinkle/grid.hpp"

namespace wrinkle {
namespace fd {

constexpr int kMaxWindow = 6;

/// A one-dimensional derivative stencil: `n` taps starting at node `start`.
struct Window {
  int start = 0;
  int n = 0;
  std::array<double, kMaxWindow> w{};
};

/// Fornberg weights for the m-th derivative at x0 = 0 on integer-offset nodes
/// xs[0..n-1] (units of the grid spacing). Exact for polynomials of degree
/// n-1; divide by h^m to use on a physical grid.
inline std::array<double, kMaxWindow> fornberg(const double* xs, int n, int m,
                                               double x0) {
  // c[k][j]: weight of node j for the k-th derivative, built incrementally.
  double c[3][kMaxWindow] = {};
  double c1 = 1.0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    double c2 = 1.0;
    const int mn = std::min(i, m);
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] -
                          (xs[i - 1] - x0) * c[k][i - 1]) / c2;
        c[0][i] = -c1 * (xs[i - 1] - x0) * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[k][j] = ((xs[i] - x0) * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = (xs[i] - x0) * c[0][j] / c3;
    }
    c1 = c2;
  }
  std::array<double, kMaxWindow> out{};
  for (int j = 0; j < n; ++j) out[j] = c[m][j];
  return out;
}

/// Stencil for the m-th derivative (m = 1 or 2) at node `idx` on an axis with
/// `npts` nodes and spacing `h`, at the requested accuracy order (2 or 4).
/// Centered where possible, clamped one-sided windows at the boundary.
inline Window axis_window(int idx, int npts, double h, int m, int order) {
  int n;
  if (m == 1) {
    n = (order >= 4) ? 5 : 3;
  } else {
    // Symmetric 3-/5-point windows gain one order; wider clamped windows keep
    // the nominal order near the boundary.
    const int half = (order >= 4) ? 2 : 1;
    if (idx >= half && idx < npts - half) {
      n = 2 * half + 1;
    } else {
      n = (order >= 4) ? 6 : 4;
    }
  }
  if (n > npts) n = npts;
  int start = idx - n / 2;
  if (start < 0) start = 0;
  if (start > npts - n) start = npts - n;

  double xs[kMaxWindow];
  for (int k = 0; k < n; ++k) xs[k] = static_cast<double>(start + k - idx);
  Window win;
  win.start = start;
  win.n = n;
  win.w = fornberg(xs, n, m, 0.0);
  const double scale = (m == 1) ? 1.0 / h : 1.0 / (h * h);
  for (int k = 0; k < n; ++k) win.w[k] *= scale;
  return win;
}

/// Which partial derivative to take.
enum class Part { d1, d2, d11, d12, d22 };

/// Stencil derivative of a node-sampler `s(i, j)` (returns anything closed
/// under scalar multiplication and +=, e.g. double or Eigen::Vector3d).
template <class Sampler>
auto stencil_deriv(const Grid2D& g, const Sampler& s, int i, int j, Part part,
                   int order) {
  using Value = std::remove_cvref_t<decltype(s(0, 0))>;
  auto along1 = [&](int m) {
    Window w = axis_window(i, g.nx, g.h1, m, order);
    Value acc = s(w.start, j) * w.w[0];
    for (int k = 1; k < w.n; ++k) acc += s(w.start + k, j) * w.w[k];
    return acc;
  };
  auto along2 = [&](int m) {
    Window w = axis_window(j, g.ny, g.h2, m, order);
    Value acc = s(i, w.start) * w.w[0];
    for (int k = 1; k < w.n; ++k) acc += s(i, w.start + k) * w.w[k];
    return acc;
  };
  switch (part) {
    case Part::d1: return along1(1);
    case Part::d2: return along2(1);
    case Part::d11: return along1(2);
    case Part::d22: return along2(2);
    case Part::d12: {
      Window w1 = axis_window(i, g.nx, g.h1, 1, order);
      Window w2 = axis_window(j, g.ny, g.h2, 1, order);
      Value acc = s(w1.start, w2.start) * (w1.w[0] * w2.w[0]);
      bool first = true;
      for (int a = 0; a < w1.n; ++a)
        for (int b = 0; b < w2.n; ++b) {
          if (first) { first = false; continue; }
          acc += s(w1.start + a, w2.start + b) * (w1.w[a] * w2.w[b]);
        }
      return acc;
    }
  }
  return Value{};
}

}  // namespace fd

/// Derivative of a scalar field at one node: exact closure callback when
/// available, otherwise finite differences of the tabulated values.
inline double deriv(const ScalarField& f, int i, int j, fd::Part part,
                    int order = 2) {
  if (f.closure) {
    const ScalarClosure& c = *f.closure;
    const double x1 = f.grid.x1(i), x2 = f.grid.x2(j);
    switch (part) {
      case fd::Part::d1: if (c.f1) return c.f1(x1, x2); break;
      case fd::Part::d2: if (c.f2) return c.f2(x1, x2); break;
      case fd::Part::d11: if (c.f11) return c.f11(x1, x2); break;
      case fd::Part::d12: if (c.f12) return c.f12(x1, x2); break;
      case fd::Part::d22: if (c.f22) return c.f22(x1, x2); break;
    }
  }
  return fd::stencil_deriv(
      f.grid, [&f](int a, int b) { return f.at(a, b); }, i, j, part, order);
}

/// Whole-field derivative (no closure is attached to the result).
inline ScalarField deriv_field(const ScalarField& f, fd::Part part,
                               int order = 2) {
  ScalarField out(f.grid);
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i)
      out.at(i, j) = deriv(f, i, j, part, order);
  return out;
}

}  // namespace wrinkle
