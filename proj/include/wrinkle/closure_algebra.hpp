/// @file closure_algebra.hpp
/// @brief Pointwise algebra on analytic scalar closures (sum, product, ...),
/// propagating exact first and second derivatives where available.
///
/// Used to push analytic derivative information through algebraic maps such
/// as (u, v, p) -> (L, M, N), so residual evaluators can run in exact mode.

#pragma once

#include "wrinkle/grid.hpp"

namespace wrinkle {

inline ScalarClosure cl_const(double c) {
  ScalarClosure out;
  out.f = [c](double, double) { return c; };
  out.f1 = out.f2 = out.f11 = out.f12 = out.f22 =
      [](double, double) { return 0.0; };
  return out;
}

inline ScalarClosure cl_add(const ScalarClosure& a, const ScalarClosure& b) {
  auto lift = [](const ScalarClosure::Fn& fa, const ScalarClosure::Fn& fb)
      -> ScalarClosure::Fn {
    if (!fa || !fb) return nullptr;
    return [fa, fb](double x, double y) { return fa(x, y) + fb(x, y); };
  };
  ScalarClosure out;
  out.f = lift(a.f, b.f);
  out.f1 = lift(a.f1, b.f1);
  out.f2 = lift(a.f2, b.f2);
  out.f11 = lift(a.f11, b.f11);
  out.f12 = lift(a.f12, b.f12);
  out.f22 = lift(a.f22, b.f22);
  return out;
}

inline ScalarClosure cl_scale(const ScalarClosure& a, double s) {
  auto lift = [s](const ScalarClosure::Fn& fa) -> ScalarClosure::Fn {
    if (!fa) return nullptr;
    return [fa, s](double x, double y) { return s * fa(x, y); };
  };
  ScalarClosure out;
  out.f = lift(a.f);
  out.f1 = lift(a.f1);
  out.f2 = lift(a.f2);
  out.f11 = lift(a.f11);
  out.f12 = lift(a.f12);
  out.f22 = lift(a.f22);
  return out;
}

inline ScalarClosure cl_sub(const ScalarClosure& a, const ScalarClosure& b) {
  return cl_add(a, cl_scale(b, -1.0));
}

inline ScalarClosure cl_mul(const ScalarClosure& a, const ScalarClosure& b) {
  ScalarClosure out;
  if (a.f && b.f)
    out.f = [a, b](double x, double y) { return a.f(x, y) * b.f(x, y); };
  if (a.f && b.f && a.f1 && b.f1) {
    out.f1 = [a, b](double x, double y) {
      return a.f1(x, y) * b.f(x, y) + a.f(x, y) * b.f1(x, y);
    };
  }
  if (a.f && b.f && a.f2 && b.f2) {
    out.f2 = [a, b](double x, double y) {
      return a.f2(x, y) * b.f(x, y) + a.f(x, y) * b.f2(x, y);
    };
  }
  if (a.f && b.f && a.f1 && b.f1 && a.f11 && b.f11) {
    out.f11 = [a, b](double x, double y) {
      return a.f11(x, y) * b.f(x, y) + 2.0 * a.f1(x, y) * b.f1(x, y) +
             a.f(x, y) * b.f11(x, y);
    };
  }
  if (a.f && b.f && a.f1 && b.f1 && a.f2 && b.f2 && a.f12 && b.f12) {
    out.f12 = [a, b](double x, double y) {
      return a.f12(x, y) * b.f(x, y) + a.f1(x, y) * b.f2(x, y) +
             a.f2(x, y) * b.f1(x, y) + a.f(x, y) * b.f12(x, y);
    };
  }
  if (a.f && b.f && a.f2 && b.f2 && a.f22 && b.f22) {
    out.f22 = [a, b](double x, double y) {
      return a.f22(x, y) * b.f(x, y) + 2.0 * a.f2(x, y) * b.f2(x, y) +
             a.f(x, y) * b.f22(x, y);
    };
  }
  return out;
}

}  // namespace wrinkle
