// Python bindings: numpy-facing wrappers over the core pipelines. Arrays are
// exchanged in (ny, nx) C-order matching the grid storage layout.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wrinkle/developable.hpp"
#include "wrinkle/elasto.hpp"
#include "wrinkle/errors.hpp"
#include "wrinkle/fluid.hpp"
#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"
#include "wrinkle/io.hpp"
#include "wrinkle/nash_kuiper.hpp"

namespace py = pybind11;
using namespace wrinkle;

namespace {

ScalarField to_field(const Grid2D& g, const py::array_t<double>& a) {
  const auto buf = a.unchecked<2>();
  if (buf.shape(0) != g.ny || buf.shape(1) != g.nx) {
    throw GridMismatch("array shape must be (ny, nx)");
  }
  ScalarField f(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      f.at(i, j) = buf(j, i);
    }
  }
  return f;
}

py::array_t<double> to_array(const ScalarField& f) {
  py::array_t<double> a({f.grid.ny, f.grid.nx});
  auto buf = a.mutable_unchecked<2>();
  for (int j = 0; j < f.grid.ny; ++j) {
    for (int i = 0; i < f.grid.nx; ++i) {
      buf(j, i) = f.at(i, j);
    }
  }
  return a;
}

py::array_t<double> positions_array(const Immersion& y) {
  py::array_t<double> a({y.grid.ny, y.grid.nx, 3});
  auto buf = a.mutable_unchecked<3>();
  for (int j = 0; j < y.grid.ny; ++j) {
    for (int i = 0; i < y.grid.nx; ++i) {
      const Eigen::Vector3d& p = y.at(i, j);
      for (int c = 0; c < 3; ++c) buf(j, i, c) = p[c];
    }
  }
  return a;
}

py::dict stage_dict(const StageDiagnostics& d) {
  py::dict out;
  out["q"] = d.q;
  out["deficit_sup"] = d.deficit_sup;
  out["c0_step"] = d.c0_step;
  out["c1_step"] = d.c1_step;
  out["c2_norm"] = d.c2_norm;
  out["lambda_max"] = d.lambda_max;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Duality between planar continuum mechanics and evolving immersed "
      "surfaces: fluid/form dictionaries, curvature operators, developable "
      "shear surfaces, and the staged corrugation embedding engine.";

  py::register_exception<ValidationError>(m, "ValidationError",
                                          PyExc_ValueError);
  py::register_exception<RuntimeFault>(m, "RuntimeFault", PyExc_RuntimeError);

  py::class_<Grid2D>(m, "Grid2D")
      .def_static("covering", &Grid2D::covering, py::arg("nx"), py::arg("ny"),
                  py::arg("length1"), py::arg("length2"), py::arg("x10") = 0.0,
                  py::arg("x20") = 0.0)
      .def_readonly("nx", &Grid2D::nx)
      .def_readonly("ny", &Grid2D::ny)
      .def_readonly("h1", &Grid2D::h1)
      .def_readonly("h2", &Grid2D::h2)
      .def_readonly("x10", &Grid2D::x10)
      .def_readonly("x20", &Grid2D::x20);

  m.def(
      "taylor_green",
      [](const Grid2D& g, double p_shift) {
        const FluidState s = taylor_green_fixture(g, p_shift);
        return py::make_tuple(to_array(s.u), to_array(s.v), to_array(s.p));
      },
      py::arg("grid"), py::arg("p_shift") = 1.0,
      "Steady vortex test flow (u, v, p) tabulated on the grid.");

  m.def(
      "lmn_from_fluid",
      [](const Grid2D& g, const py::array_t<double>& u,
         const py::array_t<double>& v, const py::array_t<double>& p) {
        const FluidState s(to_field(g, u), to_field(g, v), to_field(g, p));
        const FundamentalForm ff = lmn_from_fluid(s);
        return py::make_tuple(to_array(ff.L), to_array(ff.M), to_array(ff.N));
      },
      py::arg("grid"), py::arg("u"), py::arg("v"), py::arg("p"),
      "(L, M, N) = (v^2 + p, -u v, u^2 + p).");

  m.def(
      "fluid_from_lmn",
      [](const Grid2D& g, const py::array_t<double>& L,
         const py::array_t<double>& M, const py::array_t<double>& N) {
        const auto [au, av] = fluid_from_lmn(FundamentalForm(
            to_field(g, L), to_field(g, M), to_field(g, N)));
        return py::make_tuple(to_array(au), to_array(av));
      },
      py::arg("grid"), py::arg("L"), py::arg("M"), py::arg("N"),
      "Velocity magnitudes (|u|, |v|) recovered from a fundamental form.");

  m.def(
      "gauss_residual",
      [](const Grid2D& g, const py::array_t<double>& L,
         const py::array_t<double>& M, const py::array_t<double>& N,
         const py::array_t<double>& kappa) {
        return to_array(gauss_residual(
            FundamentalForm(to_field(g, L), to_field(g, M), to_field(g, N)),
            to_field(g, kappa)));
      },
      py::arg("grid"), py::arg("L"), py::arg("M"), py::arg("N"),
      py::arg("kappa"), "L N - M^2 - kappa per node.");

  m.def(
      "brioschi_curvature",
      [](const Grid2D& g, const py::array_t<double>& g11,
         const py::array_t<double>& g12, const py::array_t<double>& g22,
         int order) {
        return to_array(brioschi_curvature(
            MetricField(to_field(g, g11), to_field(g, g12), to_field(g, g22)),
            order));
      },
      py::arg("grid"), py::arg("g11"), py::arg("g12"), py::arg("g22"),
      py::arg("order") = 2,
      "Gauss curvature from the metric alone (Brioschi formula).");

  m.def(
      "shear_surface",
      [](const Grid2D& g, double shear, double A) {
        const ShearProfile sp([shear](double) { return shear; }, A);
        const Immersion surf = shear_surface(sp, g);
        const MetricField gs = gstar_metric(sp, g);
        py::dict out;
        out["positions"] = positions_array(surf);
        out["gstar_g11"] = to_array(gs.g11);
        out["gstar_g12"] = to_array(gs.g12);
        out["gstar_g22"] = to_array(gs.g22);
        out["energy"] = energy(gs);
        return out;
      },
      py::arg("grid"), py::arg("shear") = 1.0, py::arg("A") = 2.0,
      "Developable image of a constant shear flow plus its closed-form "
      "target metric.");

  m.def(
      "embed_flat_chart",
      [](int nx, int ny, double scale, std::uint64_t seed, double target,
         int max_stages) {
        if (!(scale > 0.0) || scale >= 1.0) {
          throw ValidationError("scale must lie in (0, 1)");
        }
        const Grid2D g = Grid2D::covering(nx, ny, 1.0, 1.0);
        Immersion y0 = Immersion::tabulate(g, [scale](double a, double b) {
          return Eigen::Vector3d(scale * a, scale * b, 0.0);
        });
        y0.t1.assign(g.size(), Eigen::Vector3d(scale, 0.0, 0.0));
        y0.t2.assign(g.size(), Eigen::Vector3d(0.0, scale, 0.0));
        const MetricField tgt(ScalarField(g, 1.0), ScalarField(g, 0.0),
                              ScalarField(g, 1.0));
        StageParams p;
        p.seed = seed;
        p.target = target;
        p.max_stages = max_stages;
        const CorrugationProfile profile = build_corrugation_profile();
        const auto [y, diag] = run_embedding(y0, tgt, p, profile);
        py::dict out;
        out["positions"] = positions_array(y);
        out["initial_deficit"] = diag.initial_deficit;
        py::list stages;
        for (const auto& d : diag.stages) stages.append(stage_dict(d));
        out["stages"] = stages;
        return out;
      },
      py::arg("nx") = 257, py::arg("ny") = 257, py::arg("scale") = 0.9,
      py::arg("seed") = 0, py::arg("target") = 8e-3,
      py::arg("max_stages") = 3,
      "Staged corrugation embedding of a uniformly short flat chart toward "
      "the identity metric.");

  m.def(
      "wave_classification",
      [](double amplitude, int s1, int s2) {
        const WaveProfile w = {
            [amplitude](double z) { return amplitude * std::sin(z); },
            [amplitude](double z) { return amplitude * std::cos(z); },
            [amplitude](double z) { return -amplitude * std::sin(z); }};
        const Motion mo = traveling_wave_motion(w, s1, s2);
        std::vector<double> times;
        for (int k = 0; k <= 8; ++k) times.push_back(0.25 * k);
        const auto rep =
            current_config_steadiness(mo, {0.25, 0.4}, times);
        const Grid2D g = Grid2D::covering(17, 17, 1.0, 1.0);
        const auto es2 = es2_residual(mo, g, 0.7);
        const auto [w1, w2] = wave_equation_residual(mo, g, 0.7);
        py::dict out;
        out["steady"] = rep.is_steady;
        out["velocity_variation"] = rep.max_variation;
        out["caveat_max"] = es2[3].max_abs();
        out["wave_residual_max"] = std::max(w1.max_abs(), w2.max_abs());
        return out;
      },
      py::arg("amplitude") = 0.3, py::arg("s1") = 1, py::arg("s2") = 1,
      "Steadiness classification of the shear traveling-wave ansatz.");

  m.def(
      "write_mesh",
      [](const Grid2D& g, const py::array_t<double>& positions,
         const std::string& path) {
        const auto buf = positions.unchecked<3>();
        if (buf.shape(0) != g.ny || buf.shape(1) != g.nx ||
            buf.shape(2) != 3) {
          throw GridMismatch("positions must have shape (ny, nx, 3)");
        }
        Immersion y;
        y.grid = g;
        y.y.resize(g.size());
        for (int j = 0; j < g.ny; ++j) {
          for (int i = 0; i < g.nx; ++i) {
            y.at(i, j) =
                Eigen::Vector3d(buf(j, i, 0), buf(j, i, 1), buf(j, i, 2));
          }
        }
        write_mesh(y, path);
      },
      py::arg("grid"), py::arg("positions"), py::arg("path"),
      "Write a (ny, nx, 3) position array as a Wavefront-style quad mesh.");
}
