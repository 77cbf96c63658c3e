#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "delaywave/diagnostics.hpp"
#include "delaywave/region.hpp"
#include "delaywave/solver.hpp"
#include "delaywave/spectral1d.hpp"

namespace py = pybind11;
using namespace delaywave;

namespace {

GeometryDesc make_geometry(const std::string& kind, double length) {
  if (kind == "interval") return IntervalGeom{length, 0.0};
  if (kind == "square-left") return RectangleGeom{};
  throw std::invalid_argument("geometry kind must be 'interval' or 'square-left'");
}

py::dict run_interval(double a, double k, double tau, double xi, int nx,
                      double t_end, double cfl, int sample_every,
                      bool conservation, const std::string& preset) {
  RunConfig cfg;
  cfg.params = {a, k, tau, xi, conservation};
  Grid1D g = Grid1D::uniform(nx, 1.0);
  cfg.grid = g;
  cfg.t_end = t_end;
  cfg.cfl = cfl;
  cfg.sample_every = sample_every;
  if (k > 0.0 && !conservation) {
    const auto gc = geometry_constants(IntervalGeom{1.0, 0.0});
    const auto rc = closed_form_weights(k, gc);
    cfg.weights = {rc.gamma1, rc.gamma2, rc.epsilon};
  }
  InitialData init;
  init.u0.resize(nx);
  init.u1.assign(nx, 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < nx; ++i) {
    const double x = g.x(i);
    if (preset == "eigenmode")
      init.u0[i] = std::sin(0.5 * pi * x);
    else if (preset == "gaussian")
      init.u0[i] = std::exp(-0.5 * std::pow((x - 0.5) / 0.1, 2));
    else
      throw std::invalid_argument("preset must be 'eigenmode' or 'gaussian'");
  }
  init.u0[0] = 0.0;

  const auto res = run(cfg, init);
  py::dict out;
  std::vector<double> t, e, lyap;
  for (const auto& s : res.samples) {
    t.push_back(s.t);
    e.push_back(s.e_total);
    lyap.push_back(s.lyap);
  }
  out["t"] = t;
  out["e_total"] = e;
  out["lyap"] = lyap;
  out["status"] = res.status == Termination::completed ? "completed"
                  : res.status == Termination::blow_up ? "blow_up"
                                                       : "nan";
  out["dt"] = res.step_info.dt;
  out["n_tau"] = res.step_info.n_tau;
  return out;
}

py::dict spectrum(double a, double k, double tau) {
  const BoundaryDelayParams p{a, k, tau};
  const auto res = rightmost_roots(p, default_search_box(p));
  py::dict out;
  std::vector<std::pair<std::complex<double>, double>> roots;
  for (const auto& r : res.roots) roots.emplace_back(r.omega, r.residual);
  out["roots"] = roots;
  out["abscissa"] = res.abscissa;
  out["beta"] = res.beta;
  out["threshold"] = gain_threshold(a);
  out["winding_ok"] = res.winding_ok;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "delayed wave equation toolkit";

  py::class_<GeometryConstants>(m, "GeometryConstants")
      .def(py::init<>())
      .def_readwrite("n", &GeometryConstants::n)
      .def_readwrite("m_inf", &GeometryConstants::m_inf)
      .def_readwrite("delta", &GeometryConstants::delta)
      .def_readwrite("cp", &GeometryConstants::cp)
      .def_readwrite("c0p", &GeometryConstants::c0p);

  m.def(
      "geometry_constants",
      [](const std::string& kind, double length) {
        return geometry_constants(make_geometry(kind, length));
      },
      py::arg("kind") = "interval", py::arg("length") = 1.0);

  m.def("trace_constant",
        [](const std::string& kind, double length) {
          return trace_constant(make_geometry(kind, length));
        },
        py::arg("kind") = "interval", py::arg("length") = 1.0);
  m.def("poincare_constant",
        [](const std::string& kind, double length) {
          return poincare_constant(make_geometry(kind, length));
        },
        py::arg("kind") = "interval", py::arg("length") = 1.0);

  m.def(
      "closed_form_weights",
      [](double k, const GeometryConstants& g) {
        const auto rc = closed_form_weights(k, g);
        py::dict d;
        d["epsilon"] = rc.epsilon;
        d["gamma1"] = rc.gamma1;
        d["gamma2"] = rc.gamma2;
        return d;
      },
      py::arg("k"), py::arg("geom"));

  m.def("a0_threshold", &a0_threshold, py::arg("k"), py::arg("geom"));

  m.def(
      "feasible",
      [](double a, double xi, double gamma1, double gamma2, double epsilon,
         double tau, double k, const GeometryConstants& g) {
        const auto f = feasible(a, xi, gamma1, gamma2, epsilon, tau, k, g);
        py::dict d;
        d["velocity"] = f.velocity.ok;
        d["delayed_velocity"] = f.delayed_velocity.ok;
        d["gradient"] = f.gradient.ok;
        d["boundary_gain"] = f.boundary_gain.ok;
        d["all_ok"] = f.all_ok;
        return d;
      },
      py::arg("a"), py::arg("xi"), py::arg("gamma1"), py::arg("gamma2"),
      py::arg("epsilon"), py::arg("tau"), py::arg("k"), py::arg("geom"));

  m.def(
      "feasible_polygon",
      [](double gamma1, double gamma2, double epsilon, double tau, double k,
         const GeometryConstants& g) {
        return feasible_polygon(gamma1, gamma2, epsilon, tau, k, g).vertices;
      },
      py::arg("gamma1"), py::arg("gamma2"), py::arg("epsilon"), py::arg("tau"),
      py::arg("k"), py::arg("geom"));

  m.def("gain_threshold", &gain_threshold, py::arg("a"));
  m.def(
      "char_fn",
      [](std::complex<double> omega, double a, double k, double tau) {
        return char_fn(omega, BoundaryDelayParams{a, k, tau});
      },
      py::arg("omega"), py::arg("a"), py::arg("k"), py::arg("tau"));
  m.def("spectrum", &spectrum, py::arg("a"), py::arg("k"), py::arg("tau"));

  m.def("simulate_interval", &run_interval, py::arg("a"), py::arg("k"),
        py::arg("tau"), py::arg("xi"), py::arg("nx") = 201,
        py::arg("t_end") = 10.0, py::arg("cfl") = 0.5,
        py::arg("sample_every") = 10, py::arg("conservation") = false,
        py::arg("preset") = "eigenmode");
}
