/*
 Copyright 2026 The parshoot Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parshoot/report.hpp"

namespace py = pybind11;
using namespace parshoot;

namespace
{

  // Reports cross the boundary as plain dicts, with the same keys as the JSON files.
  py::object to_py(const Json &j)
  {
    return py::module_::import("json").attr("loads")(j.dump());
  }

  Mat stack(const std::vector<Vec> &rows, int cols)
  {
    Mat out(static_cast<Eigen::Index>(rows.size()), cols);
    for (size_t k = 0; k < rows.size(); ++k)
      out.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    return out;
  }

  py::dict trajectory_dict(const ProblemDef &def, const TrajectoryGrid &g)
  {
    py::dict d;
    d["t"] = Eigen::Map<const Vec>(g.t.data(), static_cast<Eigen::Index>(g.t.size())).eval();
    d["x"] = stack(g.x, def.n());
    d["p"] = stack(g.p, def.n());
    d["u"] = stack(g.u, def.l());
    d["v"] = stack(g.v, def.m());
    return d;
  }

  TrajectoryGrid trajectory_at(const ProblemDef &def, const Vec &nu, int grid, const std::string &scheme, Vec *beta)
  {
    const ShootingPoint pt = unpack(def, expand(def, nu));
    TrajectoryGrid g;
    full_shooting_residual(def, pt, grid, parse_scheme(scheme), &g);
    if (beta)
      *beta = pt.beta;
    return g;
  }

  GNOptions options(double tol, int max_iter)
  {
    GNOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return o;
  }

} // namespace

PYBIND11_MODULE(parshoot, m)
{
  m.doc() = "Indirect shooting and second-order sufficient-condition checks for partially affine optimal control";
  m.attr("__version__") = library_version();

  auto base = py::register_exception<Error>(m, "ParshootError", PyExc_RuntimeError);
  py::register_exception<UnknownProblem>(m, "UnknownProblem", base.ptr());
  py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
  py::register_exception<SingularNormalMatrix>(m, "SingularNormalMatrix", base.ptr());
  py::register_exception<LegendreViolation>(m, "LegendreViolation", base.ptr());
  py::register_exception<PropagationError>(m, "PropagationError", base.ptr());

  py::class_<ProblemDef>(m, "Problem")
      .def_property_readonly("name", &ProblemDef::name)
      .def_property_readonly("n", &ProblemDef::n)
      .def_property_readonly("l", &ProblemDef::l)
      .def_property_readonly("m", &ProblemDef::m)
      .def_property_readonly("d_eta", &ProblemDef::d_eta)
      .def_property_readonly("horizon", &ProblemDef::horizon)
      .def_property_readonly("shooting_unknowns", &ProblemDef::shooting_unknowns)
      .def("negated_cost", [](const ProblemDef &d) { return d.negated_cost(d.name() + "-negated"); })
      .def("dynamics", &ProblemDef::dynamics, py::arg("x"), py::arg("u"), py::arg("v"))
      .def("__repr__", [](const ProblemDef &d) { return "<parshoot.Problem '" + d.name() + "'>"; });

  m.def("available_problems", &available_problems);
  m.def("problem", &builtin_problem, py::arg("name"));

  m.def(
      "eliminate_controls",
      [](const ProblemDef &def, const Vec &x, const Vec &p) {
        const EliminationResult r = eliminate_controls(def, x, p, cold_start(def));
        return py::make_tuple(r.u, r.v);
      },
      py::arg("problem"), py::arg("x"), py::arg("p"), "Solve H_u = 0, hv_ddot = 0 for (u, v).");
  m.def(
      "hv_dot", [](const ProblemDef &def, const Vec &x, const Vec &u, const Vec &p) { return hv_dot(def, x, u, p); },
      py::arg("problem"), py::arg("x"), py::arg("u"), py::arg("p"));
  m.def(
      "hv_ddot",
      [](const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p) {
        return hv_ddot(def, x, u, v, p);
      },
      py::arg("problem"), py::arg("x"), py::arg("u"), py::arg("v"), py::arg("p"));
  m.def(
      "elimination_jacobian",
      [](const ProblemDef &def, const Vec &x, const Vec &u, const Vec &v, const Vec &p) {
        return elimination_jacobian(def, x, u, v, p);
      },
      py::arg("problem"), py::arg("x"), py::arg("u"), py::arg("v"), py::arg("p"));

  m.def(
      "propagate",
      [](const ProblemDef &def, const Vec &x0, const Vec &p0, int grid, const std::string &scheme) {
        TrajectoryGrid g;
        {
          py::gil_scoped_release nogil;
          g = propagate(def, x0, p0, grid, parse_scheme(scheme));
        }
        return trajectory_dict(def, g);
      },
      py::arg("problem"), py::arg("x0"), py::arg("p0"), py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler");

  m.def(
      "shooting_residual",
      [](const ProblemDef &def, const Vec &nu, int grid, const std::string &scheme) {
        py::gil_scoped_release nogil;
        return shooting_residual(def, nu, grid, parse_scheme(scheme));
      },
      py::arg("problem"), py::arg("nu"), py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler");
  m.def(
      "shooting_jacobian",
      [](const ProblemDef &def, const Vec &nu, int grid, const std::string &scheme) {
        py::gil_scoped_release nogil;
        return shooting_jacobian(def, nu, grid, parse_scheme(scheme));
      },
      py::arg("problem"), py::arg("nu"), py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler");

  m.def(
      "gauss_newton",
      [](const ProblemDef &def, const Vec &nu0, int grid, const std::string &scheme, double tol, int max_iter) {
        GNReport r;
        {
          py::gil_scoped_release nogil;
          r = gauss_newton(def, nu0, grid, parse_scheme(scheme), options(tol, max_iter));
        }
        return to_py(to_json(r));
      },
      py::arg("problem"), py::arg("nu0"), py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler",
      py::arg("tol") = 1e-10, py::arg("max_iter") = 30,
      "Gauss-Newton on the shooting equations. Returns the report as a dict; raises NoConvergence or "
      "SingularNormalMatrix.");

  m.def("convergence_order", [](const std::vector<double> &errors) { return convergence_order(errors); },
        py::arg("errors"));

  m.def(
      "multistart",
      [](const ProblemDef &def, int count, double lo, double hi, std::uint64_t seed, int grid,
         const std::string &scheme, double tol, int max_iter, int threads) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release nogil;
          const auto starts = uniform_starts(count, def.shooting_unknowns(), lo, hi, seed);
          rows = multistart(def, starts, grid, parse_scheme(scheme), options(tol, max_iter), threads);
        }
        py::list out;
        for (const SweepRow &r : rows)
        {
          py::dict d;
          d["index"] = r.index;
          d["nu0"] = r.nu0;
          d["converged"] = r.converged;
          d["iterations"] = r.iterations;
          d["order"] = r.order ? py::cast(*r.order) : py::none();
          d["solution"] = r.solution;
          d["residual"] = r.residual;
          d["failure"] = r.failure;
          out.append(d);
        }
        return out;
      },
      py::arg("problem"), py::arg("count"), py::arg("lo") = -1.0, py::arg("hi") = 1.0, py::arg("seed") = 42,
      py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler", py::arg("tol") = 1e-10, py::arg("max_iter") = 30,
      py::arg("threads") = 1);

  m.def(
      "trajectory",
      [](const ProblemDef &def, const Vec &nu, int grid, const std::string &scheme) {
        return trajectory_dict(def, trajectory_at(def, nu, grid, scheme, nullptr));
      },
      py::arg("problem"), py::arg("nu"), py::arg("grid") = 1000, py::arg("scheme") = "implicit-euler");

  m.def(
      "coercivity_check",
      [](const ProblemDef &def, const Vec &nu, int grid, const std::string &scheme) {
        SSCReport r;
        {
          py::gil_scoped_release nogil;
          Vec beta;
          const TrajectoryGrid g = trajectory_at(def, nu, grid, scheme, &beta);
          r = coercivity_check(def, g, multiplier_from(g, beta));
        }
        return to_py(to_json(r));
      },
      py::arg("problem"), py::arg("nu"), py::arg("grid") = 200, py::arg("scheme") = "implicit-euler",
      "Second-order coercivity check at the extremal generated by nu.");

  m.def(
      "validate",
      [](const ProblemDef &def, int samples, std::uint64_t seed) {
        return to_py(to_json(validate_problem(def, samples, seed)));
      },
      py::arg("problem"), py::arg("samples") = 100, py::arg("seed") = 0);
}
