// Copyright 2026 The qdslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings. Matrices cross as complex128 numpy arrays; reports are
// returned as objects with attributes plus to_json() for the full record.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qdslab/cli.hpp"
#include "qdslab/field.hpp"
#include "qdslab/io.hpp"
#include "qdslab/lindblad.hpp"
#include "qdslab/semigroup.hpp"
#include "qdslab/verifier.hpp"

namespace py = pybind11;
using namespace qdslab;

namespace {

py::tuple point_tuple(std::span<const double> x) {
  py::tuple t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = x[i];
  return t;
}

// Python callables take the point as a tuple of floats.
ScalarFunction scalar_fn(py::function f) {
  return [f](std::span<const double> x) { return f(point_tuple(x)).cast<double>(); };
}

template <class T>
std::string dump(const T& value) {
  return io::to_json(value).dump(2);
}

}  // namespace

PYBIND11_MODULE(_qdslab, m) {
  m.doc() = "Numerical laboratory for minimal quantum dynamical semigroups";

  // Library errors map onto the closest builtin exception type.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::Dimension:
          PyErr_SetString(PyExc_ValueError, e.what());
          return;
        case ErrorKind::Numerical:
          PyErr_SetString(PyExc_ArithmeticError, e.what());
          return;
        case ErrorKind::Io:
          PyErr_SetString(PyExc_OSError, e.what());
          return;
      }
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  // grid
  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, double, int, int>(), py::arg("dim"), py::arg("half_width"),
           py::arg("points"), py::arg("bulk_width") = 3)
      .def_property_readonly("dim", &GridSpec::dim)
      .def_property_readonly("half_width", &GridSpec::half_width)
      .def_property_readonly("points", &GridSpec::points)
      .def_property_readonly("bulk_width", &GridSpec::bulk_width)
      .def_property_readonly("spacing", &GridSpec::spacing)
      .def_property_readonly("size", &GridSpec::size)
      .def("coordinate", &GridSpec::coordinate)
      .def("point",
           [](const GridSpec& g, Index flat) {
             const auto p = g.point(flat);
             return std::vector<double>(p.begin(), p.begin() + g.dim());
           })
      .def("in_bulk", &GridSpec::in_bulk)
      .def("bulk_indices", &GridSpec::bulk_indices)
      .def("with_points", &GridSpec::with_points)
      .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; })
      .def("__repr__", &GridSpec::describe);

  m.def("derivative_operator",
        [](const GridSpec& g, int axis) { return derivative_operator(g, axis).matrix; },
        py::arg("grid"), py::arg("axis"));
  m.def("laplacian", [](const GridSpec& g) { return laplacian(g).matrix; }, py::arg("grid"));
  m.def("sample", [](const GridSpec& g, py::function f) { return sample(g, scalar_fn(f)); },
        py::arg("grid"), py::arg("f"));

  // field
  py::class_<PolynomialPotential>(m, "PolynomialPotential")
      .def(py::init<int, std::vector<std::pair<MultiIndex, double>>>(), py::arg("dim"),
           py::arg("terms"))
      .def_property_readonly("dim", &PolynomialPotential::dim)
      .def_property_readonly("degree", &PolynomialPotential::degree)
      .def("__call__",
           [](const PolynomialPotential& v, std::vector<double> x) {
             return v(std::span<const double>(x));
           })
      .def("__repr__", &PolynomialPotential::describe);

  py::class_<VectorField>(m, "VectorField")
      .def_property_readonly("dim", &VectorField::dim)
      .def_property_readonly("description", &VectorField::description)
      .def("value",
           [](const VectorField& w, int l, std::vector<double> x) {
             return w.value(l, std::span<const double>(x));
           })
      .def("derivative",
           [](const VectorField& w, int l, int k, std::vector<double> x) {
             return w.derivative(l, k, std::span<const double>(x));
           })
      .def("__repr__", [](const VectorField& w) { return "VectorField(" + w.description() + ")"; });

  m.def("grad_potential", &grad_potential, py::arg("potential"),
        "W = grad(V) / 4 with exact polynomial derivatives.");
  m.def(
      "analytic_field",
      [](int dim, py::function value, py::function first, py::object second, std::string name) {
        VectorField::SecondFn sec;
        if (!second.is_none()) {
          auto f = second.cast<py::function>();
          sec = [f](int l, int j, int k, std::span<const double> x) {
            return f(l, j, k, point_tuple(x)).cast<double>();
          };
        }
        return analytic_field(
            dim,
            [value](int l, std::span<const double> x) {
              return value(l, point_tuple(x)).cast<double>();
            },
            [first](int l, int k, std::span<const double> x) {
              return first(l, k, point_tuple(x)).cast<double>();
            },
            sec, std::move(name));
      },
      py::arg("dim"), py::arg("value"), py::arg("first"), py::arg("second") = py::none(),
      py::arg("description") = "analytic",
      "Field from callables value(l, x), first(l, k, x) and optionally second(l, j, k, x).");
  m.def("tabulated_field", &tabulated_field, py::arg("grid"), py::arg("values"));
  m.def("read_tabulated_field", &read_tabulated_field, py::arg("path"));

  py::class_<SampleBox>(m, "SampleBox")
      .def(py::init([](int dim, double half_width, int points, int shells) {
             return SampleBox{dim, half_width, points, shells};
           }),
           py::arg("dim") = 1, py::arg("half_width") = 6.0, py::arg("points") = 64,
           py::arg("shells") = 8)
      .def_static("from_grid", &SampleBox::from_grid)
      .def_readwrite("dim", &SampleBox::dim)
      .def_readwrite("half_width", &SampleBox::half_width)
      .def_readwrite("points", &SampleBox::points)
      .def_readwrite("shells", &SampleBox::shells);

  py::class_<ConditionEntry>(m, "ConditionEntry")
      .def_readonly("condition", &ConditionEntry::condition)
      .def_property_readonly("status", [](const ConditionEntry& e) { return to_string(e.status); })
      .def_readonly("growth_violation", &ConditionEntry::growth_violation)
      .def_readonly("constants", &ConditionEntry::constants)
      .def_readonly("constant", &ConditionEntry::constant)
      .def_readonly("note", &ConditionEntry::note)
      .def("to_json", &dump<ConditionEntry>);

  py::class_<AssumptionReport>(m, "AssumptionReport")
      .def_readonly("field", &AssumptionReport::field)
      .def_readonly("entries", &AssumptionReport::entries)
      .def("entry", &AssumptionReport::entry, py::return_value_policy::reference_internal)
      .def("all_satisfied", &AssumptionReport::all_satisfied)
      .def("to_json", &dump<AssumptionReport>);

  m.def("default_eps_list", &default_eps_list);
  m.def("default_c1_list", &default_c1_list);
  m.def(
      "check_assumptions",
      [](const VectorField& w, const SampleBox& box, std::optional<std::vector<double>> eps,
         std::optional<std::vector<double>> c1) {
        return check_assumptions(w, box, eps.value_or(default_eps_list()),
                                 c1.value_or(default_c1_list()));
      },
      py::arg("field"), py::arg("box"), py::arg("eps_list") = py::none(),
      py::arg("c1_list") = py::none());

  // lindblad
  py::class_<LindbladSystem>(m, "LindbladSystem")
      .def_readonly("grid", &LindbladSystem::grid)
      .def_readonly("field", &LindbladSystem::field)
      .def_readonly("shift", &LindbladSystem::shift)
      .def_readonly("jumps", &LindbladSystem::jumps)
      .def_readonly("hamiltonian", &LindbladSystem::hamiltonian)
      .def_readonly("g0", &LindbladSystem::g0)
      .def_readonly("generator", &LindbladSystem::generator)
      .def_readonly("phi", &LindbladSystem::phi)
      .def_readonly("c", &LindbladSystem::c)
      .def_readonly("drift", &LindbladSystem::drift)
      .def_property_readonly("size", &LindbladSystem::size)
      .def("form_identity_residual", &LindbladSystem::form_identity_residual);

  m.def("assemble", &assemble, py::arg("field"), py::arg("grid"), py::arg("shift") = 1.0);
  m.def("generator_apply", &generator_apply, py::arg("system"), py::arg("x"));

  // semigroup
  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<double, int>(), py::arg("horizon"), py::arg("steps"))
      .def_property_readonly("horizon", &TimeGrid::horizon)
      .def_property_readonly("steps", &TimeGrid::steps)
      .def_property_readonly("step", &TimeGrid::step)
      .def("node", &TimeGrid::node);

  py::enum_<Quadrature>(m, "Quadrature")
      .value("Linear", Quadrature::Linear)
      .value("Quadratic", Quadrature::Quadratic);
  py::enum_<MonotonicityTracking>(m, "MonotonicityTracking")
      .value("Auto", MonotonicityTracking::Auto)
      .value("Always", MonotonicityTracking::Always)
      .value("Never", MonotonicityTracking::Never);

  py::class_<PicardOptions>(m, "PicardOptions")
      .def(py::init([](double tol, int max_iter, MonotonicityTracking mono, Quadrature q) {
             return PicardOptions{tol, max_iter, mono, q};
           }),
           py::arg("tol") = 1e-9, py::arg("max_iter") = 200,
           py::arg("monotonicity") = MonotonicityTracking::Auto,
           py::arg("quadrature") = Quadrature::Linear)
      .def_readwrite("tol", &PicardOptions::tol)
      .def_readwrite("max_iter", &PicardOptions::max_iter)
      .def_readwrite("monotonicity", &PicardOptions::monotonicity)
      .def_readwrite("quadrature", &PicardOptions::quadrature);

  py::class_<SemigroupRun>(m, "SemigroupRun")
      .def_readonly("time", &SemigroupRun::time)
      .def_readonly("nodes", &SemigroupRun::nodes)
      .def_readonly("iterations", &SemigroupRun::iterations)
      .def_readonly("residuals", &SemigroupRun::residuals)
      .def_readonly("monotonicity", &SemigroupRun::monotonicity)
      .def_readonly("converged", &SemigroupRun::converged)
      .def_readonly("hermitian", &SemigroupRun::hermitian)
      .def_readonly("max_symmetrization", &SemigroupRun::max_symmetrization)
      .def_property_readonly("final", [](const SemigroupRun& r) { return r.final(); });

  m.def("propagator", [](const LindbladSystem& s, double t) { return propagator(s, t).matrix; },
        py::arg("system"), py::arg("t"));
  m.def("spectral_norm", &spectral_norm);
  m.def("min_eigenvalue", &min_eigenvalue);
  m.def("picard_run", &picard_run, py::arg("system"), py::arg("x"), py::arg("time"),
        py::arg("options") = PicardOptions{});
  m.def("generator_norm_estimate", &generator_norm_estimate, py::arg("system"),
        py::arg("iterations") = 30);
  m.def("master_oracle", &master_oracle, py::arg("system"), py::arg("x"), py::arg("t"),
        py::arg("dt"));

  py::class_<ChoiReport>(m, "ChoiReport")
      .def_readonly("t", &ChoiReport::t)
      .def_readonly("dimension", &ChoiReport::dimension)
      .def_readonly("lambda_min", &ChoiReport::lambda_min)
      .def_readonly("lambda_max", &ChoiReport::lambda_max)
      .def_readonly("completely_positive", &ChoiReport::completely_positive)
      .def("to_json", &dump<ChoiReport>);
  m.def("choi_map", &choi_map, py::arg("system"), py::arg("t"), py::arg("dt"));

  m.def(
      "classical_solve",
      [](const VectorField& w, const GridSpec& g, const RVector& f0, double t, double dt) {
        return classical_solve(w, g, f0, t, dt);
      },
      py::arg("field"), py::arg("grid"), py::arg("f0"), py::arg("t"), py::arg("dt"));

  py::class_<ClassicalComparison>(m, "ClassicalComparison")
      .def_readonly("max_error", &ClassicalComparison::max_error)
      .def_readonly("leakage", &ClassicalComparison::leakage)
      .def_readonly("converged", &ClassicalComparison::converged)
      .def_readonly("iterations", &ClassicalComparison::iterations)
      .def("to_json", &dump<ClassicalComparison>);
  m.def(
      "compare_classical",
      [](const LindbladSystem& s, py::function f0, const TimeGrid& time, const PicardOptions& o) {
        return compare_classical(s, scalar_fn(f0), time, o);
      },
      py::arg("system"), py::arg("f0"), py::arg("time"), py::arg("options") = PicardOptions{});

  // verifier
  py::class_<PencilEstimate>(m, "PencilEstimate")
      .def_readonly("label", &PencilEstimate::label)
      .def_readonly("constant", &PencilEstimate::constant)
      .def_readonly("offset", &PencilEstimate::offset)
      .def_readonly("parameter", &PencilEstimate::parameter)
      .def_readonly("witness", &PencilEstimate::witness)
      .def_readonly("witness_quotient", &PencilEstimate::witness_quotient)
      .def("to_json", &dump<PencilEstimate>);

  m.def("relative_bound", &relative_bound, py::arg("a"), py::arg("b"), py::arg("offsets"),
        py::arg("grid"), py::arg("label") = "");
  m.def("commutator_bound", &commutator_bound, py::arg("a"), py::arg("b"), py::arg("eps_list"),
        py::arg("grid"), py::arg("label") = "");

  py::class_<CFOptions>(m, "CFOptions")
      .def(py::init<>())
      .def_readwrite("resolutions", &CFOptions::resolutions)
      .def_readwrite("drift_tolerance", &CFOptions::drift_tolerance)
      .def_readwrite("auxiliary_bounds", &CFOptions::auxiliary_bounds)
      .def_readwrite("offsets", &CFOptions::offsets)
      .def_readwrite("eps_list", &CFOptions::eps_list);

  py::class_<CFReport>(m, "CFReport")
      .def_readonly("k", &CFReport::k)
      .def_readonly("drift", &CFReport::drift)
      .def_readonly("shift", &CFReport::shift)
      .def_readonly("verdict", &CFReport::verdict)
      .def_readonly("b9_over_b8", &CFReport::b9_over_b8)
      .def_readonly("bounds", &CFReport::bounds)
      .def_property_readonly("resolutions",
                             [](const CFReport& r) {
                               std::vector<std::pair<int, double>> out;
                               for (const auto& x : r.resolutions) out.emplace_back(x.points, x.k);
                               return out;
                             })
      .def("status",
           [](const CFReport& r, const std::string& c) { return to_string(r.condition(c).status); })
      .def("value", [](const CFReport& r, const std::string& c) { return r.condition(c).value; })
      .def("to_json", &dump<CFReport>);
  m.def("cf_check", &cf_check, py::arg("system"), py::arg("options") = CFOptions{});

  py::class_<C4FormBound>(m, "C4FormBound")
      .def_readonly("c4", &C4FormBound::c4)
      .def_readonly("margin", &C4FormBound::margin)
      .def_readonly("holds", &C4FormBound::holds)
      .def_readonly("growth_violation", &C4FormBound::growth_violation)
      .def("to_json", &dump<C4FormBound>);
  m.def("c4_form_bound", &c4_form_bound, py::arg("system"));

  // batch front-end
  m.def(
      "run_config",
      [](const std::filesystem::path& path, bool quiet) {
        std::ostringstream log;
        const auto out = cli::run_file(path, log);
        if (!quiet) py::print(log.str(), py::arg("end") = "");
        return py::make_tuple(out.status, out.manifest, out.diagnostics);
      },
      py::arg("path"), py::arg("quiet") = true,
      "Runs a JSON config; returns (status, manifest path, diagnostics).");
  m.def(
      "report",
      [](const std::filesystem::path& manifest) {
        std::ostringstream out;
        const int status = cli::report(manifest, out);
        return py::make_tuple(status, out.str());
      },
      py::arg("manifest"), "Summarizes a manifest; returns (status, text).");
}
