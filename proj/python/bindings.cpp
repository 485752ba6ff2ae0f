#include <memory>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fragfem/assembly.hpp"
#include "fragfem/errors.hpp"
#include "fragfem/quadrature.hpp"
#include "fragfem/studies.hpp"

namespace py = pybind11;
using namespace fragfem;

namespace {

Grading grading_from(const std::string& g) {
  if (g == "uniform") return Grading::Uniform;
  if (g == "geometric") return Grading::Geometric;
  throw py::value_error("grading must be 'uniform' or 'geometric'");
}

std::unique_ptr<FeSpace> make_space(const std::vector<int>& cells, int degree, double lower, double upper, const std::string& grading) {
  const int dim = static_cast<int>(cells.size());
  if (dim != 2 && dim != 3) throw py::value_error("cells needs 2 or 3 entries");
  DomainBox box;
  box.dim = dim;
  GridSpec spec{{1, 1, 1}, grading_from(grading)};
  for (int k = 0; k < dim; ++k) {
    box.lower[k] = lower;
    box.upper[k] = upper;
    spec.cells[k] = cells[k];
  }
  return std::make_unique<FeSpace>(Mesh(box, spec), degree);
}

FragmentationKernel kernel_from(const std::string& k) {
  return k == "halving" ? FragmentationKernel::halving() : FragmentationKernel::smooth(k);
}

Eigen::MatrixXd points_of(const QuadratureRule& r) {
  Eigen::MatrixXd p(r.size(), r.dim);
  for (std::size_t i = 0; i < r.size(); ++i)
    for (int k = 0; k < r.dim; ++k) p(i, k) = r.points[i][k];
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite element solver for multidimensional fragmentation equations";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());

  m.def(
      "simplex_quadrature",
      [](int dim, int degree) {
        const QuadratureRule r = simplex_quadrature(dim, degree);
        return py::make_tuple(points_of(r), Eigen::VectorXd::Map(r.weights.data(), r.weights.size()).eval());
      },
      py::arg("dim"), py::arg("degree"), "Points (n, dim) and weights of a rule on the unit simplex.");

  py::class_<FeSpace>(m, "Space")
      .def(py::init(&make_space), py::arg("cells"), py::arg("degree") = 1, py::arg("lower") = 1e-9,
           py::arg("upper") = 2.0, py::arg("grading") = "uniform")
      .def_property_readonly("num_dofs", &FeSpace::num_dofs)
      .def_property_readonly("degree", &FeSpace::degree)
      .def_property_readonly("dim", &FeSpace::dim)
      .def_property_readonly("h", [](const FeSpace& s) { return s.mesh.h(); })
      .def_property_readonly("mesh_id", [](const FeSpace& s) { return mesh_id(s.mesh); })
      .def_property_readonly("dof_coordinates",
                             [](const FeSpace& s) {
                               Eigen::MatrixXd c(s.num_dofs(), s.dim());
                               for (int i = 0; i < s.num_dofs(); ++i)
                                 for (int k = 0; k < s.dim(); ++k) c(i, k) = s.dofs.coordinates[i][k];
                               return c;
                             })
      .def(
          "evaluate",
          [](const FeSpace& s, const Eigen::VectorXd& alpha, std::vector<double> x) {
            if (alpha.size() != s.num_dofs()) throw py::value_error("alpha has the wrong length");
            if (static_cast<int>(x.size()) != s.dim()) throw py::value_error("point has the wrong dimension");
            Point p{};
            for (int k = 0; k < s.dim(); ++k) p[k] = x[k];
            return s.evaluate({alpha.data(), static_cast<std::size_t>(alpha.size())}, p);
          },
          py::arg("alpha"), py::arg("x"));

  m.def("mass_matrix", [](const FeSpace& s) { return assemble_mass(s); }, py::arg("space"));
  m.def(
      "selection_matrix", [](const FeSpace& s, const std::string& gamma) { return assemble_selection(s, SelectionFn::parse(gamma)); },
      py::arg("space"), py::arg("selection") = "1");
  m.def(
      "gain_matrix",
      [](const FeSpace& s, const std::string& kernel, const std::string& gamma, int workers, bool flip) {
        AssemblyOptions o;
        o.workers = workers;
        o.flip_gain_sign = flip;
        const FragmentationKernel k = kernel_from(kernel);
        py::gil_scoped_release release;
        return k.kind == KernelKind::HalvingDelta ? assemble_gain_delta(s, SelectionFn::parse(gamma), o)
                                                  : assemble_gain_smooth(s, k, SelectionFn::parse(gamma), o);
      },
      py::arg("space"), py::arg("kernel"), py::arg("selection") = "1", py::arg("workers") = 0,
      py::arg("flip_gain_sign") = false, "Dense gain matrix; kernel is an expression in x1..x3, y1..y3 or 'halving'.");

  m.def("case_ids", &bundled_case_ids);

  m.def(
      "run_scenario_json",
      [](const std::string& path, const std::string& text, const std::vector<std::string>& overrides) {
        const Scenario s = path.empty() ? parse_scenario_string(text, overrides) : parse_scenario(path, overrides);
        py::gil_scoped_release release;
        return report_json(run_scenario(s));
      },
      py::arg("path") = "", py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "validate_json",
      [](bool flip, bool corrupt, bool quick) {
        ValidationOptions o;
        o.flip_gain_sign = flip;
        o.corrupt_gain = corrupt;
        o.include_oracle_p2 = !quick;
        py::gil_scoped_release release;
        return report_json(run_validation_suite(o));
      },
      py::arg("flip_gain_sign") = false, py::arg("corrupt_gain") = false, py::arg("quick") = true);
}
