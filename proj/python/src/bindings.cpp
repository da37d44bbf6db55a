#include "opfgrad/case.hpp"
#include "opfgrad/conic.hpp"
#include "opfgrad/dcopf.hpp"
#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"
#include "opfgrad/opf_operator.hpp"
#include "opfgrad/sweep.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace opfgrad;

namespace {

Eigen::VectorXd load_or_base(const CaseFile& c, const std::optional<Eigen::VectorXd>& load) {
  return load ? *load : c.base_load;
}

OpfContext context(const CaseFile& c) { return OpfContext::from_case(c); }

py::dict binding_dict(const BindingSet& b) {
  py::dict d;
  d["canonical"] = b.canonical();
  d["hash"] = b.hash();
  d["gens"] = b.gen_indices();
  d["branches"] = b.branch_indices();
  d["rank_certificate"] = b.rank_certificate;
  return d;
}

py::dict solve(const CaseFile& c, const std::optional<Eigen::VectorXd>& load) {
  const Eigen::VectorXd sl = load_or_base(c, load);
  validate_load(sl, c.network.n_load());
  const StandardLP lp = assemble_lp(c.network, c.cost, c.limits, sl);
  const DispatchSolution sol = solve_lp(lp);
  py::dict d;
  d["status"] = std::string(to_string(sol.status));
  if (!sol.optimal()) return d;
  d["sg"] = sol.sg;
  d["theta"] = sol.theta;
  d["flows"] = sol.flows;
  d["objective"] = sol.objective;
  d["tau"] = sol.tau;
  d["kkt_max"] = kkt_residuals(sol, lp).max();
  d["binding"] = binding_dict(detect_binding(sol, lp, c.limits));
  return d;
}

py::dict scan(const CaseFile& c, int axis_a, int axis_b, std::pair<double, double> range_a,
              std::pair<double, double> range_b, int resolution, int threads) {
  ScanOptions opts;
  opts.threads = threads;
  const RegionGrid g =
      scan_load_plane(context(c), c.base_load, axis_a, axis_b,
                      Axis{"a", range_a.first, range_a.second, resolution},
                      Axis{"b", range_b.first, range_b.second, resolution}, opts);
  Eigen::MatrixXi status(resolution, resolution), region(resolution, resolution);
  for (int iy = 0; iy < resolution; ++iy)
    for (int ix = 0; ix < resolution; ++ix) {
      status(iy, ix) = static_cast<int>(g.cell(ix, iy).status);
      region(iy, ix) = g.cell(ix, iy).region;
    }
  py::list regions;
  for (const auto& r : g.regions) {
    py::dict d = binding_dict(r.binding);
    d["class"] = std::string(to_string(r.cls));
    d["cells"] = r.cells;
    d["area_fraction"] = r.area_fraction;
    d["jacobian"] = r.jacobian;
    regions.append(d);
  }
  py::dict d;
  d["status"] = status;
  d["region"] = region;
  d["regions"] = regions;
  d["significant"] = g.significant_regions();
  d["degenerate_fraction"] = g.degenerate_fraction();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DC-OPF operator, binding regions and Jacobians (indices are 0-based)";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<Infeasible>(m, "Infeasible", PyExc_RuntimeError);
  py::register_exception<MultipleOptima>(m, "MultipleOptima", PyExc_RuntimeError);
  py::register_exception<DependentSets>(m, "DependentSets", PyExc_RuntimeError);
  py::register_exception<SingularCombo>(m, "SingularCombo", PyExc_RuntimeError);
  py::register_exception<RegionBoundary>(m, "RegionBoundary", PyExc_RuntimeError);
  py::register_exception<ConstructionFailed>(m, "ConstructionFailed", PyExc_RuntimeError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

  py::class_<CaseFile>(m, "Case")
      .def_property_readonly("name", [](const CaseFile& c) { return c.name; })
      .def_property_readonly("n_gen", [](const CaseFile& c) { return c.network.n_gen(); })
      .def_property_readonly("n_load", [](const CaseFile& c) { return c.network.n_load(); })
      .def_property_readonly("n_edge", [](const CaseFile& c) { return c.network.n_edge(); })
      .def_property_readonly("cost", [](const CaseFile& c) { return c.cost; })
      .def_property_readonly("base_load", [](const CaseFile& c) { return c.base_load; })
      .def_property_readonly("bus_labels", [](const CaseFile& c) { return c.bus_labels; })
      .def_property_readonly("incidence", [](const CaseFile& c) { return incidence_matrix(c.network); })
      .def_property_readonly("laplacian", [](const CaseFile& c) { return laplacian(c.network); })
      .def("set_branch_limits",
           [](CaseFile& c, int branch, double p_min, double p_max) {
             if (branch < 0 || branch >= c.network.n_edge()) throw InvalidInput("branch index out of range");
             c.limits.p_min[branch] = p_min;
             c.limits.p_max[branch] = p_max;
             c.limits.validate(c.network.n_gen(), c.network.n_edge());
           },
           py::arg("branch"), py::arg("p_min"), py::arg("p_max"));

  m.def("load_case", [](const std::string& path) { return load_case(path); }, py::arg("path"));
  m.def("parse_case", &parse_case, py::arg("text"));

  m.def("solve", &solve, py::arg("case"), py::arg("load") = std::nullopt,
        "Solve the OPF; returns a dict with status, dispatch and binding set.");

  m.def("closed_form_jacobian",
        [](const CaseFile& c, const std::vector<int>& gens, const std::vector<int>& branches) {
          return closed_form_jacobian(c.network, gens, branches).J;
        },
        py::arg("case"), py::arg("gens"), py::arg("branches"));
  m.def("fd_jacobian",
        [](const CaseFile& c, const std::optional<Eigen::VectorXd>& load, double step) {
          return fd_jacobian(context(c), load_or_base(c, load), step).J;
        },
        py::arg("case"), py::arg("load") = std::nullopt, py::arg("step") = kDefaultFdStep);
  m.def("conic_jacobian",
        [](const CaseFile& c, const std::optional<Eigen::VectorXd>& load) {
          return conic_jacobian(context(c), load_or_base(c, load)).J;
        },
        py::arg("case"), py::arg("load") = std::nullopt);

  m.def("enumerate_combos",
        [](const CaseFile& c, std::size_t max_combos) {
          py::list out;
          for (const auto& k : enumerate_binding_combos(c.network, max_combos))
            out.append(py::make_tuple(k.gens, k.branches, k.independent));
          return out;
        },
        py::arg("case"), py::arg("max_combos") = kDefaultComboBudget,
        "List of (gens, branches, independent) tuples.");
  m.def("worst_case",
        [](const CaseFile& c, int gen, int load) {
          const WorstCase w = worst_case_sensitivity(c.network, gen, load);
          py::dict d;
          d["value"] = w.value;
          d["signed_value"] = w.signed_value;
          d["gens"] = w.combo.gens;
          d["branches"] = w.combo.branches;
          return d;
        },
        py::arg("case"), py::arg("gen"), py::arg("load"));
  m.def("construct",
        [](const CaseFile& c, const std::vector<int>& gens, const std::vector<int>& branches,
           std::uint64_t seed) {
          const ConstructedInstance inst = construct_parameters_for_binding(c.network, gens, branches, seed);
          py::dict d;
          d["cost"] = inst.cost;
          d["load"] = inst.load;
          d["sg"] = inst.sg;
          d["target"] = inst.target.canonical();
          d["attempts"] = inst.attempts;
          return d;
        },
        py::arg("case"), py::arg("gens"), py::arg("branches"), py::arg("seed") = 0x5eed);
  m.def("scan_load_plane", &scan, py::arg("case"), py::arg("axis_a"), py::arg("axis_b"),
        py::arg("range_a"), py::arg("range_b"), py::arg("resolution") = 200, py::arg("threads") = 1,
        "Status grid (0 infeasible, 1 regular, 2 degenerate) indexed [y, x], region ids and table.");
}
