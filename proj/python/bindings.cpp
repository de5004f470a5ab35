#include "fictifem/adapt.hpp"
#include "fictifem/checks.hpp"
#include "fictifem/config.hpp"
#include "fictifem/norms.hpp"
#include "fictifem/presets.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fictifem;

namespace {

py::dict record_dict(const StudyRecord& r) {
  py::dict d;
  d["cycle"] = r.cycle;
  d["n1"] = r.n1;
  d["n2"] = r.n2;
  d["m"] = r.m;
  d["h_max1"] = r.h_max1;
  d["h_max2"] = r.h_max2;
  d["eta1"] = r.eta1;
  d["eta2"] = r.eta2;
  d["err_l2_u"] = r.err_l2_u;
  d["err_h1_u"] = r.err_h1_u;
  d["err_l2_u2"] = r.err_l2_u2;
  d["err_h1_u2"] = r.err_h1_u2;
  d["eff_index"] = r.eff_index;
  d["gmres_iters"] = r.gmres_iters;
  d["wall_time"] = r.wall_time;
  d["constraint_defect"] = r.constraint_defect;
  d["lambda_diag"] = r.lambda_diag;
  return d;
}

Preset preset_for(const std::string& name, const std::string& element) {
  return make_preset(name, parse_element_pair(element));
}

/// Solves one preset on its initial meshes and returns blocks, solution and indicators.
py::dict solve_preset(const std::string& name, std::optional<int> level1, std::optional<int> level2,
                      const std::string& element, const std::string& method) {
  const Preset preset = preset_for(name, element);
  const Discretization disc =
      make_discretization(preset.problem, level1.value_or(preset.level1), level2.value_or(preset.level2));
  const BlockSystem sys = assemble(preset.problem, disc);
  SolverConfig cfg;
  cfg.method = parse_solver_method(method);
  const SolveResult res = solve(sys, cfg);
  const StateView view{preset.problem, disc, res.solution};
  const auto [eta1, eta2] = indicators(view, CoefficientMode::constant);

  py::dict out;
  out["u"] = res.solution.u;
  out["u2"] = res.solution.u2;
  out["lambda"] = res.solution.lambda;
  out["residual"] = py::make_tuple(res.report.residual.r1, res.report.residual.r2, res.report.residual.r3);
  out["iterations"] = res.report.iterations;
  out["eta1"] = eta1.eta;
  out["eta2"] = eta2.eta;
  out["constraint_defect"] = constraint_defect(view);
  out["support_points1"] = disc.layout1.support_points;
  out["support_points2"] = disc.layout2.support_points;
  if (preset.problem.exact) {
    const ErrorNorms e = error_norms(view, *preset.problem.exact);
    out["errors"] = py::dict(py::arg("l2_u") = e.l2_u, py::arg("h1_u") = e.h1_u, py::arg("l2_u2") = e.l2_u2,
                             py::arg("h1_u2") = e.h1_u2);
  }
  return out;
}

/// Assembled blocks as scipy sparse matrices plus the stacked right-hand side.
py::dict assemble_preset(const std::string& name, std::optional<int> level1, std::optional<int> level2,
                         const std::string& element) {
  const Preset preset = preset_for(name, element);
  const Discretization disc =
      make_discretization(preset.problem, level1.value_or(preset.level1), level2.value_or(preset.level2));
  const BlockSystem sys = assemble(preset.problem, disc);
  using Csc = Eigen::SparseMatrix<double>;
  py::dict out;
  out["A"] = Csc(sys.A);
  out["A2"] = Csc(sys.A2);
  out["C"] = Csc(sys.C);
  out["M"] = Csc(sys.M);
  out["K"] = Csc(sys.full());
  out["rhs"] = Vector(sys.rhs());
  out["sizes"] = py::make_tuple(sys.n1, sys.n2, sys.m);
  return out;
}

py::dict run_study(const std::string& name, int max_cycles, double alpha1, double alpha2, const std::string& marking,
                   std::optional<int> level1, std::optional<int> level2, const std::string& element,
                   const std::string& method, int max_dofs) {
  const Preset preset = preset_for(name, element);
  LoopOptions o;
  o.level1 = level1.value_or(preset.level1);
  o.level2 = level2.value_or(preset.level2);
  o.adapt.alpha1 = alpha1;
  o.adapt.alpha2 = alpha2;
  o.adapt.max_cycles = max_cycles;
  o.adapt.max_dofs = max_dofs;
  o.adapt.marking = parse_marking_criterion(marking);
  o.solver.method = parse_solver_method(method);
  o.lambda_density = preset.lambda_density;
  LoopResult r;
  {
    py::gil_scoped_release release;
    r = adaptive_loop(preset.problem, o);
  }
  py::list records;
  for (const auto& rec : r.records) records.append(record_dict(rec));
  py::dict out;
  out["records"] = records;
  out["stop_reason"] = r.stop_reason;
  out["error"] = r.error;
  return out;
}

std::vector<int> mark(const std::vector<double>& eta, double alpha, const std::string& marking) {
  return doerfler_mark(IndicatorField::from_values(eta), alpha, parse_marking_criterion(marking));
}

py::dict config_dict(const std::string& text) {
  const Config c = parse_config(text);
  py::dict d;
  d["element"] = std::string(to_string(c.problem.element));
  d["level1"] = c.problem.level1;
  d["level2"] = c.problem.level2;
  d["mode"] = std::string(to_string(c.problem.mode));
  d["alpha1"] = c.adapt.alpha1;
  d["alpha2"] = c.adapt.alpha2;
  d["tol"] = c.adapt.tol;
  d["max_cycles"] = c.adapt.max_cycles;
  d["max_dofs"] = c.adapt.max_dofs;
  d["marking"] = std::string(to_string(c.adapt.marking));
  d["method"] = std::string(to_string(c.solver.method));
  d["gmres_rel_tol"] = c.solver.gmres_rel_tol;
  d["restart"] = c.solver.restart;
  d["max_iters"] = c.solver.max_iters;
  d["schur_scaling"] = c.solver.schur_scaling;
  d["directory"] = c.output.directory;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adaptive fictitious-domain finite elements for elliptic interface problems";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  static py::exception<SolverError> solver(m, "SolverError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const SolverError& e) {
      py::set_error(solver, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  const char* q1 = "Q1-(Q1+B)-P0";
  m.def("preset_names", &preset_names, "Names of the built-in problems.");
  m.def("solve_preset", &solve_preset, py::arg("name"), py::arg("level1") = py::none(), py::arg("level2") = py::none(),
        py::arg("element") = q1, py::arg("method") = "direct",
        "Assemble and solve a preset on its initial meshes; returns DoF vectors, residuals and indicators.");
  m.def("assemble_preset", &assemble_preset, py::arg("name"), py::arg("level1") = py::none(),
        py::arg("level2") = py::none(), py::arg("element") = q1,
        "Assembled blocks A, A2, C, M, the full operator K and the stacked right-hand side.");
  m.def("run_study", &run_study, py::arg("name"), py::arg("max_cycles") = 8, py::arg("alpha1") = 0.6,
        py::arg("alpha2") = 0.0, py::arg("marking") = "squared", py::arg("level1") = py::none(),
        py::arg("level2") = py::none(), py::arg("element") = q1, py::arg("method") = "direct",
        py::arg("max_dofs") = 200000, "Run the adaptive loop; returns per-cycle records and the stop reason.");
  m.def("doerfler_mark", &mark, py::arg("eta"), py::arg("alpha"), py::arg("marking") = "squared",
        "Indices marked by the bulk criterion.");
  m.def(
      "coarsen_mark",
      [](const std::vector<double>& eta, double alpha2) {
        return coarsen_mark(IndicatorField::from_values(eta), alpha2);
      },
      py::arg("eta"), py::arg("alpha2"));
  m.def(
      "eoc",
      [](const std::vector<double>& n, const std::vector<double>& e, int k) { return eoc(n, e, k); }, py::arg("n_dofs"),
      py::arg("errors"), py::arg("k") = 4, "Least-squares slope of log(error) against log(sqrt(N)).");
  m.def("parse_config", &config_dict, py::arg("text"));
  m.def("run_checks", [] {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& r : run_checks()) out.emplace_back(r.name, r.passed, r.detail);
    return out;
  });
}
