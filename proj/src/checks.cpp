#include "fictifem/checks.hpp"

#include "fictifem/adapt.hpp"
#include "fictifem/presets.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

namespace fictifem {

namespace {

CheckResult check(const std::string& name, const std::function<std::string()>& body) {
  try {
    const std::string failure = body();
    return {name, failure.empty(), failure};
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

std::string mesh_balance() {
  std::mt19937 rng(7);
  MeshForest f = structured_forest({0, 0}, {1, 1}, 4, 4);
  for (int round = 0; round < 6; ++round) {
    const auto& active = f.active_cells();
    std::vector<int> flag;
    for (int c : active) {
      if (rng() % 5 == 0) flag.push_back(c);
    }
    f.refine(flag);
    if (f.max_level_difference() > 1) return "level difference > 1 after refinement";
    if (std::abs(f.total_area() - 1.0) > 1e-12) return "area not preserved after refinement";
  }
  std::vector<int> all = f.active_cells();
  f.coarsen(all);
  if (f.max_level_difference() > 1) return "level difference > 1 after coarsening";
  if (std::abs(f.total_area() - 1.0) > 1e-12) return "area not preserved after coarsening";
  return {};
}

std::string locate_roundtrip() {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MeshForest f({{0, 0}, {2, 0}, {2.5, 2}, {0, 1.5}}, {{0, 1, 2, 3}});
  refine_globally(f, 2);
  for (int i = 0; i < 200; ++i) {
    const auto& active = f.active_cells();
    const int c = active[rng() % active.size()];
    const RefPoint r(u(rng), u(rng));
    const auto loc = f.locate(forward_map(f.cell_vertices(c), r));
    if (!loc) return "point not located";
    const Point back = forward_map(f.cell_vertices(loc->cell), loc->reference);
    if ((back - forward_map(f.cell_vertices(c), r)).norm() > 1e-10) return "round trip mismatch";
  }
  return {};
}

std::string shape_identities() {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const RefPoint p(u(rng), u(rng));
    for (ElementKind k : {ElementKind::Q1, ElementKind::Q2}) {
      if (std::abs(shape_values(k, p).sum() - 1.0) > 1e-14) return "partition of unity fails";
    }
    const RefPoint b = face_point(i % 4, u(rng));
    if (std::abs(shape_values(ElementKind::Q1B, b)(4)) > 1e-15) return "bubble does not vanish on the boundary";
  }
  return {};
}

std::string quadrature_exactness() {
  const QuadratureRule cell = quadrature(ElementKind::Q1, QuadraturePurpose::cell);
  double s = 0.0;
  for (std::size_t q = 0; q < cell.size(); ++q) {
    s += cell.weights[q] * std::pow(cell.points[q].x(), 2) * std::pow(cell.points[q].y(), 2);
  }
  if (std::abs(s - 1.0 / 9.0) > 1e-15) return "3x3 rule does not integrate x^2 y^2";
  const QuadratureRule edge = quadrature(ElementKind::Q2, QuadraturePurpose::edge);
  double e = 0.0;
  for (std::size_t q = 0; q < edge.size(); ++q) e += edge.weights[q] * std::pow(edge.points[q].x(), 6);
  if (std::abs(e - 1.0 / 7.0) > 1e-15) return "4-point rule does not integrate x^6";
  return {};
}

std::string unit_stiffness() {
  ProblemSpec p = make_preset("square").problem;
  p.dirichlet_on_boundary = false;
  Discretization d = make_discretization(ElementPair::Q1_Q1B_P0, false, structured_forest({0, 0}, {1, 1}, 1, 1),
                                         structured_forest({0.25, 0.25}, {0.75, 0.75}, 1, 1));
  const BlockSystem sys = assemble(p, d);
  Eigen::Matrix4d ref;
  ref << 4, -1, -2, -1, -1, 4, -1, -2, -2, -1, 4, -1, -1, -2, -1, 4;
  ref /= 6.0;
  if ((Eigen::Matrix4d(sys.A) - ref).cwiseAbs().maxCoeff() > 1e-14) return "unit-cell Q1 stiffness differs";
  return {};
}

std::string doerfler_example() {
  const auto marked = doerfler_mark(IndicatorField::from_values({3, 2, 1}), 0.6);
  if (marked != std::vector<int>{0}) return "eta = (3,2,1), alpha = 0.6 should mark cell 0 only";
  if (!doerfler_mark(IndicatorField::from_values({3, 2, 1}), 0.0).empty()) return "alpha = 0 must mark nothing";
  return {};
}

std::string exact_solutions() {
  for (const std::string name : {"circle_10", "circle_1000", "circle_reversed"}) {
    const Preset pr = make_preset(name);
    const ExactSolution& ex = *pr.problem.exact;
    // Five-point Laplacian; exact for the quadratic solutions at any step size.
    auto lap = [](const ScalarField& u, const Point& x) {
      const double h = 1.0;
      return (u(x + Point(h, 0)) + u(x - Point(h, 0)) + u(x + Point(0, h)) + u(x - Point(0, h)) - 4 * u(x)) / (h * h);
    };
    for (int i = 0; i < 64; ++i) {
      const double t = 2 * std::numbers::pi * i / 64;
      const Point n(std::cos(t), std::sin(t));
      const Point in = 0.5 * n, out = 1.2 * n;
      if (std::abs(-pr.problem.beta(out) * lap(ex.u, out) - pr.problem.f(out)) > 1e-12) return name + ": -beta Lap u != f";
      if (std::abs(-pr.problem.beta2(in) * lap(ex.u2, in) - pr.problem.f2(in)) > 1e-12) return name + ": -beta2 Lap u2 != f2";
      if (std::abs(ex.u(n) - ex.u2(n)) > 1e-12) return name + ": u != u2 on the interface";
      const double flux = pr.problem.beta(n) * ex.grad_u(n).dot(n) - pr.problem.beta2(n) * ex.grad_u2(n).dot(n);
      if (std::abs(flux) > 1e-12) return name + ": conormal derivatives do not match";
    }
  }
  return {};
}

std::string small_solve() {
  const Preset pr = make_preset("circle_10");
  Discretization d = make_discretization(pr.problem, 2, 1);
  const BlockSystem sys = assemble(pr.problem, d);
  const SolveResult r = solve(sys, SolverConfig{});
  const double rhs = sys.rhs().norm();
  const ResidualNorms& res = r.report.residual;
  if (std::max({res.r1, res.r2, res.r3}) > 1e-9 * (1 + rhs)) return "direct solve residual too large";
  const StateView s{pr.problem, d, r.solution};
  const double defect = constraint_defect(s);
  if (defect > 1e-8 * (1 + r.solution.u.lpNorm<Eigen::Infinity>())) return "cell means of u_h - u_2h do not vanish";
  return {};
}

}  // namespace

std::vector<CheckResult> run_checks() {
  return {
      check("mesh balance and area", mesh_balance),
      check("point location round trip", locate_roundtrip),
      check("shape function identities", shape_identities),
      check("quadrature exactness", quadrature_exactness),
      check("unit-cell Q1 stiffness", unit_stiffness),
      check("Doerfler marking example", doerfler_example),
      check("circle exact solutions", exact_solutions),
      check("small coupled solve", small_solve),
  };
}

}  // namespace fictifem
