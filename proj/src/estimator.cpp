#include "fictifem/estimator.hpp"

#include "fictifem/parallel.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace fictifem {

std::string_view to_string(CoefficientMode m) { return m == CoefficientMode::constant ? "constant" : "smooth"; }

CoefficientMode parse_coefficient_mode(std::string_view s) {
  std::string key;
  for (char c : s) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "constant") return CoefficientMode::constant;
  if (key == "smooth") return CoefficientMode::smooth;
  throw ConfigError("unknown coefficient mode '" + std::string(s) + "' (expected constant or smooth)");
}

double IndicatorField::global() const {
  double sum = 0.0;
  for (double e : eta) sum += e * e;
  return std::sqrt(sum);
}

double IndicatorField::osc_global() const {
  double sum = 0.0;
  for (double o : osc) sum += o * o;
  return std::sqrt(sum);
}

IndicatorField IndicatorField::from_values(const std::vector<double>& eta) {
  IndicatorField f;
  const std::size_t n = eta.size();
  f.cells.resize(n);
  std::iota(f.cells.begin(), f.cells.end(), 0);
  f.element_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.element_sq[i] = eta[i] * eta[i];
  f.edge_sq.assign(n, 0.0);
  f.interface_sq.assign(n, 0.0);
  f.restriction_sq.assign(n, 0.0);
  f.osc.assign(n, 0.0);
  f.eta = eta;
  return f;
}

double project_p0(const ScalarField& field, const CellVertices& cell, const QuadratureRule& rule) {
  double integral = 0.0, area = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const CellMap m = map_cell(cell, rule.points[q]);
    const double jxw = rule.weights[q] * m.det;
    integral += field(m.x) * jxw;
    area += jxw;
  }
  return integral / area;
}

namespace {

const QuadratureRule& residual_rule() {
  static const QuadratureRule rule = tensor_gauss(5);
  return rule;
}

struct PointEval {
  Point x;
  double jxw = 0.0;
  double value = 0.0;
  Point gradient = Point::Zero();
  double laplacian = 0.0;
};

PointEval evaluate(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, int cell,
                   const CellVertices& cv, const RefPoint& ref, double weight) {
  const ShapeEval e = evaluate_basis(layout.kind, cv, ref, true);
  PointEval p;
  p.x = e.x;
  p.jxw = weight * e.det;
  const auto& dofs = layout.dofs(cell);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const double c = coeffs[dofs[i]];
    p.value += c * e.values(i);
    p.gradient += c * e.gradients.row(i).transpose();
    p.laplacian += c * e.laplacians(i);
  }
  (void)forest;
  return p;
}

Point gradient_at(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, int cell, const Point& x) {
  const CellVertices cv = forest.cell_vertices(cell);
  const auto ref = inverse_map(cv, x);
  if (!ref) throw Error("edge quadrature point could not be mapped into cell " + std::to_string(cell));
  const RefPoint r = ref->cwiseMax(0.0).cwiseMin(1.0);
  return eval_at(forest, layout, coeffs, cell, r).gradient;
}

double domain_scale(const MeshForest& forest) {
  const BoundingBox b = forest.bounding_box();
  return (b.hi - b.lo).norm();
}

/// L2 norm over an interior edge of coef_L * grad u_L . n - coef_R * grad u_R . n.
template <class Coef>
double jump_norm(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, const EdgeRecord& e,
                 Coef coef) {
  const QuadratureRule rule = quadrature(layout.kind, QuadraturePurpose::edge);
  const Point d = e.ends[1] - e.ends[0];
  const double len = d.norm();
  const Point n(d.y() / len, -d.x() / len);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = e.ends[0] + rule.points[q].x() * d;
    const Point gl = gradient_at(forest, layout, coeffs, e.left, x);
    const Point gr = gradient_at(forest, layout, coeffs, e.right, x);
    const double jump = coef(e.left, x) * gl.dot(n) - coef(e.right, x) * gr.dot(n);
    sum += rule.weights[q] * len * jump * jump;
  }
  return std::sqrt(sum);
}

/// L2 norm over a boundary edge of coef * grad u . n (outward normal).
template <class Coef>
double conormal_norm(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs,
                     const BoundaryEdgeRecord& e, Coef coef) {
  const QuadratureRule rule = quadrature(layout.kind, QuadraturePurpose::edge);
  const CellVertices cv = forest.cell_vertices(e.cell);
  const Point d = e.ends[1] - e.ends[0];
  const double len = d.norm();
  const Point n(d.y() / len, -d.x() / len);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const RefPoint ref = face_point(e.face, rule.points[q].x());
    const FieldValue v = eval_at(forest, layout, coeffs, e.cell, ref);
    const Point x = forward_map(cv, ref);
    const double flux = coef(x) * v.gradient.dot(n);
    sum += rule.weights[q] * len * flux * flux;
  }
  return std::sqrt(sum);
}

/// Position of each active cell in the active list, -1 elsewhere.
std::vector<int> positions(const MeshForest& forest) {
  std::vector<int> pos(forest.n_cells(), -1);
  const auto& active = forest.active_cells();
  for (std::size_t i = 0; i < active.size(); ++i) pos[active[i]] = static_cast<int>(i);
  return pos;
}

std::vector<double> cell_means(const MeshForest& forest, const ScalarField& field) {
  const auto& active = forest.active_cells();
  std::vector<double> out(active.size());
  parallel_for(active.size(), [&](std::size_t i) {
    out[i] = project_p0(field, forest.cell_vertices(active[i]), residual_rule());
  });
  return out;
}

ScalarField beta3_field(const ProblemSpec& p) {
  return [&p](const Point& x) { return p.beta2(x) - p.beta(x); };
}

ScalarField f3_field(const ProblemSpec& p) {
  return [&p](const Point& x) { return p.f2(x) - p.f(x); };
}

double p0_of_cell(const MeshForest& forest, const ScalarField& field, int cell) {
  return project_p0(field, forest.cell_vertices(cell), residual_rule());
}

}  // namespace

double element_residual_1(const StateView& s, int cell1, CoefficientMode mode) {
  const auto& d = s.disc;
  const QuadratureRule& rule = residual_rule();
  const CellVertices cv = d.forest1.cell_vertices(cell1);
  const double pf = project_p0(s.problem.f, cv, rule);
  const double pbeta = mode == CoefficientMode::smooth ? project_p0(s.problem.beta, cv, rule) : 0.0;
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const PointEval p = evaluate(d.forest1, d.layout1, s.solution.u, cell1, cv, rule.points[q], rule.weights[q]);
    const double beta = mode == CoefficientMode::constant ? s.problem.beta(p.x) : pbeta;
    const double lam = eval_multiplier(d.forest2, d.layout_lambda, s.solution.lambda, s.problem.immersed, p.x,
                                       SliverPolicy::nearest_cell);
    const double r = beta * p.laplacian - lam + pf;
    sum += r * r * p.jxw;
  }
  return std::sqrt(sum);
}

double edge_residual_1(const StateView& s, const EdgeRecord& edge, CoefficientMode mode) {
  const auto& d = s.disc;
  if (mode == CoefficientMode::constant) {
    return jump_norm(d.forest1, d.layout1, s.solution.u, edge,
                     [&](int, const Point& x) { return s.problem.beta(x); });
  }
  const double bl = p0_of_cell(d.forest1, s.problem.beta, edge.left);
  const double br = p0_of_cell(d.forest1, s.problem.beta, edge.right);
  return jump_norm(d.forest1, d.layout1, s.solution.u, edge,
                   [&](int c, const Point&) { return c == edge.left ? bl : br; });
}

double element_residual_2(const StateView& s, int cell2, CoefficientMode mode) {
  const auto& d = s.disc;
  const QuadratureRule& rule = residual_rule();
  const CellVertices cv = d.forest2.cell_vertices(cell2);
  const ScalarField beta3 = beta3_field(s.problem);
  const double pf3 = project_p0(f3_field(s.problem), cv, rule);
  const double pbeta3 = mode == CoefficientMode::smooth ? project_p0(beta3, cv, rule) : 0.0;
  const double lam = s.solution.lambda[d.layout_lambda.dofs(cell2)[0]];
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const PointEval p = evaluate(d.forest2, d.layout2, s.solution.u2, cell2, cv, rule.points[q], rule.weights[q]);
    const double b3 = mode == CoefficientMode::constant ? beta3(p.x) : pbeta3;
    const double r = b3 * p.laplacian + lam + pf3;
    sum += r * r * p.jxw;
  }
  return std::sqrt(sum);
}

double edge_residual_2(const StateView& s, const EdgeRecord& edge, CoefficientMode mode) {
  const auto& d = s.disc;
  const ScalarField beta3 = beta3_field(s.problem);
  if (mode == CoefficientMode::constant) {
    return jump_norm(d.forest2, d.layout2, s.solution.u2, edge, [&](int, const Point& x) { return beta3(x); });
  }
  const double bl = p0_of_cell(d.forest2, beta3, edge.left);
  const double br = p0_of_cell(d.forest2, beta3, edge.right);
  return jump_norm(d.forest2, d.layout2, s.solution.u2, edge,
                   [&](int c, const Point&) { return c == edge.left ? bl : br; });
}

double interface_residual_2(const StateView& s, const BoundaryEdgeRecord& edge, CoefficientMode mode) {
  const auto& d = s.disc;
  const ScalarField beta3 = beta3_field(s.problem);
  if (mode == CoefficientMode::constant) {
    return conormal_norm(d.forest2, d.layout2, s.solution.u2, edge, beta3);
  }
  const double b = p0_of_cell(d.forest2, beta3, edge.cell);
  return conormal_norm(d.forest2, d.layout2, s.solution.u2, edge, [b](const Point&) { return b; });
}

double restriction_sq(const StateView& s, int cell2) {
  const auto& d = s.disc;
  double sum = 0.0;
  for (const CouplingPoint& p : coupling_quadrature(d.cache, cell2)) {
    const FieldValue a = eval_at(d.forest1, d.layout1, s.solution.u, p.cell1, p.ref1);
    const FieldValue b = eval_at(d.forest2, d.layout2, s.solution.u2, cell2, p.ref2);
    const double dv = a.value - b.value;
    sum += (dv * dv + (a.gradient - b.gradient).squaredNorm()) * p.JxW;
  }
  return sum;
}

OscillationFields oscillations(const StateView& s, CoefficientMode mode) {
  const auto& d = s.disc;
  const auto& prob = s.problem;
  const QuadratureRule& rule = residual_rule();
  const double scale = domain_scale(d.forest1);
  const ScalarField beta3 = beta3_field(prob);
  const ScalarField f3 = f3_field(prob);
  const bool smooth = mode == CoefficientMode::smooth;

  // Data oscillation, plus the coefficient element term in smooth mode.
  auto element_osc = [&](const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, const ScalarField& f,
                         const ScalarField& beta, const std::function<Point(const Point&)>& grad_beta) {
    const auto& active = forest.active_cells();
    std::vector<double> out(active.size());
    parallel_for(active.size(), [&](std::size_t i) {
      const int c = active[i];
      const CellVertices cv = forest.cell_vertices(c);
      const double h = forest.cell(c).diameter;
      const double pf = project_p0(f, cv, rule);
      const double pb = smooth ? project_p0(beta, cv, rule) : 0.0;
      double data = 0.0, coef = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const PointEval p = evaluate(forest, layout, coeffs, c, cv, rule.points[q], rule.weights[q]);
        const double df = f(p.x) - pf;
        data += df * df * p.jxw;
        if (smooth) {
          const double r = grad_beta(p.x).dot(p.gradient) + (beta(p.x) - pb) * p.laplacian;
          coef += r * r * p.jxw;
        }
      }
      out[i] = h * std::sqrt(data) + h * std::sqrt(coef);
    });
    return out;
  };

  auto grad_beta = [&](const Point& x) { return field_gradient(prob.beta, prob.grad_beta, x, scale); };
  auto grad_beta3 = [&](const Point& x) {
    return field_gradient(prob.beta2, prob.grad_beta2, x, scale) - field_gradient(prob.beta, prob.grad_beta, x, scale);
  };

  OscillationFields out;
  out.osc1 = element_osc(d.forest1, d.layout1, s.solution.u, prob.f, prob.beta, grad_beta);
  out.osc2 = element_osc(d.forest2, d.layout2, s.solution.u2, f3, beta3, grad_beta3);
  if (!smooth) return out;

  // Coefficient oscillation across edges: jump of (beta - P0 beta) du/dn.
  auto edge_osc = [&](const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, const ScalarField& beta,
                      std::vector<double>& osc) {
    const auto pos = positions(forest);
    const std::vector<double> pbeta = cell_means(forest, beta);
    const auto edges = forest.interior_edges();
    std::vector<double> norms(edges.size());
    parallel_for(edges.size(), [&](std::size_t k) {
      norms[k] = jump_norm(forest, layout, coeffs, edges[k],
                           [&](int c, const Point& x) { return beta(x) - pbeta[pos[c]]; });
    });
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double term = 0.5 * std::sqrt(edges[k].length()) * norms[k];
      osc[pos[edges[k].left]] += term;
      osc[pos[edges[k].right]] += term;
    }
    return pbeta;
  };
  edge_osc(d.forest1, d.layout1, s.solution.u, prob.beta, out.osc1);
  const std::vector<double> pbeta3 = edge_osc(d.forest2, d.layout2, s.solution.u2, beta3, out.osc2);
  const auto pos2 = positions(d.forest2);
  for (const auto& e : d.forest2.boundary_edges()) {
    const double b = pbeta3[pos2[e.cell]];
    const double n = conormal_norm(d.forest2, d.layout2, s.solution.u2, e,
                                   [&](const Point& x) { return beta3(x) - b; });
    out.osc2[pos2[e.cell]] += std::sqrt(e.length()) * n;
  }
  return out;
}

std::pair<IndicatorField, IndicatorField> indicators(const StateView& s, CoefficientMode mode) {
  const auto& d = s.disc;
  auto init = [](const MeshForest& forest) {
    IndicatorField f;
    f.cells = forest.active_cells();
    const std::size_t n = f.cells.size();
    f.element_sq.assign(n, 0.0);
    f.edge_sq.assign(n, 0.0);
    f.interface_sq.assign(n, 0.0);
    f.restriction_sq.assign(n, 0.0);
    f.eta.assign(n, 0.0);
    f.osc.assign(n, 0.0);
    return f;
  };
  IndicatorField f1 = init(d.forest1);
  IndicatorField f2 = init(d.forest2);

  parallel_for(f1.size(), [&](std::size_t i) {
    const int c = f1.cells[i];
    const double h = d.forest1.cell(c).diameter;
    const double r = element_residual_1(s, c, mode);
    f1.element_sq[i] = h * h * r * r;
  });
  parallel_for(f2.size(), [&](std::size_t i) {
    const int c = f2.cells[i];
    const double h = d.forest2.cell(c).diameter;
    const double r = element_residual_2(s, c, mode);
    f2.element_sq[i] = h * h * r * r;
    f2.restriction_sq[i] = restriction_sq(s, c);
  });

  // Interior edges: half of h_E ||R_E||^2 to each neighbour, accumulated edge by edge.
  auto edge_pass = [&](const MeshForest& forest, IndicatorField& field, auto residual_fn) {
    const auto pos = positions(forest);
    const auto edges = forest.interior_edges();
    std::vector<double> norms(edges.size());
    parallel_for(edges.size(), [&](std::size_t k) { norms[k] = residual_fn(edges[k]); });
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double term = 0.5 * edges[k].length() * norms[k] * norms[k];
      field.edge_sq[pos[edges[k].left]] += term;
      field.edge_sq[pos[edges[k].right]] += term;
    }
  };
  edge_pass(d.forest1, f1, [&](const EdgeRecord& e) { return edge_residual_1(s, e, mode); });
  edge_pass(d.forest2, f2, [&](const EdgeRecord& e) { return edge_residual_2(s, e, mode); });

  {
    const auto pos2 = positions(d.forest2);
    const auto bedges = d.forest2.boundary_edges();
    std::vector<double> norms(bedges.size());
    parallel_for(bedges.size(), [&](std::size_t k) { norms[k] = interface_residual_2(s, bedges[k], mode); });
    for (std::size_t k = 0; k < bedges.size(); ++k) {
      f2.interface_sq[pos2[bedges[k].cell]] += bedges[k].length() * norms[k] * norms[k];
    }
  }

  const OscillationFields osc = oscillations(s, mode);
  f1.osc = osc.osc1;
  f2.osc = osc.osc2;
  for (IndicatorField* f : {&f1, &f2}) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      f->eta[i] = std::sqrt(f->element_sq[i] + f->edge_sq[i] + f->interface_sq[i] + f->restriction_sq[i]);
    }
  }
  return {std::move(f1), std::move(f2)};
}

void check_coefficient_mode(const ProblemSpec& problem, CoefficientMode mode) {
  if (mode == CoefficientMode::smooth) return;
  const auto samples1 = sample_boundary(problem.background, 64);
  const auto samples2 = sample_boundary(problem.immersed, 64);
  auto constant_on = [](const ScalarField& f, const std::vector<Point>& pts) {
    const double ref = f(pts.front());
    for (const Point& p : pts) {
      if (std::abs(f(p) - ref) > 1e-14 * std::max(1.0, std::abs(ref))) return false;
    }
    return true;
  };
  std::vector<Point> all = samples1;
  all.insert(all.end(), samples2.begin(), samples2.end());
  if (!constant_on(problem.beta, all) || !constant_on(problem.beta2, samples2)) {
    throw ConfigError("constant coefficient mode requires constant beta and beta2; use mode = smooth");
  }
}

}  // namespace fictifem
