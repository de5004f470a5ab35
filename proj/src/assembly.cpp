#include "fictifem/assembly.hpp"

#include "fictifem/parallel.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace fictifem {

ElementKinds element_kinds(ElementPair pair) {
  switch (pair) {
    case ElementPair::Q1_Q1B_P0: return {ElementKind::Q1, ElementKind::Q1B, ElementKind::P0};
    case ElementPair::Q2_Q2_P0: return {ElementKind::Q2, ElementKind::Q2, ElementKind::P0};
  }
  return {ElementKind::Q1, ElementKind::Q1B, ElementKind::P0};
}

std::string_view to_string(ElementPair pair) {
  switch (pair) {
    case ElementPair::Q1_Q1B_P0: return "Q1-(Q1+B)-P0";
    case ElementPair::Q2_Q2_P0: return "Q2-Q2-P0";
  }
  return "?";
}

ElementPair parse_element_pair(std::string_view s) {
  std::string key;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) key.push_back(static_cast<char>(std::toupper(ch)));
  }
  if (key == "Q1-(Q1+B)-P0" || key == "Q1-Q1B-P0" || key == "Q1B" || key == "Q1") return ElementPair::Q1_Q1B_P0;
  if (key == "Q2-Q2-P0" || key == "Q2") return ElementPair::Q2_Q2_P0;
  throw ConfigError("unknown element pair '" + std::string(s) + "' (expected Q1-(Q1+B)-P0 or Q2-Q2-P0)");
}

Point field_gradient(const ScalarField& field, const VectorField& grad, const Point& p, double scale) {
  if (grad) return grad(p);
  const double h = 1e-6 * std::max(scale, 1.0);
  const Point ex(h, 0.0), ey(0.0, h);
  return Point((field(p + ex) - field(p - ex)) / (2 * h), (field(p + ey) - field(p - ey)) / (2 * h));
}

std::string validate_problem(const ProblemSpec& problem) {
  if (!problem.beta || !problem.beta2 || !problem.f || !problem.f2) {
    throw ConfigError("problem '" + problem.name + "' is missing a coefficient or forcing field");
  }
  validate_domains(problem.background, problem.immersed);
  const BoundingBox box = initial_mesh(problem.background, 0).bounding_box();
  constexpr int n = 100;
  bool sign_violation = false;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point p = box.lo + Point((i + 0.5) / n * (box.hi.x() - box.lo.x()), (j + 0.5) / n * (box.hi.y() - box.lo.y()));
      if (!inside(problem.background, p)) continue;
      const double b = problem.beta(p);
      if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("beta must be positive on the background domain");
      if (inside(problem.immersed, p)) {
        const double b2 = problem.beta2(p);
        if (!(b2 > 0.0) || !std::isfinite(b2)) throw ConfigError("beta2 must be positive on the immersed domain");
        if (b2 <= b) sign_violation = true;
      }
    }
  }
  if (sign_violation) {
    return "beta2 <= beta somewhere on the immersed domain; the discrete stability condition "
           "beta2 > beta is not satisfied";
  }
  return {};
}

void Discretization::update() {
  const ElementKinds k = element_kinds(pair);
  if (layout1.forest_version != forest1.version() || layout1.n_dofs == 0) {
    layout1 = build_dof_layout(forest1, k.u, dirichlet);
  }
  if (layout2.forest_version != forest2.version() || layout2.n_dofs == 0) {
    layout2 = build_dof_layout(forest2, k.u2, false);
    layout_lambda = build_dof_layout(forest2, k.lambda, false);
  }
  cache.update(forest1, forest2);
}

Discretization make_discretization(ElementPair pair, bool dirichlet, MeshForest forest1, MeshForest forest2) {
  if (forest2.n_active() == 0) throw ConfigError("immersed mesh is empty");
  Discretization d;
  d.pair = pair;
  d.dirichlet = dirichlet;
  d.forest1 = std::move(forest1);
  d.forest2 = std::move(forest2);
  d.update();
  return d;
}

Discretization make_discretization(const ProblemSpec& problem, int level1, int level2) {
  return make_discretization(problem.pair, problem.dirichlet_on_boundary, initial_mesh(problem.background, level1),
                             initial_mesh(problem.immersed, level2));
}

namespace {

struct Term {
  int col;
  double w;
};

/// Expresses a DoF through unconstrained DoFs: x[dof] = sum(w * x[col]) + g.
void expand(const ConstraintSet& cs, int dof, std::vector<Term>& terms, double& g) {
  terms.clear();
  g = 0.0;
  if (const ConstraintLine* line = cs.find(dof)) {
    for (const auto& e : line->entries) terms.push_back({e.master, e.weight});
    g = line->inhomogeneity;
  } else {
    terms.push_back({dof, 1.0});
  }
}

/// Output of one cell: matrix triplets and right-hand-side increments.
struct LocalOutput {
  std::vector<Triplet> mat;
  std::vector<std::pair<int, double>> rhs;
};

/// Condensed scatter of a square cell matrix with rows and columns in the same space.
void scatter_square(const Eigen::MatrixXd& K, const Eigen::VectorXd& f, const std::vector<int>& dofs,
                    const ConstraintSet& cs, LocalOutput& out) {
  const auto n = static_cast<Eigen::Index>(dofs.size());
  std::vector<std::vector<Term>> terms(n);
  std::vector<double> g(n);
  for (Eigen::Index i = 0; i < n; ++i) expand(cs, dofs[i], terms[i], g[i]);
  for (Eigen::Index i = 0; i < n; ++i) {
    double fi = f(i);
    for (Eigen::Index k = 0; k < n; ++k) fi -= K(i, k) * g[k];
    for (const Term& r : terms[i]) {
      out.rhs.emplace_back(r.col, r.w * fi);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (K(i, k) == 0.0) continue;
        for (const Term& c : terms[k]) out.mat.emplace_back(r.col, c.col, r.w * c.w * K(i, k));
      }
    }
  }
}

/// Condensed scatter of one coupling row (a P0 row against columns of a constrained space).
void scatter_row(int row, const std::map<int, double>& entries, const ConstraintSet& cs, double sign,
                 LocalOutput& out) {
  std::vector<Term> terms;
  double g = 0.0;
  double rhs = 0.0;
  for (const auto& [dof, value] : entries) {
    expand(cs, dof, terms, g);
    rhs -= sign * value * g;
    for (const Term& t : terms) out.mat.emplace_back(row, t.col, value * t.w);
  }
  if (rhs != 0.0) out.rhs.emplace_back(row, rhs);
}

void gather(const std::vector<LocalOutput>& locals, const ConstraintSet& cs, int rows, int cols, bool placeholders,
            SparseMatrix& mat, Vector& rhs) {
  std::size_t nnz = 0;
  for (const auto& l : locals) nnz += l.mat.size();
  std::vector<Triplet> trip;
  trip.reserve(nnz + cs.size());
  rhs = Vector::Zero(rows);
  for (const auto& l : locals) {
    trip.insert(trip.end(), l.mat.begin(), l.mat.end());
    for (const auto& [i, v] : l.rhs) rhs[i] += v;
  }
  if (placeholders) {
    for (const auto& line : cs.lines()) trip.emplace_back(line.dof, line.dof, 1.0);
  }
  mat.resize(rows, cols);
  mat.setFromTriplets(trip.begin(), trip.end());
}

/// Stiffness, mass and load on every active cell of one forest.
struct CellForms {
  std::vector<LocalOutput> stiffness, mass;
};

CellForms cell_forms(const MeshForest& forest, const DofLayout& layout, const ConstraintSet& cs,
                     const std::function<double(const Point&)>& coef, const std::function<double(const Point&)>& load,
                     bool with_mass) {
  const auto& active = forest.active_cells();
  CellForms forms;
  forms.stiffness.resize(active.size());
  if (with_mass) forms.mass.resize(active.size());
  const QuadratureRule rule = quadrature(layout.kind, QuadraturePurpose::cell);
  parallel_for(active.size(), [&](std::size_t idx) {
    const int c = active[idx];
    const CellVertices cv = forest.cell_vertices(c);
    const auto& dofs = layout.dofs(c);
    const auto n = static_cast<Eigen::Index>(dofs.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd Mm = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeEval e = evaluate_basis(layout.kind, cv, rule.points[q]);
      const double jxw = rule.weights[q] * e.det;
      K.noalias() += (coef(e.x) * jxw) * (e.gradients * e.gradients.transpose());
      f.noalias() += (load(e.x) * jxw) * e.values;
      if (with_mass) Mm.noalias() += jxw * (e.values * e.values.transpose());
    }
    scatter_square(K, f, dofs, cs, forms.stiffness[idx]);
    if (with_mass) scatter_square(Mm, Eigen::VectorXd::Zero(n), dofs, cs, forms.mass[idx]);
  });
  return forms;
}

}  // namespace

BlockSystem assemble(const ProblemSpec& problem, const Discretization& disc) {
  if (disc.forest2.n_active() == 0) throw ConfigError("immersed mesh is empty");
  if (!disc.cache.synced_with(disc.forest1, disc.forest2) || disc.layout1.forest_version != disc.forest1.version() ||
      disc.layout2.forest_version != disc.forest2.version()) {
    throw Error("assemble: discretization is out of date; call update() after mesh changes");
  }
  BlockSystem sys;
  sys.n1 = disc.n1();
  sys.n2 = disc.n2();
  sys.m = disc.m();

  sys.constraints1 = disc.layout1.constraints;
  for (int d : disc.layout1.dirichlet) {
    if (sys.constraints1.is_constrained(d)) continue;
    const double g = problem.dirichlet ? problem.dirichlet(disc.layout1.support_points[d]) : 0.0;
    sys.constraints1.add_line(d, {}, g);
  }
  sys.constraints1.close();
  sys.constraints2 = disc.layout2.constraints;

  // Background block.
  {
    const CellForms forms = cell_forms(disc.forest1, disc.layout1, sys.constraints1, problem.beta, problem.f, false);
    gather(forms.stiffness, sys.constraints1, sys.n1, sys.n1, true, sys.A, sys.F);
  }
  // Immersed block with beta3 = beta2 - beta and f3 = f2 - f.
  {
    auto beta3 = [&](const Point& x) { return problem.beta2(x) - problem.beta(x); };
    auto f3 = [&](const Point& x) { return problem.f2(x) - problem.f(x); };
    const CellForms forms = cell_forms(disc.forest2, disc.layout2, sys.constraints2, beta3, f3, true);
    gather(forms.stiffness, sys.constraints2, sys.n2, sys.n2, true, sys.A2, sys.F2);
    Vector unused;
    gather(forms.mass, sys.constraints2, sys.n2, sys.n2, true, sys.mass2, unused);
  }
  // Coupling blocks, integrated with the immersed-side rule.
  {
    const auto& active2 = disc.forest2.active_cells();
    std::vector<LocalOutput> c_out(active2.size()), m_out(active2.size());
    std::vector<double> areas(active2.size());
    const ElementKinds kinds = element_kinds(disc.pair);
    parallel_for(active2.size(), [&](std::size_t idx) {
      const int c2 = active2[idx];
      const int row = disc.layout_lambda.dofs(c2)[0];
      const auto& pts = coupling_quadrature(disc.cache, c2);
      const auto& dofs2 = disc.layout2.dofs(c2);
      std::map<int, double> c_row, m_row;
      double area = 0.0;
      for (const CouplingPoint& p : pts) {
        area += p.JxW;
        const ShapeValues v1 = shape_values(kinds.u, p.ref1);
        const auto& dofs1 = disc.layout1.dofs(p.cell1);
        for (std::size_t i = 0; i < dofs1.size(); ++i) c_row[dofs1[i]] += p.JxW * v1(i);
        const ShapeValues v2 = shape_values(kinds.u2, p.ref2);
        for (std::size_t j = 0; j < dofs2.size(); ++j) m_row[dofs2[j]] += p.JxW * v2(j);
      }
      areas[idx] = area;
      // G = -C g1 + M g2 from the inhomogeneities of the eliminated columns.
      scatter_row(row, c_row, sys.constraints1, 1.0, c_out[idx]);
      scatter_row(row, m_row, sys.constraints2, -1.0, m_out[idx]);
    });
    Vector g_c, g_m;
    gather(c_out, ConstraintSet{}, sys.m, sys.n1, false, sys.C, g_c);
    gather(m_out, ConstraintSet{}, sys.m, sys.n2, false, sys.M, g_m);
    sys.G = g_c + g_m;
    sys.lambda_mass = Vector::Zero(sys.m);
    for (std::size_t idx = 0; idx < active2.size(); ++idx) {
      sys.lambda_mass[disc.layout_lambda.dofs(active2[idx])[0]] = areas[idx];
    }
  }
  return sys;
}

SparseMatrix BlockSystem::full() const {
  std::vector<Triplet> trip;
  trip.reserve(A.nonZeros() + A2.nonZeros() + 2 * C.nonZeros() + 2 * M.nonZeros());
  auto add = [&](const SparseMatrix& B, int r0, int c0, double s, bool transpose) {
    for (int r = 0; r < B.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(B, r); it; ++it) {
        if (transpose) {
          trip.emplace_back(r0 + static_cast<int>(it.col()), c0 + static_cast<int>(it.row()), s * it.value());
        } else {
          trip.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), s * it.value());
        }
      }
    }
  };
  add(A, 0, 0, 1.0, false);
  add(A2, n1, n1, 1.0, false);
  add(C, 0, n1 + n2, 1.0, true);     // C^T in the first block row
  add(M, n1, n1 + n2, -1.0, true);   // -M^T in the second block row
  add(C, n1 + n2, 0, 1.0, false);
  add(M, n1 + n2, n1, -1.0, false);
  SparseMatrix K(size(), size());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Vector BlockSystem::rhs() const {
  Vector b(size());
  b << F, F2, G;
  return b;
}

Solution split(const BlockSystem& system, const Vector& x) {
  return {x.head(system.n1), x.segment(system.n1, system.n2), x.tail(system.m)};
}

Vector stack(const Solution& s) {
  Vector x(s.u.size() + s.u2.size() + s.lambda.size());
  x << s.u, s.u2, s.lambda;
  return x;
}

ResidualNorms residual(const BlockSystem& system, const Solution& s) {
  Vector u = s.u, u2 = s.u2;
  system.constraints1.zero_constrained(u);
  system.constraints2.zero_constrained(u2);
  ResidualNorms r;
  r.r1 = (system.F - system.A * u - system.C.transpose() * s.lambda).norm();
  r.r2 = (system.F2 - system.A2 * u2 + system.M.transpose() * s.lambda).norm();
  r.r3 = (system.G - system.C * u + system.M * u2).norm();
  return r;
}

Vector interpolate(const MeshForest& forest, const DofLayout& layout, const ScalarField& field) {
  (void)forest;
  Vector x = Vector::Zero(layout.n_dofs);
  for (int i = 0; i < layout.n_dofs; ++i) {
    if (layout.entity[i] == DofEntity::bubble) continue;
    x[i] = field(layout.support_points[i]);
  }
  layout.constraints.distribute(x);
  return x;
}

void export_matrix_market(const BlockSystem& system, const std::string& prefix) {
  const std::pair<const char*, const SparseMatrix*> blocks[] = {
      {"A", &system.A}, {"A2", &system.A2}, {"C", &system.C}, {"M", &system.M}};
  for (const auto& [name, mat] : blocks) {
    const Eigen::SparseMatrix<double> colmajor = *mat;
    if (!Eigen::saveMarket(colmajor, prefix + "_" + name + ".mtx")) {
      throw Error("could not write " + prefix + "_" + name + ".mtx");
    }
  }
  if (!Eigen::saveMarketVector(system.rhs(), prefix + "_rhs.mtx")) {
    throw Error("could not write " + prefix + "_rhs.mtx");
  }
}

}  // namespace fictifem
