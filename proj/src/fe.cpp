#include "fictifem/fe.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace fictifem {

int dofs_per_cell(ElementKind kind) {
  switch (kind) {
    case ElementKind::Q1: return 4;
    case ElementKind::Q1B: return 5;
    case ElementKind::Q2: return 9;
    case ElementKind::P0: return 1;
  }
  return 0;
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Q1: return "Q1";
    case ElementKind::Q1B: return "Q1B";
    case ElementKind::Q2: return "Q2";
    case ElementKind::P0: return "P0";
  }
  return "?";
}

namespace {

// 1D quadratic Lagrange basis on [0,1] with nodes 0, 1/2, 1 (in that order: end, mid, end).
struct Quad1D {
  std::array<double, 3> v, d, dd;
};

Quad1D quadratic_1d(double t) {
  Quad1D q;
  q.v = {(1 - t) * (1 - 2 * t), 4 * t * (1 - t), t * (2 * t - 1)};
  q.d = {4 * t - 3, 4 - 8 * t, 4 * t - 1};
  q.dd = {4.0, -8.0, 4.0};
  return q;
}

// (x-node, y-node) index into Quad1D for each Q2 local DoF; 0 = left end, 1 = mid, 2 = right end.
constexpr std::array<std::array<int, 2>, 9> q2_nodes = {{
    {0, 0}, {2, 0}, {2, 2}, {0, 2},  // vertices
    {1, 0}, {2, 1}, {1, 2}, {0, 1},  // face midpoints
    {1, 1},                          // centre
}};

}  // namespace

ShapeValues shape_values(ElementKind kind, const RefPoint& p) {
  const double x = p.x(), y = p.y();
  ShapeValues s(dofs_per_cell(kind));
  switch (kind) {
    case ElementKind::P0:
      s(0) = 1.0;
      break;
    case ElementKind::Q1B:
      s(4) = 16.0 * x * (1 - x) * y * (1 - y);
      [[fallthrough]];
    case ElementKind::Q1:
      s(0) = (1 - x) * (1 - y);
      s(1) = x * (1 - y);
      s(2) = x * y;
      s(3) = (1 - x) * y;
      break;
    case ElementKind::Q2: {
      const auto qx = quadratic_1d(x), qy = quadratic_1d(y);
      for (int i = 0; i < 9; ++i) s(i) = qx.v[q2_nodes[i][0]] * qy.v[q2_nodes[i][1]];
      break;
    }
  }
  return s;
}

ShapeGradients shape_gradients(ElementKind kind, const RefPoint& p) {
  const double x = p.x(), y = p.y();
  ShapeGradients g(dofs_per_cell(kind), 2);
  switch (kind) {
    case ElementKind::P0:
      g.setZero();
      break;
    case ElementKind::Q1B:
      g(4, 0) = 16.0 * (1 - 2 * x) * y * (1 - y);
      g(4, 1) = 16.0 * x * (1 - x) * (1 - 2 * y);
      [[fallthrough]];
    case ElementKind::Q1:
      g(0, 0) = -(1 - y), g(0, 1) = -(1 - x);
      g(1, 0) = (1 - y), g(1, 1) = -x;
      g(2, 0) = y, g(2, 1) = x;
      g(3, 0) = -y, g(3, 1) = (1 - x);
      break;
    case ElementKind::Q2: {
      const auto qx = quadratic_1d(x), qy = quadratic_1d(y);
      for (int i = 0; i < 9; ++i) {
        const int a = q2_nodes[i][0], b = q2_nodes[i][1];
        g(i, 0) = qx.d[a] * qy.v[b];
        g(i, 1) = qx.v[a] * qy.d[b];
      }
      break;
    }
  }
  return g;
}

ShapeHessians shape_hessians(ElementKind kind, const RefPoint& p) {
  const double x = p.x(), y = p.y();
  ShapeHessians h(dofs_per_cell(kind), 3);
  h.setZero();
  switch (kind) {
    case ElementKind::P0:
      break;
    case ElementKind::Q1B:
      h(4, 0) = -32.0 * y * (1 - y);
      h(4, 1) = 16.0 * (1 - 2 * x) * (1 - 2 * y);
      h(4, 2) = -32.0 * x * (1 - x);
      [[fallthrough]];
    case ElementKind::Q1:
      h(0, 1) = 1.0;
      h(1, 1) = -1.0;
      h(2, 1) = 1.0;
      h(3, 1) = -1.0;
      break;
    case ElementKind::Q2: {
      const auto qx = quadratic_1d(x), qy = quadratic_1d(y);
      for (int i = 0; i < 9; ++i) {
        const int a = q2_nodes[i][0], b = q2_nodes[i][1];
        h(i, 0) = qx.dd[a] * qy.v[b];
        h(i, 1) = qx.d[a] * qy.d[b];
        h(i, 2) = qx.v[a] * qy.dd[b];
      }
      break;
    }
  }
  return h;
}

Point forward_map(const CellVertices& v, const RefPoint& p) {
  const double x = p.x(), y = p.y();
  return (1 - x) * (1 - y) * v[0] + x * (1 - y) * v[1] + x * y * v[2] + (1 - x) * y * v[3];
}

namespace {

Eigen::Matrix2d bilinear_jacobian(const CellVertices& v, const RefPoint& p) {
  const Point twist = v[0] - v[1] + v[2] - v[3];
  Eigen::Matrix2d J;
  J.col(0) = (v[1] - v[0]) + twist * p.y();
  J.col(1) = (v[3] - v[0]) + twist * p.x();
  return J;
}

}  // namespace

CellMap map_cell(const CellVertices& v, const RefPoint& p) {
  CellMap m;
  m.x = forward_map(v, p);
  m.jacobian = bilinear_jacobian(v, p);
  m.det = m.jacobian.determinant();
  if (!(m.det > 0.0)) {
    throw InvertedCellError("bilinear cell map has non-positive Jacobian determinant " +
                            std::to_string(m.det));
  }
  return m;
}

std::optional<RefPoint> inverse_map(const CellVertices& v, const Point& x) {
  RefPoint xi(0.5, 0.5);
  const double scale = std::max((v[2] - v[0]).norm(), (v[3] - v[1]).norm());
  for (int it = 0; it < 20; ++it) {
    const Point r = x - forward_map(v, xi);
    const Eigen::Matrix2d J = bilinear_jacobian(v, xi);
    const double det = J.determinant();
    if (!(std::abs(det) > 0.0)) return std::nullopt;
    const RefPoint step = J.inverse() * r;
    xi += step;
    if (step.norm() < 1e-12 || r.norm() < 1e-15 * scale) {
      return xi;
    }
  }
  // Accept a result that is converged to the containment tolerance even if the
  // step criterion was not met (happens for points far outside the cell).
  if ((x - forward_map(v, xi)).norm() < 1e-12 * std::max(scale, 1.0)) return xi;
  return std::nullopt;
}

bool has_positive_jacobian(const CellVertices& v) {
  static constexpr std::array<std::array<double, 2>, 4> corners = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  for (const auto& c : corners) {
    if (!(bilinear_jacobian(v, RefPoint(c[0], c[1])).determinant() > 0.0)) return false;
  }
  return true;
}

QuadratureRule gauss_legendre(int n) {
  // Newton iteration on P_n with the three-term recurrence, then map [-1,1] -> [0,1].
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    // Ascending order in t.
    rule.points[n - 1 - i] = RefPoint(0.5 * (z + 1.0), 0.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

QuadratureRule tensor_gauss(int n) {
  const QuadratureRule line = gauss_legendre(n);
  QuadratureRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(line.points[i].x(), line.points[j].x());
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  }
  return rule;
}

QuadratureRule quadrature(ElementKind kind, QuadraturePurpose purpose) {
  const bool quadratic = kind == ElementKind::Q2;
  switch (purpose) {
    case QuadraturePurpose::cell: return tensor_gauss(quadratic ? 4 : 3);
    case QuadraturePurpose::edge: return gauss_legendre(quadratic ? 4 : 3);
    case QuadraturePurpose::coupling: return tensor_gauss(5);
  }
  return {};
}

RefPoint face_point(int face, double t) {
  switch (face) {
    case 0: return {t, 0.0};
    case 1: return {1.0, t};
    case 2: return {1.0 - t, 1.0};
    default: return {0.0, 1.0 - t};
  }
}

ShapeEval evaluate_basis(ElementKind kind, const CellVertices& v, const RefPoint& p,
                         bool with_laplacians) {
  ShapeEval e;
  const CellMap m = map_cell(v, p);
  e.x = m.x;
  e.det = m.det;
  e.values = shape_values(kind, p);
  const Eigen::Matrix2d Jinv = m.jacobian.inverse();
  const ShapeGradients ref_grad = shape_gradients(kind, p);
  // grad_x phi = J^{-T} grad_xi phi, i.e. row-wise ref_grad * J^{-1}.
  e.gradients = ref_grad * Jinv;
  if (with_laplacians) {
    const ShapeHessians ref_hess = shape_hessians(kind, p);
    const Point twist = v[0] - v[1] + v[2] - v[3];
    e.laplacians.resize(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      // Reference Hessian minus the curvature of the map, pulled back by J^{-1}.
      const double cross = ref_hess(i, 1) - e.gradients.row(i).dot(twist);
      Eigen::Matrix2d H;
      H << ref_hess(i, 0), cross, cross, ref_hess(i, 2);
      const Eigen::Matrix2d Hx = Jinv.transpose() * H * Jinv;
      e.laplacians(i) = Hx.trace();
    }
  }
  return e;
}

CellValues::CellValues(ElementKind kind, QuadratureRule rule, bool with_laplacians)
    : kind_(kind), rule_(std::move(rule)), with_laplacians_(with_laplacians),
      evals_(rule_.size()) {}

void CellValues::reinit(const CellVertices& v) {
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    evals_[q] = evaluate_basis(kind_, v, rule_.points[q], with_laplacians_);
  }
}

}  // namespace fictifem
