#include "fictifem/norms.hpp"

#include "fictifem/parallel.hpp"

#include <cmath>

namespace fictifem {

ErrorNorms error_norms(const StateView& s, const ExactSolution& exact) {
  const auto& d = s.disc;
  const QuadratureRule rule = tensor_gauss(5);

  auto accumulate = [&](const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, auto value,
                        auto gradient, double& l2, double& h1) {
    const auto& active = forest.active_cells();
    std::vector<double> l2_cell(active.size()), h1_cell(active.size());
    parallel_for(active.size(), [&](std::size_t i) {
      const int c = active[i];
      const CellVertices cv = forest.cell_vertices(c);
      const auto& dofs = layout.dofs(c);
      double a = 0.0, b = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const ShapeEval e = evaluate_basis(layout.kind, cv, rule.points[q]);
        double uh = 0.0;
        Point gh = Point::Zero();
        for (std::size_t k = 0; k < dofs.size(); ++k) {
          uh += coeffs[dofs[k]] * e.values(k);
          gh += coeffs[dofs[k]] * e.gradients.row(k).transpose();
        }
        const double jxw = rule.weights[q] * e.det;
        const double ev = value(e.x) - uh;
        a += ev * ev * jxw;
        b += (gradient(e.x) - gh).squaredNorm() * jxw;
      }
      l2_cell[i] = a;
      h1_cell[i] = b;
    });
    l2 = 0.0;
    h1 = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      l2 += l2_cell[i];
      h1 += h1_cell[i];
    }
  };

  const DomainSpec& immersed = s.problem.immersed;
  auto u_ext = [&](const Point& x) { return inside(immersed, x) ? exact.u2(x) : exact.u(x); };
  auto grad_ext = [&](const Point& x) { return inside(immersed, x) ? exact.grad_u2(x) : exact.grad_u(x); };

  ErrorNorms out;
  double l2 = 0, h1 = 0;
  accumulate(d.forest1, d.layout1, s.solution.u, u_ext, grad_ext, l2, h1);
  out.l2_u = std::sqrt(l2);
  out.h1_u = std::sqrt(h1);
  accumulate(d.forest2, d.layout2, s.solution.u2, exact.u2, exact.grad_u2, l2, h1);
  out.l2_u2 = std::sqrt(l2);
  out.h1semi_u2 = std::sqrt(h1);
  out.h1_u2 = std::sqrt(l2 + h1);
  return out;
}

}  // namespace fictifem
