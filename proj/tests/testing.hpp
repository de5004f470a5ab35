#pragma once

#include "fictifem/assembly.hpp"
#include "fictifem/geometry.hpp"

#include <cmath>

namespace fictifem::testing {

inline ScalarField constant(double c) {
  return [c](const Point&) { return c; };
}

/// Problem on rectangles with constant data; no exact solution.
inline ProblemSpec box_problem(Point lo1, Point hi1, Point lo2, Point hi2, double beta = 1.0, double beta2 = 10.0,
                               double f = 1.0, double f2 = 1.0) {
  ProblemSpec p;
  p.name = "box";
  p.background = DomainSpec{Rectangle{lo1, hi1}, DomainRole::background};
  p.immersed = DomainSpec{Square{lo2, hi2}, DomainRole::immersed};
  p.beta = constant(beta);
  p.beta2 = constant(beta2);
  p.f = constant(f);
  p.f2 = constant(f2);
  p.grad_beta = [](const Point&) { return Point(0, 0); };
  p.grad_beta2 = p.grad_beta;
  return p;
}

/// First DoF whose support point coincides with p, or -1.
inline int dof_at(const DofLayout& layout, const Point& p) {
  for (int i = 0; i < layout.n_dofs; ++i) {
    if ((layout.support_points[i] - p).norm() < 1e-12) return i;
  }
  return -1;
}

}  // namespace fictifem::testing
