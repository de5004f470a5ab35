#include <doctest.h>

#include "fictifem/fe.hpp"

#include <cmath>
#include <random>

using namespace fictifem;

TEST_CASE("dof counts") {
  CHECK(dofs_per_cell(ElementKind::Q1) == 4);
  CHECK(dofs_per_cell(ElementKind::Q1B) == 5);
  CHECK(dofs_per_cell(ElementKind::Q2) == 9);
  CHECK(dofs_per_cell(ElementKind::P0) == 1);
}

TEST_CASE("shape values") {
  const ShapeValues a = shape_values(ElementKind::Q1, {0, 0});
  CHECK(a(0) == 1.0);
  CHECK(a(1) == 0.0);
  CHECK(a(2) == 0.0);
  CHECK(a(3) == 0.0);
  const ShapeValues b = shape_values(ElementKind::Q1, {0.5, 0.5});
  for (int i = 0; i < 4; ++i) CHECK(b(i) == doctest::Approx(0.25));
  CHECK(shape_values(ElementKind::Q1B, {0.25, 0.5})(4) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(shape_values(ElementKind::Q1B, {0.5, 0.5})(4) == doctest::Approx(1.0));
  CHECK(shape_values(ElementKind::P0, {0.2, 0.9})(0) == 1.0);
}

TEST_CASE("nodal property of Q2") {
  const RefPoint nodes[9] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0}, {1, 0.5}, {0.5, 1}, {0, 0.5}, {0.5, 0.5}};
  for (int j = 0; j < 9; ++j) {
    const ShapeValues v = shape_values(ElementKind::Q2, nodes[j]);
    for (int i = 0; i < 9; ++i) CHECK(v(i) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("shape gradients") {
  const ShapeGradients g = shape_gradients(ElementKind::Q1, {0, 0});
  CHECK(g(0, 0) == -1.0);
  CHECK(g(0, 1) == -1.0);
  const ShapeGradients p0 = shape_gradients(ElementKind::P0, {0.3, 0.4});
  CHECK(p0(0, 0) == 0.0);
  CHECK(p0(0, 1) == 0.0);
}

TEST_CASE("partition of unity, bubble support and gradient consistency") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const RefPoint p(u(rng), u(rng));
    for (ElementKind k : {ElementKind::Q1, ElementKind::Q2}) {
      CHECK(std::abs(shape_values(k, p).sum() - 1.0) < 1e-14);
      CHECK(shape_gradients(k, p).colwise().sum().norm() < 1e-13);
    }
    const RefPoint b = face_point(i % 4, u(rng));
    CHECK(std::abs(shape_values(ElementKind::Q1B, b)(4)) < 1e-15);
    for (ElementKind k : {ElementKind::Q1, ElementKind::Q1B, ElementKind::Q2}) {
      const ShapeGradients g = shape_gradients(k, p);
      const ShapeValues dx = (shape_values(k, p + RefPoint(h, 0)) - shape_values(k, p - RefPoint(h, 0))) / (2 * h);
      const ShapeValues dy = (shape_values(k, p + RefPoint(0, h)) - shape_values(k, p - RefPoint(0, h))) / (2 * h);
      CHECK((g.col(0) - dx).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((g.col(1) - dy).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("map_cell") {
  const CellVertices unit = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  const CellMap a = map_cell(unit, {0.3, 0.8});
  CHECK(a.x.x() == doctest::Approx(0.3));
  CHECK(a.x.y() == doctest::Approx(0.8));
  CHECK((a.jacobian - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  CHECK(a.det == doctest::Approx(1.0));

  const CellVertices big = {Point(0, 0), Point(2, 0), Point(2, 2), Point(0, 2)};
  const CellMap b = map_cell(big, {0.5, 0.5});
  CHECK(b.x.x() == doctest::Approx(1.0));
  CHECK(b.det == doctest::Approx(4.0));

  const CellVertices trap = {Point(0, 0), Point(2, 0), Point(2.5, 2), Point(0, 1.5)};
  const CellMap c = map_cell(trap, {0.5, 0.5});
  const double h = 1e-6;
  const Point dxi = (forward_map(trap, {0.5 + h, 0.5}) - forward_map(trap, {0.5 - h, 0.5})) / (2 * h);
  const Point deta = (forward_map(trap, {0.5, 0.5 + h}) - forward_map(trap, {0.5, 0.5 - h})) / (2 * h);
  CHECK(std::abs(c.det - (dxi.x() * deta.y() - dxi.y() * deta.x())) < 1e-8);

  const CellVertices inverted = {Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)};
  CHECK_THROWS_AS(map_cell(inverted, {0.5, 0.5}), InvertedCellError);
  CHECK_FALSE(has_positive_jacobian(inverted));
}

TEST_CASE("inverse_map round trip") {
  const CellVertices trap = {Point(0, 0), Point(2, 0), Point(2.5, 2), Point(0, 1.5)};
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const RefPoint r(u(rng), u(rng));
    const auto back = inverse_map(trap, forward_map(trap, r));
    REQUIRE(back);
    CHECK((*back - r).norm() < 1e-10);
  }
}

TEST_CASE("quadrature") {
  for (ElementKind k : {ElementKind::Q1, ElementKind::Q1B, ElementKind::Q2, ElementKind::P0}) {
    const QuadratureRule r = quadrature(k, QuadraturePurpose::cell);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(quadrature(ElementKind::Q1, QuadraturePurpose::cell).size() == 9);
  CHECK(quadrature(ElementKind::Q2, QuadraturePurpose::cell).size() == 16);
  CHECK(quadrature(ElementKind::Q1, QuadraturePurpose::coupling).size() == 25);
  CHECK(quadrature(ElementKind::Q1, QuadraturePurpose::edge).size() == 3);
  CHECK(quadrature(ElementKind::Q2, QuadraturePurpose::edge).size() == 4);

  const QuadratureRule cell = quadrature(ElementKind::Q1, QuadraturePurpose::cell);
  double x2y2 = 0.0;
  for (std::size_t q = 0; q < cell.size(); ++q) {
    x2y2 += cell.weights[q] * std::pow(cell.points[q].x(), 2) * std::pow(cell.points[q].y(), 2);
  }
  CHECK(std::abs(x2y2 - 1.0 / 9.0) < 1e-15);
  const QuadratureRule edge = quadrature(ElementKind::Q2, QuadraturePurpose::edge);
  double x6 = 0.0;
  for (std::size_t q = 0; q < edge.size(); ++q) x6 += edge.weights[q] * std::pow(edge.points[q].x(), 6);
  CHECK(std::abs(x6 - 1.0 / 7.0) < 1e-15);
}

TEST_CASE("physical Laplacians") {
  // Q2 reproduces x^2 + 3xy on an affine parallelogram; its Laplacian is 2.
  const CellVertices par = {Point(0, 0), Point(2, 0), Point(2.5, 1), Point(0.5, 1)};
  const RefPoint nodes[9] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0}, {1, 0.5}, {0.5, 1}, {0, 0.5}, {0.5, 0.5}};
  Eigen::Matrix<double, 9, 1> c;
  for (int i = 0; i < 9; ++i) {
    const Point x = forward_map(par, nodes[i]);
    c(i) = x.x() * x.x() + 3 * x.x() * x.y();
  }
  const ShapeEval e = evaluate_basis(ElementKind::Q2, par, {0.3, 0.6}, true);
  CHECK(c.dot(e.laplacians) == doctest::Approx(2.0).epsilon(1e-12));
  const double gx = c.dot(e.gradients.col(0));
  CHECK(gx == doctest::Approx(2 * e.x.x() + 3 * e.x.y()).epsilon(1e-12));
  // Bilinear functions on a rectangle have zero Laplacian.
  const CellVertices rect = {Point(0, 0), Point(2, 0), Point(2, 1), Point(0, 1)};
  const ShapeEval q1 = evaluate_basis(ElementKind::Q1, rect, {0.2, 0.7}, true);
  CHECK(q1.laplacians.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("CellValues reinit matches direct evaluation") {
  CellValues cv(ElementKind::Q1B, tensor_gauss(3));
  const CellVertices trap = {Point(0, 0), Point(2, 0), Point(2.5, 2), Point(0, 1.5)};
  cv.reinit(trap);
  double area = 0.0;
  for (std::size_t q = 0; q < cv.n_points(); ++q) {
    area += cv.JxW(q);
    const ShapeEval direct = evaluate_basis(ElementKind::Q1B, trap, cv.rule().points[q]);
    CHECK((direct.values - cv.at(q).values).norm() < 1e-15);
  }
  CHECK(area == doctest::Approx(3.875).epsilon(1e-12));  // shoelace formula
}
