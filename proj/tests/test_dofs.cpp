#include <doctest.h>

#include "fictifem/assembly.hpp"
#include "fictifem/dofs.hpp"
#include "fictifem/intergrid.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace fictifem;

namespace {

MeshForest random_forest(unsigned seed, int rounds) {
  std::mt19937 rng(seed);
  MeshForest f = structured_forest({0, 0}, {1, 1}, 3, 2);
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> flag;
    for (int c : f.active_cells()) {
      if (rng() % 4 == 0) flag.push_back(c);
    }
    f.refine(flag);
  }
  return f;
}

int count_vertices(const MeshForest& f) {
  std::set<int> v;
  for (int c : f.active_cells()) v.insert(f.cell(c).vertex_ids.begin(), f.cell(c).vertex_ids.end());
  return static_cast<int>(v.size());
}

int count_faces(const MeshForest& f) {
  std::set<std::pair<int, int>> e;
  for (int c : f.active_cells()) {
    const auto& v = f.cell(c).vertex_ids;
    for (int k = 0; k < 4; ++k) e.insert(std::minmax(v[k], v[(k + 1) % 4]));
  }
  return static_cast<int>(e.size());
}

}  // namespace

TEST_CASE("2x2 Q1 layout") {
  const DofLayout l = build_dof_layout(structured_forest({0, 0}, {2, 2}, 2, 2), ElementKind::Q1, false);
  CHECK(l.n_dofs == 9);
  CHECK(l.constraints.empty());
  CHECK(l.dirichlet.empty());
  const DofLayout d = build_dof_layout(structured_forest({0, 0}, {2, 2}, 2, 2), ElementKind::Q1, true);
  CHECK(d.dirichlet.size() == 8);
  CHECK(d.n_free() == 1);
}

TEST_CASE("single refined cell next to a coarse one gives one hanging vertex with weights 1/2") {
  MeshForest f = structured_forest({0, 0}, {2, 1}, 2, 1);
  f.refine(std::vector<int>{0});
  const DofLayout l = build_dof_layout(f, ElementKind::Q1, false);
  REQUIRE(l.constraints.size() == 1);
  const ConstraintLine& line = l.constraints.lines()[0];
  CHECK((l.support_points[line.dof] - Point(1, 0.5)).norm() < 1e-14);
  REQUIRE(line.entries.size() == 2);
  std::set<std::pair<double, double>> masters;
  for (const auto& e : line.entries) {
    CHECK(e.weight == doctest::Approx(0.5));
    masters.insert({l.support_points[e.master].x(), l.support_points[e.master].y()});
  }
  CHECK(masters == std::set<std::pair<double, double>>{{1, 0}, {1, 1}});
}

TEST_CASE("one-cell Q1B layout") {
  const DofLayout l = build_dof_layout(structured_forest({0, 0}, {1, 1}, 1, 1), ElementKind::Q1B, false);
  CHECK(l.n_dofs == 5);
  CHECK(l.entity[l.dofs(0)[4]] == DofEntity::bubble);
}

TEST_CASE("DoF counts agree with brute-force entity counting") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const MeshForest f = random_forest(seed, 3);
    REQUIRE(f.n_active() <= 200);
    const int nv = count_vertices(f), ne = count_faces(f), nc = static_cast<int>(f.n_active());
    CHECK(build_dof_layout(f, ElementKind::Q1, false).n_dofs == nv);
    CHECK(build_dof_layout(f, ElementKind::Q1B, false).n_dofs == nv + nc);
    CHECK(build_dof_layout(f, ElementKind::Q2, false).n_dofs == nv + ne + nc);
    CHECK(build_dof_layout(f, ElementKind::P0, false).n_dofs == nc);
    const int hanging = static_cast<int>(f.hanging_edges().size());
    CHECK(build_dof_layout(f, ElementKind::Q1, false).constraints.size() == static_cast<std::size_t>(hanging));
    CHECK(build_dof_layout(f, ElementKind::Q2, false).constraints.size() == static_cast<std::size_t>(3 * hanging));
  }
}

TEST_CASE("constrained interpolation is continuous across hanging edges") {
  const ScalarField bilinear = [](const Point& x) { return 1.0 + 2 * x.x() - x.y() + 3 * x.x() * x.y(); };
  const ScalarField biquadratic = [](const Point& x) {
    return 0.5 + x.x() * x.x() - 2 * x.y() * x.y() + x.x() * x.y() + x.x() * x.x() * x.y() * x.y();
  };
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MeshForest f = random_forest(7, 4);
  const auto hanging = f.hanging_edges();
  REQUIRE(!hanging.empty());
  for (auto [kind, field] : {std::pair{ElementKind::Q1, bilinear}, std::pair{ElementKind::Q2, biquadratic}}) {
    const DofLayout l = build_dof_layout(f, kind, false);
    const Vector c = interpolate(f, l, field);
    for (int i = 0; i < 100; ++i) {
      const HangingEdge& h = hanging[rng() % hanging.size()];
      const int side = static_cast<int>(rng() % 2);
      const double t = u(rng);
      const int fine = h.fine_cells[side];
      const Point xf = side == 0 ? (1 - t) * f.vertex(h.a) + t * f.vertex(h.midpoint)
                                 : (1 - t) * f.vertex(h.midpoint) + t * f.vertex(h.b);
      const auto rf = inverse_map(f.cell_vertices(fine), xf);
      REQUIRE(rf);
      const auto rcx = inverse_map(f.cell_vertices(h.coarse_cell), xf);
      REQUIRE(rcx);
      const double vc = eval_at(f, l, c, h.coarse_cell, *rcx).value;
      const double vf = eval_at(f, l, c, fine, *rf).value;
      CHECK(std::abs(vc - vf) < 1e-12);
      CHECK(std::abs(vc - field(xf)) < 1e-12);
    }
  }
}

TEST_CASE("ConstraintSet") {
  SUBCASE("close resolves chains and merges masters") {
    ConstraintSet s;
    s.add_line(0, {{1, 0.5}, {2, 0.5}});
    s.add_line(1, {{2, 1.0}}, 1.0);
    s.close();
    const ConstraintLine* line = s.find(0);
    REQUIRE(line);
    REQUIRE(line->entries.size() == 1);
    CHECK(line->entries[0].master == 2);
    CHECK(line->entries[0].weight == doctest::Approx(1.0));
    CHECK(line->inhomogeneity == doctest::Approx(0.5));
  }
  SUBCASE("cycles are rejected") {
    ConstraintSet s;
    s.add_line(0, {{1, 1.0}});
    s.add_line(1, {{0, 1.0}});
    CHECK_THROWS(s.close());
  }
  SUBCASE("distribute and zero") {
    ConstraintSet s;
    s.add_line(2, {{0, 0.25}, {1, 0.75}}, 1.0);
    Vector x(3);
    x << 4, 8, -1;
    s.distribute(x);
    CHECK(x[2] == doctest::Approx(1 + 1 + 6));
    s.zero_constrained(x);
    CHECK(x[2] == 0.0);
    CHECK(x[0] == 4.0);
  }
}
