#include "fictifem/presets.hpp"
#include "fictifem/solver.hpp"
#include "fictifem/study.hpp"

#include "testing.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace fictifem;
using fictifem::testing::box_problem;

namespace {

/// Hand-made system with diagonal blocks A = 2I, A2 = 3I and one multiplier.
BlockSystem toy_blocks() {
  BlockSystem s;
  s.n1 = 2;
  s.n2 = 2;
  s.m = 1;
  auto diag = [](double v) {
    SparseMatrix D(2, 2);
    D.insert(0, 0) = v;
    D.insert(1, 1) = v;
    D.makeCompressed();
    return D;
  };
  s.A = diag(2.0);
  s.A2 = diag(3.0);
  s.mass2 = diag(1.0);
  s.C.resize(1, 2);
  s.C.insert(0, 0) = 1.0;
  s.C.insert(0, 1) = 0.5;
  s.M.resize(1, 2);
  s.M.insert(0, 0) = 0.25;
  s.M.insert(0, 1) = 1.0;
  s.lambda_mass = Vector::Constant(1, 2.0);
  s.F = Vector::Zero(2);
  s.F2 = Vector::Zero(2);
  s.G = Vector::Zero(1);
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.restart = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.gmres_rel_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SolverConfig{};
  c.schur_scaling = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_solver_method("GMRES") == SolverMethod::gmres);
  CHECK_THROWS_AS(parse_solver_method("cg"), ConfigError);
}

TEST_CASE("zero right-hand side gives the zero solution") {
  const ProblemSpec p = box_problem({0, 0}, {2, 2}, {0.5, 0.5}, {1.5, 1.5}, 1.0, 10.0, 0.0, 0.0);
  const Discretization d = make_discretization(p, 2, 1);
  const BlockSystem sys = assemble(p, d);
  for (SolverMethod method : {SolverMethod::direct, SolverMethod::gmres}) {
    SolverConfig c;
    c.method = method;
    const SolveResult r = solve(sys, c);
    CHECK(stack(r.solution).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.report.converged);
  }
}

TEST_CASE("toy system matches a dense direct solve") {
  // One background cell and one immersed cell: 4 + 5 + 1 DoFs.
  const ProblemSpec p = box_problem({0, 0}, {1, 1}, {0.25, 0.25}, {0.75, 0.75}, 1.0, 10.0, 1.0, 3.0);
  const Discretization d = make_discretization(ElementPair::Q1_Q1B_P0, true, structured_forest({0, 0}, {1, 1}, 1, 1),
                                               structured_forest({0.25, 0.25}, {0.75, 0.75}, 1, 1));
  const BlockSystem sys = assemble(p, d);
  REQUIRE(sys.size() <= 15);
  const Eigen::MatrixXd K(sys.full());
  const Eigen::VectorXd x = K.fullPivLu().solve(sys.rhs());
  const SolveResult r = solve(sys, SolverConfig{});
  CHECK((stack(r.solution) - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("direct and GMRES agree on the circle") {
  const Preset preset = make_preset("circle_10");
  const Discretization d = make_discretization(preset.problem, 3, 2);
  const BlockSystem sys = assemble(preset.problem, d);
  const SolveResult direct = solve(sys, SolverConfig{});
  SolverConfig g;
  g.method = SolverMethod::gmres;
  const SolveResult iterative = solve(sys, g);
  CHECK(iterative.report.iterations > 0);
  CHECK(iterative.report.iterations < 400);
  CHECK((stack(direct.solution) - stack(iterative.solution)).cwiseAbs().maxCoeff() < 1e-7);

  const double scale = 1.0 + sys.rhs().norm();
  const ResidualNorms res = direct.report.residual;
  CHECK(std::sqrt(res.r1 * res.r1 + res.r2 * res.r2 + res.r3 * res.r3) <= 1e-9 * scale);

  SUBCASE("cell averages of u_h and u_2h agree after the solve") {
    const StateView view{preset.problem, d, direct.solution};
    CHECK(constraint_defect(view) <= 1e-8 * (1.0 + direct.solution.u.cwiseAbs().maxCoeff()));
  }
  SUBCASE("GMRES reports non-convergence") {
    SolverConfig tight = g;
    tight.max_iters = 2;
    CHECK_THROWS_AS(solve(sys, tight), SolverError);
  }
}

TEST_CASE("block preconditioner") {
  const BlockSystem sys = toy_blocks();
  BlockPreconditioner pc;
  pc.setup(sys, 1.0);
  const double delta = pc.delta();
  CHECK(delta == doctest::Approx(1e-8 * 6.0 / 2.0));

  Vector r(5);
  r << 1.0, -2.0, 0.5, 4.0, 3.0;
  const Vector z = pc.apply(r);
  // Back substitution by hand.
  const double lambda = 3.0 / (-2.0);
  const double u2a = (0.5 + 0.25 * lambda) / (3.0 + delta);
  const double u2b = (4.0 + 1.0 * lambda) / (3.0 + delta);
  const double ua = (1.0 - 1.0 * lambda) / 2.0;
  const double ub = (-2.0 - 0.5 * lambda) / 2.0;
  CHECK(z[4] == doctest::Approx(lambda).epsilon(1e-14));
  CHECK(z[2] == doctest::Approx(u2a).epsilon(1e-12));
  CHECK(z[3] == doctest::Approx(u2b).epsilon(1e-12));
  CHECK(z[0] == doctest::Approx(ua).epsilon(1e-12));
  CHECK(z[1] == doctest::Approx(ub).epsilon(1e-12));

  SUBCASE("doubling the Schur scaling halves the multiplier component") {
    BlockPreconditioner pc2;
    pc2.setup(sys, 2.0);
    CHECK(pc2.apply(r)[4] == doctest::Approx(0.5 * z[4]).epsilon(1e-14));
  }
  SUBCASE("zero residual gives zero correction") {
    CHECK(pc.apply(Vector::Zero(5)).norm() == 0.0);
  }
  SUBCASE("zero cell area is rejected") {
    BlockSystem bad = toy_blocks();
    bad.lambda_mass[0] = 0.0;
    BlockPreconditioner p3;
    CHECK_THROWS_AS(p3.setup(bad, 1.0), SolverError);
  }
}
