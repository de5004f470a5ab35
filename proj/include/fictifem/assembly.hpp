#pragma once

#include "fictifem/dofs.hpp"
#include "fictifem/geometry.hpp"
#include "fictifem/intergrid.hpp"
#include "fictifem/mesh.hpp"
#include "fictifem/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace fictifem {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Discrete spaces for (u_h, u_2h, lambda_h).
enum class ElementPair { Q1_Q1B_P0, Q2_Q2_P0 };

struct ElementKinds {
  ElementKind u, u2, lambda;
};

ElementKinds element_kinds(ElementPair pair);
std::string_view to_string(ElementPair pair);
/// Accepts "Q1-(Q1+B)-P0", "Q1-Q1B-P0", "q1b", "Q2-Q2-P0", "q2".
ElementPair parse_element_pair(std::string_view s);

/// Exact solution: u on the outer region, u2 on the immersed domain.
struct ExactSolution {
  ScalarField u;
  VectorField grad_u;
  ScalarField u2;
  VectorField grad_u2;
};

struct ProblemSpec {
  std::string name;
  DomainSpec background;
  DomainSpec immersed;
  ScalarField beta;
  ScalarField beta2;
  ScalarField f;
  ScalarField f2;
  /// Optional coefficient gradients; central differences are used when empty.
  VectorField grad_beta;
  VectorField grad_beta2;
  /// Boundary data for u on the outer boundary; zero when empty.
  ScalarField dirichlet;
  bool dirichlet_on_boundary = true;
  ElementPair pair = ElementPair::Q1_Q1B_P0;
  std::optional<ExactSolution> exact;
};

/// Samples coefficients for positivity (throws ConfigError) and checks the domain pair.
/// Returns a warning text when beta2 <= beta somewhere on the immersed domain, else empty.
std::string validate_problem(const ProblemSpec& problem);

/// Gradient of a scalar field, from the supplied oracle or by central differences.
Point field_gradient(const ScalarField& field, const VectorField& grad, const Point& p, double scale);

/// The two forests with their DoF layouts and the coupling cache.
struct Discretization {
  ElementPair pair = ElementPair::Q1_Q1B_P0;
  bool dirichlet = true;
  MeshForest forest1;
  MeshForest forest2;
  DofLayout layout1;
  DofLayout layout2;
  DofLayout layout_lambda;
  CrossEvalCache cache;

  /// Rebuilds layouts for forests whose version changed and syncs the cache.
  void update();
  int n1() const { return layout1.n_dofs; }
  int n2() const { return layout2.n_dofs; }
  int m() const { return layout_lambda.n_dofs; }
  int total_dofs() const { return n1() + n2() + m(); }
};

Discretization make_discretization(const ProblemSpec& problem, int level1, int level2);
Discretization make_discretization(ElementPair pair, bool dirichlet, MeshForest forest1, MeshForest forest2);

/// [[A, 0, C^T], [0, A2, -M^T], [C, -M, 0]] (u, u2, lambda) = (F, F2, G).
///
/// Hanging-node and Dirichlet constraints are condensed: constrained rows of A and A2 hold
/// identity placeholders with zero right-hand side, and their columns are folded into the
/// masters. Dirichlet values enter F and G through the inhomogeneities.
struct BlockSystem {
  SparseMatrix A, A2, C, M;
  /// Mass matrix of the immersed primal space (same condensation as A2).
  SparseMatrix mass2;
  /// Areas of the immersed cells, i.e. the diagonal P0 mass matrix.
  Vector lambda_mass;
  Vector F, F2, G;
  int n1 = 0, n2 = 0, m = 0;
  /// Hanging-node plus Dirichlet constraints used for condensation and post-filling.
  ConstraintSet constraints1;
  ConstraintSet constraints2;

  int size() const { return n1 + n2 + m; }
  SparseMatrix full() const;
  Vector rhs() const;
};

BlockSystem assemble(const ProblemSpec& problem, const Discretization& disc);

struct Solution {
  Vector u, u2, lambda;
};

/// Splits a stacked vector (u; u2; lambda) into blocks.
Solution split(const BlockSystem& system, const Vector& x);
/// Stacks (u; u2; lambda).
Vector stack(const Solution& s);

struct ResidualNorms {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
};

/// Euclidean norms of the three block residuals. Constrained entries of the solution are
/// ignored, so both raw and post-filled solutions can be passed.
ResidualNorms residual(const BlockSystem& system, const Solution& s);

/// Nodal interpolant of `field` (bubble DoFs zero) with hanging constraints applied.
Vector interpolate(const MeshForest& forest, const DofLayout& layout, const ScalarField& field);

/// Writes A, A2, C, M and the stacked right-hand side in Matrix Market format as
/// <prefix>_A.mtx etc.
void export_matrix_market(const BlockSystem& system, const std::string& prefix);

}  // namespace fictifem
