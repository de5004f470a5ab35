#pragma once

#include "fictifem/types.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace fictifem {

/// Reference elements on the unit square [0,1]^2.
///
/// Local DoF ordering:
///  - vertices 0..3 at (0,0), (1,0), (1,1), (0,1);
///  - Q1B: index 4 is the cell bubble 16x(1-x)y(1-y);
///  - Q2: indices 4..7 are the midpoints of faces 0..3
///    (face k joins vertex k and vertex k+1 mod 4), index 8 is the centre;
///  - P0: a single constant.
enum class ElementKind { Q1, Q1B, Q2, P0 };

int dofs_per_cell(ElementKind kind);
std::string_view to_string(ElementKind kind);

constexpr int max_dofs_per_cell = 9;

using ShapeValues = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_dofs_per_cell, 1>;
using ShapeGradients = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, max_dofs_per_cell, 2>;
/// Columns hold (d2/dx2, d2/dxdy, d2/dy2).
using ShapeHessians = Eigen::Matrix<double, Eigen::Dynamic, 3, 0, max_dofs_per_cell, 3>;

ShapeValues shape_values(ElementKind kind, const RefPoint& p);
ShapeGradients shape_gradients(ElementKind kind, const RefPoint& p);
ShapeHessians shape_hessians(ElementKind kind, const RefPoint& p);

using CellVertices = std::array<Point, 4>;

struct CellMap {
  Point x;
  Eigen::Matrix2d jacobian;  // columns are d x / d xi and d x / d eta
  double det = 0.0;
};

/// Bilinear image of a reference point, without any validity check.
Point forward_map(const CellVertices& v, const RefPoint& p);

/// Bilinear map with Jacobian. Throws InvertedCellError if det J <= 0.
CellMap map_cell(const CellVertices& v, const RefPoint& p);

/// Newton inversion of the bilinear map (initial guess (0.5,0.5), tolerance 1e-12,
/// at most 20 iterations). The result is not clipped to the unit square.
std::optional<RefPoint> inverse_map(const CellVertices& v, const Point& x);

/// True if every corner Jacobian of the bilinear map is strictly positive.
bool has_positive_jacobian(const CellVertices& v);

struct QuadratureRule {
  std::vector<RefPoint> points;  // edge rules store (t, 0)
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

enum class QuadraturePurpose { cell, edge, coupling };

/// n-point Gauss-Legendre rule on [0,1] stored as (t, 0) points.
QuadratureRule gauss_legendre(int n);
/// n x n tensor Gauss-Legendre rule on [0,1]^2.
QuadratureRule tensor_gauss(int n);

/// Cell rules: 3x3 for Q1/Q1B/P0, 4x4 for Q2. Edge rules: 3 points (4 for Q2).
/// Coupling rules (inter-mesh terms, error norms): 5x5.
QuadratureRule quadrature(ElementKind kind, QuadraturePurpose purpose);

/// Reference coordinates of the point at parameter t along local face `face`
/// (traversed from vertex `face` to vertex `face+1`).
RefPoint face_point(int face, double t);

/// Basis values, physical gradients and physical Laplacians at one point.
struct ShapeEval {
  Point x;
  double det = 0.0;
  ShapeValues values;
  ShapeGradients gradients;
  ShapeValues laplacians;
};

/// Evaluates the basis of `kind` on the cell at a reference point. Laplacians use the
/// exact second-derivative transform of the bilinear map; they are only filled when
/// `with_laplacians` is set.
ShapeEval evaluate_basis(ElementKind kind, const CellVertices& v, const RefPoint& p,
                         bool with_laplacians = false);

/// Precomputed per-quadrature-point evaluation on one cell (reinit per cell).
class CellValues {
 public:
  CellValues(ElementKind kind, QuadratureRule rule, bool with_laplacians = false);

  void reinit(const CellVertices& v);

  std::size_t n_points() const { return rule_.size(); }
  const QuadratureRule& rule() const { return rule_; }
  const ShapeEval& at(std::size_t q) const { return evals_[q]; }
  double JxW(std::size_t q) const { return rule_.weights[q] * evals_[q].det; }
  ElementKind kind() const { return kind_; }

 private:
  ElementKind kind_;
  QuadratureRule rule_;
  bool with_laplacians_;
  std::vector<ShapeEval> evals_;
};

}  // namespace fictifem
