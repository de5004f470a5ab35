#pragma once

#include "fictifem/fe.hpp"
#include "fictifem/mesh.hpp"
#include "fictifem/types.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fictifem {

struct ConstraintEntry {
  int master = -1;
  double weight = 0.0;
};

/// x[dof] = sum(weight * x[master]) + inhomogeneity
struct ConstraintLine {
  int dof = -1;
  std::vector<ConstraintEntry> entries;
  double inhomogeneity = 0.0;
};

/// Affine constraints between global DoFs (hanging nodes, and Dirichlet values once
/// merged by the assembler).
class ConstraintSet {
 public:
  void add_line(int dof, std::vector<ConstraintEntry> entries, double inhomogeneity = 0.0);
  bool is_constrained(int dof) const { return index_.contains(dof); }
  const ConstraintLine* find(int dof) const;
  const std::vector<ConstraintLine>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }

  /// Substitutes constrained masters until no right-hand side refers to a constrained DoF,
  /// merges repeated masters and drops zero weights. Throws on cyclic constraints.
  void close();

  /// Overwrites constrained entries of x from their masters.
  void distribute(Vector& x) const;
  /// Sets constrained entries to zero.
  void zero_constrained(Vector& x) const;

 private:
  std::vector<ConstraintLine> lines_;
  std::unordered_map<int, std::size_t> index_;
};

enum class DofEntity { vertex, edge, interior, bubble };

/// Global numbering of one finite element space on the active cells of a forest.
struct DofLayout {
  ElementKind kind = ElementKind::Q1;
  /// Indexed by cell id; empty for cells that are not active. Local order follows `fe.hpp`.
  std::vector<std::vector<int>> cell_to_dofs;
  int n_dofs = 0;
  /// Hanging-node constraints only (homogeneous, closed).
  ConstraintSet constraints;
  /// Sorted DoFs on the domain boundary (only when requested).
  std::vector<int> dirichlet;
  /// Nodal support point of each DoF (cell centre for bubble and P0 DoFs).
  std::vector<Point> support_points;
  std::vector<DofEntity> entity;
  /// Vertex id to DoF, -1 where the vertex carries none.
  std::vector<int> vertex_to_dof;
  std::uint64_t forest_version = 0;

  const std::vector<int>& dofs(int cell) const { return cell_to_dofs[cell]; }
  int n_free() const;
};

DofLayout build_dof_layout(const MeshForest& forest, ElementKind kind, bool dirichlet_boundary);

}  // namespace fictifem
