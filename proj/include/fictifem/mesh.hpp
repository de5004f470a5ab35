#pragma once

#include "fictifem/fe.hpp"
#include "fictifem/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace fictifem {

struct BoundingBox {
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void expand(const Point& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const BoundingBox& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Point& p, double tol) const {
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
           p.y() <= hi.y() + tol;
  }
  bool intersects(const BoundingBox& b) const {
    return lo.x() <= b.hi.x() && b.lo.x() <= hi.x() && lo.y() <= b.hi.y() && b.lo.y() <= hi.y();
  }
};

/// One quadrilateral of the forest. Vertex ids are counterclockwise; face k joins
/// vertex k and vertex (k+1) mod 4. Children are ordered by the parent corner they touch.
struct Cell {
  std::array<int, 4> vertex_ids{};
  int level = 0;
  std::optional<int> parent;
  std::optional<std::array<int, 4>> children;
  double diameter = 0.0;  // longer diagonal
  std::array<bool, 4> on_boundary{};
  /// Leaves that belong to the current tiling. Cells removed by coarsening stay in the
  /// cell array as inactive leaves so that indices are never reused.
  bool active = false;

  bool is_leaf() const { return !children.has_value(); }
};

struct Location {
  int cell = -1;
  RefPoint reference;
};

/// An interior edge between two active cells. For nonconforming edges the geometry is
/// the sub-edge of the fine side; `left` is the fine cell and `right` the coarse one.
struct EdgeRecord {
  std::array<Point, 2> ends;
  int left = -1;
  int right = -1;
  int left_face = -1;
  int right_face = -1;
  bool conforming = true;

  double length() const { return (ends[1] - ends[0]).norm(); }
};

struct BoundaryEdgeRecord {
  std::array<Point, 2> ends;
  int cell = -1;
  int face = -1;

  double length() const { return (ends[1] - ends[0]).norm(); }
};

/// A coarse face (a -> b in the coarse cell's orientation) split on the other side.
struct HangingEdge {
  int coarse_cell = -1;
  int coarse_face = -1;
  int a = -1, b = -1, midpoint = -1;
  std::array<int, 2> fine_cells{};  // fine_cells[0] touches a, fine_cells[1] touches b
  std::array<int, 2> fine_faces{};
};

/// Projects newly created boundary vertices onto a curved boundary.
using BoundaryProjector = std::function<Point(const Point&)>;

/// 2:1-balanced quadrilateral forest with hanging nodes.
///
/// Refinement splits a cell into four children through the face midpoints; the balance
/// closure then refines neighbours until adjacent active cells differ by at most one level.
/// Coarsening only merges complete sibling families and never breaks the balance.
class MeshForest {
 public:
  MeshForest() = default;
  MeshForest(std::vector<Point> vertices, const std::vector<std::array<int, 4>>& roots,
             BoundaryProjector projector = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int c) const { return cells_[c]; }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_roots() const { return n_roots_; }
  const std::vector<int>& active_cells() const { return active_; }
  std::size_t n_active() const { return active_.size(); }
  CellVertices cell_vertices(int c) const;
  BoundingBox cell_bbox(int c) const { return bbox_[c]; }
  BoundingBox bounding_box() const;

  double cell_area(int c) const;
  double total_area() const;
  double max_diameter() const;
  double min_diameter() const;
  /// Largest diameter^2 / area over active cells.
  double shape_bound() const;
  int max_level() const;

  /// Bumped on every mutation. Unique across all forests in the process.
  std::uint64_t version() const { return version_; }
  /// Bumped only when coarsening actually removed cells.
  std::uint64_t coarsen_epoch() const { return coarsen_epoch_; }

  /// Refine the flagged active cells, then restore 2:1 balance.
  void refine(std::span<const int> flagged);
  /// Merge sibling families whose four members are all flagged, when this keeps balance.
  void coarsen(std::span<const int> flagged);

  std::vector<EdgeRecord> interior_edges() const;
  std::vector<BoundaryEdgeRecord> boundary_edges() const;
  std::vector<HangingEdge> hanging_edges() const;

  /// Active cell containing p (lowest index on shared edges) with reference coordinates.
  std::optional<Location> locate(const Point& p) const;

  /// Largest level difference between edge-adjacent active cells.
  int max_level_difference() const;
  bool vertex_in_use(int v) const { return v >= 0 && v < static_cast<int>(vertex_use_.size()) && vertex_use_[v] > 0; }
  std::optional<int> edge_midpoint(int a, int b) const;
  bool has_projector() const { return static_cast<bool>(projector_); }

 private:
  static std::uint64_t edge_key(int a, int b);
  static std::uint64_t next_version();
  int midpoint_vertex(int a, int b, bool on_boundary);
  int add_vertex(const Point& p);
  int add_cell(Cell c);
  void refine_one(int c);
  bool needs_balance_refinement(int c) const;
  bool sub_edge_is_split(int a, int b) const;
  void rebuild_active();
  void locate_recursive(int c, const Point& p, double tol, std::optional<Location>& best) const;

  std::vector<Point> vertices_;
  std::vector<int> vertex_use_;
  std::vector<Cell> cells_;
  std::vector<BoundingBox> bbox_;
  std::vector<BoundingBox> subtree_bbox_;
  std::vector<int> active_;
  std::unordered_map<std::uint64_t, int> midpoints_;
  BoundaryProjector projector_;
  std::size_t n_roots_ = 0;
  std::uint64_t version_ = 0;
  std::uint64_t coarsen_epoch_ = 0;
};

/// Value-returning wrappers matching the operation contracts.
MeshForest refine_cells(MeshForest forest, std::span<const int> flagged);
MeshForest coarsen_cells(MeshForest forest, std::span<const int> flagged);
std::vector<EdgeRecord> interior_edges(const MeshForest& forest);
std::optional<Location> locate_point(const MeshForest& forest, const Point& p);

/// Structured nx x ny forest of axis-aligned root cells over [lo, hi].
MeshForest structured_forest(const Point& lo, const Point& hi, int nx, int ny);

}  // namespace fictifem
