#pragma once

#include "fictifem/dofs.hpp"
#include "fictifem/geometry.hpp"
#include "fictifem/mesh.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fictifem {

/// One quadrature point of an immersed cell, located in the background forest.
struct CouplingPoint {
  Point x;
  double JxW = 0.0;
  RefPoint ref2;  // reference coordinates in the immersed cell
  int cell1 = -1;
  RefPoint ref1;  // reference coordinates in the background cell
};

/// Background locations of the coupling quadrature points of every active immersed cell.
///
/// update() brings the cache in line with the current forests: entries of immersed cells
/// that disappeared are dropped, new cells are located, and points whose background cell
/// was refined are relocated. When the background forest was coarsened the whole cache is
/// rebuilt. Reads are const and safe to run concurrently after update().
class CrossEvalCache {
 public:
  explicit CrossEvalCache(QuadratureRule rule = tensor_gauss(5)) : rule_(std::move(rule)) {}

  void update(const MeshForest& background, const MeshForest& immersed);
  const std::vector<CouplingPoint>& points(int cell2) const;
  const QuadratureRule& rule() const { return rule_; }
  bool synced_with(const MeshForest& background, const MeshForest& immersed) const {
    return version1_ == background.version() && version2_ == immersed.version();
  }

  struct Stats {
    std::size_t located = 0;     // points located from scratch
    std::size_t relocated = 0;   // points whose background cell changed
    std::size_t reused = 0;      // points kept as-is
    std::size_t full_rebuilds = 0;
  };
  const Stats& stats() const { return stats_; }
  void clear();

 private:
  std::vector<CouplingPoint> locate_cell(const MeshForest& background, const MeshForest& immersed, int c2);

  QuadratureRule rule_;
  std::unordered_map<int, std::vector<CouplingPoint>> entries_;
  std::uint64_t version1_ = 0, version2_ = 0;
  std::uint64_t epoch1_ = 0;
  bool has_epoch_ = false;
  Stats stats_;
};

/// Value and physical gradient of a finite element function at a point of a known cell.
struct FieldValue {
  double value = 0.0;
  Point gradient = Point::Zero();
};

/// coeffs must already have its constrained entries distributed.
FieldValue eval_at(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, int cell,
                   const RefPoint& ref);

/// Locates p in the background forest and evaluates there. Throws LocationError if p is
/// outside the forest.
FieldValue eval_background(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs,
                           const Point& p);

/// Treatment of points inside the analytic immersed domain but outside the polygonal mesh.
enum class SliverPolicy { zero, nearest_cell };

/// lambda_h extended by zero: the value of the containing immersed cell when `inside(domain, p)`
/// holds and such a cell exists. Points in the sliver between the analytic boundary and the
/// mesh return 0, or the value of the nearest boundary cell for SliverPolicy::nearest_cell.
double eval_multiplier(const MeshForest& immersed, const DofLayout& layout_lambda, const Vector& lambda,
                       const DomainSpec& domain, const Point& p, SliverPolicy policy = SliverPolicy::zero);

/// Active immersed cell nearest to p among the cells touching the mesh boundary.
int nearest_boundary_cell(const MeshForest& immersed, const Point& p);

/// All coupling quadrature points of an active immersed cell, located in the background forest.
const std::vector<CouplingPoint>& coupling_quadrature(const CrossEvalCache& cache, int cell2);

}  // namespace fictifem
