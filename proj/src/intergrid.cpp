#include "fictifem/intergrid.hpp"

#include <limits>
#include <string>

namespace fictifem {

namespace {

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point d = b - a;
  const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

std::string point_str(const Point& p) {
  return "(" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")";
}

}  // namespace

void CrossEvalCache::clear() {
  entries_.clear();
  version1_ = version2_ = 0;
  has_epoch_ = false;
}

std::vector<CouplingPoint> CrossEvalCache::locate_cell(const MeshForest& background,
                                                      const MeshForest& immersed, int c2) {
  const CellVertices cv = immersed.cell_vertices(c2);
  std::vector<CouplingPoint> pts;
  pts.reserve(rule_.size());
  for (std::size_t q = 0; q < rule_.size(); ++q) {
    const CellMap m = map_cell(cv, rule_.points[q]);
    const auto loc = background.locate(m.x);
    if (!loc) {
      throw LocationError("immersed quadrature point " + point_str(m.x) +
                          " lies outside the background mesh");
    }
    pts.push_back({m.x, rule_.weights[q] * m.det, rule_.points[q], loc->cell, loc->reference});
    ++stats_.located;
  }
  return pts;
}

void CrossEvalCache::update(const MeshForest& background, const MeshForest& immersed) {
  if (synced_with(background, immersed)) return;
  if (!has_epoch_ || epoch1_ != background.coarsen_epoch()) {
    if (has_epoch_) ++stats_.full_rebuilds;
    entries_.clear();
  }
  std::unordered_map<int, std::vector<CouplingPoint>> next;
  next.reserve(immersed.n_active());
  for (int c2 : immersed.active_cells()) {
    auto it = entries_.find(c2);
    if (it == entries_.end()) {
      next.emplace(c2, locate_cell(background, immersed, c2));
      continue;
    }
    auto pts = std::move(it->second);
    for (auto& p : pts) {
      if (background.cell(p.cell1).active) {
        ++stats_.reused;
        continue;
      }
      const auto loc = background.locate(p.x);
      if (!loc) throw LocationError("immersed quadrature point " + point_str(p.x) + " left the background mesh");
      p.cell1 = loc->cell;
      p.ref1 = loc->reference;
      ++stats_.relocated;
    }
    next.emplace(c2, std::move(pts));
  }
  entries_ = std::move(next);
  version1_ = background.version();
  version2_ = immersed.version();
  epoch1_ = background.coarsen_epoch();
  has_epoch_ = true;
}

const std::vector<CouplingPoint>& CrossEvalCache::points(int cell2) const {
  const auto it = entries_.find(cell2);
  if (it == entries_.end()) throw Error("CrossEvalCache: no entry for immersed cell " + std::to_string(cell2));
  return it->second;
}

const std::vector<CouplingPoint>& coupling_quadrature(const CrossEvalCache& cache, int cell2) {
  return cache.points(cell2);
}

FieldValue eval_at(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs, int cell,
                   const RefPoint& ref) {
  const ShapeEval e = evaluate_basis(layout.kind, forest.cell_vertices(cell), ref);
  const auto& dofs = layout.dofs(cell);
  FieldValue out;
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const double c = coeffs[dofs[i]];
    out.value += c * e.values(i);
    out.gradient += c * e.gradients.row(i).transpose();
  }
  return out;
}

FieldValue eval_background(const MeshForest& forest, const DofLayout& layout, const Vector& coeffs,
                           const Point& p) {
  const auto loc = forest.locate(p);
  if (!loc) throw LocationError("point " + point_str(p) + " is outside the background mesh");
  return eval_at(forest, layout, coeffs, loc->cell, loc->reference);
}

int nearest_boundary_cell(const MeshForest& immersed, const Point& p) {
  int best = -1;
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& e : immersed.boundary_edges()) {
    const double d = segment_distance(p, e.ends[0], e.ends[1]);
    if (d < dist) dist = d, best = e.cell;
  }
  if (best < 0) throw Error("nearest_boundary_cell: immersed mesh has no boundary edges");
  return best;
}

double eval_multiplier(const MeshForest& immersed, const DofLayout& layout_lambda, const Vector& lambda,
                       const DomainSpec& domain, const Point& p, SliverPolicy policy) {
  if (!inside(domain, p)) return 0.0;
  if (const auto loc = immersed.locate(p)) return lambda[layout_lambda.dofs(loc->cell)[0]];
  if (policy == SliverPolicy::zero) return 0.0;
  return lambda[layout_lambda.dofs(nearest_boundary_cell(immersed, p))[0]];
}

}  // namespace fictifem
