#include "fictifem/dofs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace fictifem {

void ConstraintSet::add_line(int dof, std::vector<ConstraintEntry> entries, double inhomogeneity) {
  if (index_.contains(dof)) throw Error("constraint for DoF " + std::to_string(dof) + " already present");
  index_.emplace(dof, lines_.size());
  lines_.push_back({dof, std::move(entries), inhomogeneity});
}

const ConstraintLine* ConstraintSet::find(int dof) const {
  const auto it = index_.find(dof);
  return it == index_.end() ? nullptr : &lines_[it->second];
}

void ConstraintSet::close() {
  const std::size_t max_rounds = lines_.size() + 2;
  for (std::size_t round = 0;; ++round) {
    if (round > max_rounds) throw Error("ConstraintSet::close: cyclic constraints");
    bool changed = false;
    for (auto& line : lines_) {
      std::map<int, double> merged;
      double inhom = line.inhomogeneity;
      for (const auto& e : line.entries) {
        if (e.master == line.dof) throw Error("ConstraintSet::close: DoF constrained to itself");
        if (const ConstraintLine* sub = find(e.master)) {
          changed = true;
          inhom += e.weight * sub->inhomogeneity;
          for (const auto& s : sub->entries) merged[s.master] += e.weight * s.weight;
        } else {
          merged[e.master] += e.weight;
        }
      }
      line.entries.clear();
      for (const auto& [m, w] : merged) {
        if (w != 0.0) line.entries.push_back({m, w});
      }
      line.inhomogeneity = inhom;
    }
    if (!changed) break;
  }
}

void ConstraintSet::distribute(Vector& x) const {
  for (const auto& line : lines_) {
    double v = line.inhomogeneity;
    for (const auto& e : line.entries) v += e.weight * x[e.master];
    x[line.dof] = v;
  }
}

void ConstraintSet::zero_constrained(Vector& x) const {
  for (const auto& line : lines_) x[line.dof] = 0.0;
}

int DofLayout::n_free() const {
  std::set<int> fixed(dirichlet.begin(), dirichlet.end());
  for (const auto& line : constraints.lines()) fixed.insert(line.dof);
  return n_dofs - static_cast<int>(fixed.size());
}

namespace {

std::uint64_t pair_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

}  // namespace

DofLayout build_dof_layout(const MeshForest& forest, ElementKind kind, bool dirichlet_boundary) {
  DofLayout layout;
  layout.kind = kind;
  layout.forest_version = forest.version();
  layout.cell_to_dofs.assign(forest.n_cells(), {});
  layout.vertex_to_dof.assign(forest.vertices().size(), -1);

  std::unordered_map<std::uint64_t, int> edge_dof;
  auto new_dof = [&](const Point& x, DofEntity e) {
    layout.support_points.push_back(x);
    layout.entity.push_back(e);
    return layout.n_dofs++;
  };

  for (int c : forest.active_cells()) {
    const auto& vid = forest.cell(c).vertex_ids;
    const CellVertices cv = forest.cell_vertices(c);
    auto& local = layout.cell_to_dofs[c];
    local.reserve(dofs_per_cell(kind));
    if (kind == ElementKind::P0) {
      local.push_back(new_dof(forward_map(cv, {0.5, 0.5}), DofEntity::interior));
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      int& d = layout.vertex_to_dof[vid[k]];
      if (d < 0) d = new_dof(cv[k], DofEntity::vertex);
      local.push_back(d);
    }
    if (kind == ElementKind::Q1B) {
      local.push_back(new_dof(forward_map(cv, {0.5, 0.5}), DofEntity::bubble));
    } else if (kind == ElementKind::Q2) {
      for (int k = 0; k < 4; ++k) {
        const int a = vid[k], b = vid[(k + 1) % 4];
        auto [it, fresh] = edge_dof.try_emplace(pair_key(a, b), -1);
        if (fresh) it->second = new_dof(0.5 * (cv[k] + cv[(k + 1) % 4]), DofEntity::edge);
        local.push_back(it->second);
      }
      local.push_back(new_dof(forward_map(cv, {0.5, 0.5}), DofEntity::interior));
    }
  }

  if (kind != ElementKind::P0) {
    for (const HangingEdge& h : forest.hanging_edges()) {
      const int da = layout.vertex_to_dof[h.a];
      const int db = layout.vertex_to_dof[h.b];
      const int dm = layout.vertex_to_dof[h.midpoint];
      if (kind == ElementKind::Q2) {
        const int de = edge_dof.at(pair_key(h.a, h.b));
        layout.constraints.add_line(dm, {{de, 1.0}});
        layout.constraints.add_line(edge_dof.at(pair_key(h.a, h.midpoint)),
                                    {{da, 0.375}, {de, 0.75}, {db, -0.125}});
        layout.constraints.add_line(edge_dof.at(pair_key(h.midpoint, h.b)),
                                    {{da, -0.125}, {de, 0.75}, {db, 0.375}});
      } else {
        layout.constraints.add_line(dm, {{da, 0.5}, {db, 0.5}});
      }
    }
    layout.constraints.close();
  }

  if (dirichlet_boundary && kind != ElementKind::P0) {
    std::set<int> fixed;
    for (const auto& e : forest.boundary_edges()) {
      const auto& local = layout.cell_to_dofs[e.cell];
      fixed.insert(local[e.face]);
      fixed.insert(local[(e.face + 1) % 4]);
      if (kind == ElementKind::Q2) fixed.insert(local[4 + e.face]);
    }
    layout.dirichlet.assign(fixed.begin(), fixed.end());
  }
  return layout;
}

}  // namespace fictifem
