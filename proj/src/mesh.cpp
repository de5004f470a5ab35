#include "fictifem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>

namespace fictifem {

namespace {

struct EdgeUse {
  std::array<int, 2> cells{-1, -1};
  std::array<int, 2> faces{-1, -1};
  int count = 0;
};

double quad_area(const CellVertices& v) {
  // Shoelace formula; exact for the straight-edged bilinear quadrilateral.
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Point& p = v[k];
    const Point& q = v[(k + 1) % 4];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double quad_diameter(const CellVertices& v) {
  return std::max((v[2] - v[0]).norm(), (v[3] - v[1]).norm());
}

}  // namespace

std::uint64_t MeshForest::edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

std::uint64_t MeshForest::next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

MeshForest::MeshForest(std::vector<Point> vertices, const std::vector<std::array<int, 4>>& roots,
                       BoundaryProjector projector)
    : vertices_(std::move(vertices)), projector_(std::move(projector)) {
  vertex_use_.assign(vertices_.size(), 0);
  std::unordered_map<std::uint64_t, int> face_count;
  for (const auto& r : roots) {
    for (int k = 0; k < 4; ++k) ++face_count[edge_key(r[k], r[(k + 1) % 4])];
  }
  for (const auto& r : roots) {
    Cell c;
    c.vertex_ids = r;
    c.level = 0;
    c.active = true;
    for (int k = 0; k < 4; ++k) c.on_boundary[k] = face_count[edge_key(r[k], r[(k + 1) % 4])] == 1;
    const int id = add_cell(c);
    if (!has_positive_jacobian(cell_vertices(id))) {
      throw InvertedCellError("root cell " + std::to_string(id) + " has a non-positive Jacobian");
    }
    for (int v : r) ++vertex_use_[v];
  }
  n_roots_ = roots.size();
  rebuild_active();
  version_ = next_version();
}

CellVertices MeshForest::cell_vertices(int c) const {
  const auto& ids = cells_[c].vertex_ids;
  return {vertices_[ids[0]], vertices_[ids[1]], vertices_[ids[2]], vertices_[ids[3]]};
}

BoundingBox MeshForest::bounding_box() const {
  BoundingBox b;
  for (std::size_t r = 0; r < n_roots_; ++r) b.expand(subtree_bbox_[r]);
  return b;
}

double MeshForest::cell_area(int c) const { return quad_area(cell_vertices(c)); }

double MeshForest::total_area() const {
  double a = 0.0;
  for (int c : active_) a += cell_area(c);
  return a;
}

double MeshForest::max_diameter() const {
  double h = 0.0;
  for (int c : active_) h = std::max(h, cells_[c].diameter);
  return h;
}

double MeshForest::min_diameter() const {
  double h = std::numeric_limits<double>::infinity();
  for (int c : active_) h = std::min(h, cells_[c].diameter);
  return h;
}

double MeshForest::shape_bound() const {
  double s = 0.0;
  for (int c : active_) s = std::max(s, cells_[c].diameter * cells_[c].diameter / cell_area(c));
  return s;
}

int MeshForest::max_level() const {
  int l = 0;
  for (int c : active_) l = std::max(l, cells_[c].level);
  return l;
}

int MeshForest::add_vertex(const Point& p) {
  vertices_.push_back(p);
  vertex_use_.push_back(0);
  return static_cast<int>(vertices_.size()) - 1;
}

int MeshForest::add_cell(Cell c) {
  const int id = static_cast<int>(cells_.size());
  const CellVertices v = {vertices_[c.vertex_ids[0]], vertices_[c.vertex_ids[1]],
                          vertices_[c.vertex_ids[2]], vertices_[c.vertex_ids[3]]};
  c.diameter = quad_diameter(v);
  BoundingBox b;
  for (const auto& p : v) b.expand(p);
  cells_.push_back(std::move(c));
  bbox_.push_back(b);
  subtree_bbox_.push_back(b);
  return id;
}

std::optional<int> MeshForest::edge_midpoint(int a, int b) const {
  const auto it = midpoints_.find(edge_key(a, b));
  if (it == midpoints_.end()) return std::nullopt;
  return it->second;
}

int MeshForest::midpoint_vertex(int a, int b, bool on_boundary) {
  const auto key = edge_key(a, b);
  if (const auto it = midpoints_.find(key); it != midpoints_.end()) return it->second;
  Point p = 0.5 * (vertices_[a] + vertices_[b]);
  if (on_boundary && projector_) p = projector_(p);
  const int id = add_vertex(p);
  midpoints_.emplace(key, id);
  return id;
}

void MeshForest::refine_one(int c) {
  const Cell parent = cells_[c];
  const auto& v = parent.vertex_ids;
  const auto& b = parent.on_boundary;
  std::array<int, 4> m{};
  for (int k = 0; k < 4; ++k) m[k] = midpoint_vertex(v[k], v[(k + 1) % 4], b[k]);

  // Transfinite centre: equals the vertex average when all faces are straight.
  Point centre = Point::Zero();
  for (int k = 0; k < 4; ++k) centre += 0.5 * vertices_[m[k]] - 0.25 * vertices_[v[k]];
  const int mid = add_vertex(centre);

  const std::array<std::array<int, 4>, 4> child_vertices = {{
      {v[0], m[0], mid, m[3]},
      {m[0], v[1], m[1], mid},
      {mid, m[1], v[2], m[2]},
      {m[3], mid, m[2], v[3]},
  }};
  const std::array<std::array<bool, 4>, 4> child_boundary = {{
      {b[0], false, false, b[3]},
      {b[0], b[1], false, false},
      {false, b[1], b[2], false},
      {false, false, b[2], b[3]},
  }};

  std::array<int, 4> children{};
  for (int k = 0; k < 4; ++k) {
    Cell child;
    child.vertex_ids = child_vertices[k];
    child.level = parent.level + 1;
    child.parent = c;
    child.on_boundary = child_boundary[k];
    child.active = true;
    children[k] = add_cell(child);
    for (int id : child_vertices[k]) ++vertex_use_[id];
  }
  for (int id : v) --vertex_use_[id];
  cells_[c].children = children;
  cells_[c].active = false;

  BoundingBox grown;
  for (int ch : children) grown.expand(bbox_[ch]);
  for (std::optional<int> a = c; a; a = cells_[*a].parent) subtree_bbox_[*a].expand(grown);
}

bool MeshForest::sub_edge_is_split(int a, int b) const {
  const auto m = edge_midpoint(a, b);
  return m && vertex_in_use(*m);
}

bool MeshForest::needs_balance_refinement(int c) const {
  const auto& v = cells_[c].vertex_ids;
  for (int k = 0; k < 4; ++k) {
    const int a = v[k], b = v[(k + 1) % 4];
    const auto m = edge_midpoint(a, b);
    if (!m || !vertex_in_use(*m)) continue;
    if (sub_edge_is_split(a, *m) || sub_edge_is_split(*m, b)) return true;
  }
  return false;
}

void MeshForest::rebuild_active() {
  active_.clear();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].active) active_.push_back(static_cast<int>(c));
  }
}

void MeshForest::refine(std::span<const int> flagged) {
  if (flagged.empty()) return;
  std::set<int> todo(flagged.begin(), flagged.end());
  for (int c : todo) {
    if (c < 0 || c >= static_cast<int>(cells_.size()) || !cells_[c].active) {
      throw Error("refine: cell " + std::to_string(c) + " is not active");
    }
  }
  for (int c : todo) refine_one(c);
  rebuild_active();

  // Balance closure: a cell is refined while some neighbour is two levels finer.
  for (;;) {
    std::vector<int> extra;
    for (int c : active_) {
      if (needs_balance_refinement(c)) extra.push_back(c);
    }
    if (extra.empty()) break;
    for (int c : extra) refine_one(c);
    rebuild_active();
  }
  version_ = next_version();
}

void MeshForest::coarsen(std::span<const int> flagged) {
  std::set<int> marked;
  for (int c : flagged) {
    if (c >= 0 && c < static_cast<int>(cells_.size()) && cells_[c].active) marked.insert(c);
  }
  std::set<int> parents;
  for (int c : marked) {
    if (cells_[c].parent) parents.insert(*cells_[c].parent);
  }

  // Faces of child k that lie on the parent's boundary.
  static constexpr std::array<std::array<int, 2>, 4> outer_faces = {{{0, 3}, {0, 1}, {1, 2}, {2, 3}}};

  bool changed = false;
  for (int p : parents) {
    const auto& kids = *cells_[p].children;
    bool family = true;
    for (int k : kids) family = family && marked.count(k) && cells_[k].active && cells_[k].is_leaf();
    if (!family) continue;

    bool keeps_balance = true;
    for (int k = 0; k < 4 && keeps_balance; ++k) {
      const auto& v = cells_[kids[k]].vertex_ids;
      for (int f : outer_faces[k]) {
        if (sub_edge_is_split(v[f], v[(f + 1) % 4])) {
          keeps_balance = false;
          break;
        }
      }
    }
    if (!keeps_balance) continue;

    for (int k : kids) {
      cells_[k].active = false;
      for (int id : cells_[k].vertex_ids) --vertex_use_[id];
    }
    cells_[p].children.reset();
    cells_[p].active = true;
    for (int id : cells_[p].vertex_ids) ++vertex_use_[id];
    changed = true;
  }
  if (changed) {
    rebuild_active();
    version_ = next_version();
    coarsen_epoch_ = version_;
  }
}

namespace {

std::unordered_map<std::uint64_t, EdgeUse> build_edge_table(const MeshForest& f,
                                                            std::uint64_t (*key)(int, int)) {
  std::unordered_map<std::uint64_t, EdgeUse> table;
  table.reserve(f.n_active() * 3);
  for (int c : f.active_cells()) {
    const auto& v = f.cell(c).vertex_ids;
    for (int k = 0; k < 4; ++k) {
      auto& e = table[key(v[k], v[(k + 1) % 4])];
      if (e.count < 2) {
        e.cells[e.count] = c;
        e.faces[e.count] = k;
      }
      ++e.count;
    }
  }
  return table;
}

}  // namespace

std::vector<HangingEdge> MeshForest::hanging_edges() const {
  const auto table = build_edge_table(*this, &MeshForest::edge_key);
  std::vector<HangingEdge> out;
  for (int c : active_) {
    const auto& v = cells_[c].vertex_ids;
    for (int k = 0; k < 4; ++k) {
      const int a = v[k], b = v[(k + 1) % 4];
      const auto& use = table.at(edge_key(a, b));
      if (use.count != 1) continue;
      const auto m = edge_midpoint(a, b);
      if (!m || !vertex_in_use(*m)) continue;
      const auto ia = table.find(edge_key(a, *m));
      const auto ib = table.find(edge_key(*m, b));
      if (ia == table.end() || ib == table.end()) {
        throw Error("hanging_edges: forest is not 2:1 balanced");
      }
      HangingEdge h;
      h.coarse_cell = c;
      h.coarse_face = k;
      h.a = a;
      h.b = b;
      h.midpoint = *m;
      h.fine_cells = {ia->second.cells[0], ib->second.cells[0]};
      h.fine_faces = {ia->second.faces[0], ib->second.faces[0]};
      out.push_back(h);
    }
  }
  return out;
}

std::vector<EdgeRecord> MeshForest::interior_edges() const {
  const auto table = build_edge_table(*this, &MeshForest::edge_key);
  std::vector<EdgeRecord> out;
  for (int c : active_) {
    const auto& v = cells_[c].vertex_ids;
    for (int k = 0; k < 4; ++k) {
      const int a = v[k], b = v[(k + 1) % 4];
      const auto& use = table.at(edge_key(a, b));
      if (use.count == 2 && use.cells[0] == c) {
        out.push_back({{vertices_[a], vertices_[b]}, use.cells[0], use.cells[1], use.faces[0],
                       use.faces[1], true});
      }
    }
  }
  for (const auto& h : hanging_edges()) {
    for (int s = 0; s < 2; ++s) {
      const int fine = h.fine_cells[s];
      const int face = h.fine_faces[s];
      const auto& fv = cells_[fine].vertex_ids;
      out.push_back({{vertices_[fv[face]], vertices_[fv[(face + 1) % 4]]}, fine, h.coarse_cell, face,
                     h.coarse_face, false});
    }
  }
  return out;
}

std::vector<BoundaryEdgeRecord> MeshForest::boundary_edges() const {
  std::vector<BoundaryEdgeRecord> out;
  for (int c : active_) {
    const auto& cell = cells_[c];
    for (int k = 0; k < 4; ++k) {
      if (!cell.on_boundary[k]) continue;
      out.push_back({{vertices_[cell.vertex_ids[k]], vertices_[cell.vertex_ids[(k + 1) % 4]]}, c, k});
    }
  }
  return out;
}

int MeshForest::max_level_difference() const {
  // Depth of splitting seen across each face of each active cell.
  std::function<int(int, int)> depth = [&](int a, int b) -> int {
    const auto m = edge_midpoint(a, b);
    if (!m || !vertex_in_use(*m)) return 0;
    return 1 + std::max(depth(a, *m), depth(*m, b));
  };
  int worst = 0;
  for (int c : active_) {
    const auto& v = cells_[c].vertex_ids;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, depth(v[k], v[(k + 1) % 4]));
  }
  return worst;
}

void MeshForest::locate_recursive(int c, const Point& p, double tol,
                                  std::optional<Location>& best) const {
  if (!subtree_bbox_[c].contains(p, tol)) return;
  const Cell& cell = cells_[c];
  if (cell.is_leaf()) {
    if (!cell.active || (best && best->cell < c)) return;
    const auto xi = inverse_map(cell_vertices(c), p);
    if (!xi) return;
    constexpr double eps = 1e-10;
    if (xi->x() < -eps || xi->x() > 1 + eps || xi->y() < -eps || xi->y() > 1 + eps) return;
    best = Location{c, xi->cwiseMax(0.0).cwiseMin(1.0)};
    return;
  }
  for (int ch : *cell.children) locate_recursive(ch, p, tol, best);
}

std::optional<Location> MeshForest::locate(const Point& p) const {
  std::optional<Location> best;
  const BoundingBox all = bounding_box();
  const double tol = 1e-10 * std::max(1.0, (all.hi - all.lo).norm());
  for (std::size_t r = 0; r < n_roots_; ++r) locate_recursive(static_cast<int>(r), p, tol, best);
  return best;
}

MeshForest refine_cells(MeshForest forest, std::span<const int> flagged) {
  forest.refine(flagged);
  return forest;
}

MeshForest coarsen_cells(MeshForest forest, std::span<const int> flagged) {
  forest.coarsen(flagged);
  return forest;
}

std::vector<EdgeRecord> interior_edges(const MeshForest& forest) { return forest.interior_edges(); }

std::optional<Location> locate_point(const MeshForest& forest, const Point& p) {
  return forest.locate(p);
}

MeshForest structured_forest(const Point& lo, const Point& hi, int nx, int ny) {
  std::vector<Point> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny);
    }
  }
  std::vector<std::array<int, 4>> roots;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v0 = j * (nx + 1) + i;
      roots.push_back({v0, v0 + 1, v0 + nx + 2, v0 + nx + 1});
    }
  }
  return MeshForest(std::move(vertices), roots);
}

}  // namespace fictifem
