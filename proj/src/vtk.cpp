#include "fictifem/vtk.hpp"

#include "fictifem/intergrid.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace fictifem {

void write_vtk(std::ostream& os, const MeshForest& forest, const std::vector<VtkPointField>& point_data,
               const std::vector<VtkCellField>& cell_data, const std::string& title) {
  const auto& active = forest.active_cells();
  std::vector<int> compact(forest.vertices().size(), -1);
  std::vector<int> used;
  for (int c : active) {
    for (int v : forest.cell(c).vertex_ids) {
      if (compact[v] < 0) {
        compact[v] = static_cast<int>(used.size());
        used.push_back(v);
      }
    }
  }
  for (const auto& [name, values] : cell_data) {
    if (values.size() != active.size()) throw Error("VTK cell field '" + name + "' has the wrong length");
  }
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(15);
  os << "POINTS " << used.size() << " double\n";
  for (int v : used) os << forest.vertex(v).x() << ' ' << forest.vertex(v).y() << " 0\n";
  os << "CELLS " << active.size() << ' ' << 5 * active.size() << '\n';
  for (int c : active) {
    const auto& ids = forest.cell(c).vertex_ids;
    os << 4 << ' ' << compact[ids[0]] << ' ' << compact[ids[1]] << ' ' << compact[ids[2]] << ' ' << compact[ids[3]] << '\n';
  }
  os << "CELL_TYPES " << active.size() << '\n';
  for (std::size_t i = 0; i < active.size(); ++i) os << "9\n";
  if (!point_data.empty()) {
    os << "POINT_DATA " << used.size() << '\n';
    for (const auto& f : point_data) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int v : used) {
        const int d = f.layout->vertex_to_dof[v];
        os << (d >= 0 ? (*f.values)[d] : 0.0) << '\n';
      }
    }
  }
  if (!cell_data.empty()) {
    os << "CELL_DATA " << active.size() << '\n';
    for (const auto& [name, values] : cell_data) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : values) os << x << '\n';
    }
  }
}

void write_vtk(const std::string& path, const MeshForest& forest, const std::vector<VtkPointField>& point_data,
               const std::vector<VtkCellField>& cell_data, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_vtk(out, forest, point_data, cell_data, title);
}

void write_cycle_vtk(const std::string& dir, int cycle, const StateView& s, const IndicatorField& eta1,
                     const IndicatorField& eta2) {
  std::filesystem::create_directories(dir);
  const auto& d = s.disc;
  std::vector<double> lam1;
  lam1.reserve(eta1.size());
  for (int c : d.forest1.active_cells()) {
    const Point x = forward_map(d.forest1.cell_vertices(c), {0.5, 0.5});
    lam1.push_back(eval_multiplier(d.forest2, d.layout_lambda, s.solution.lambda, s.problem.immersed, x));
  }
  std::vector<double> lam2;
  for (int c : d.forest2.active_cells()) lam2.push_back(s.solution.lambda[d.layout_lambda.dofs(c)[0]]);
  const std::string tag = std::to_string(cycle);
  write_vtk(dir + "/omega_" + tag + ".vtk", d.forest1, {{"u", &d.layout1, &s.solution.u}},
            {{"eta", eta1.eta}, {"osc", eta1.osc}, {"lambda", lam1}}, "background mesh, cycle " + tag);
  write_vtk(dir + "/omega2_" + tag + ".vtk", d.forest2, {{"u2", &d.layout2, &s.solution.u2}},
            {{"eta", eta2.eta}, {"osc", eta2.osc}, {"lambda", lam2}}, "immersed mesh, cycle " + tag);
}

}  // namespace fictifem
