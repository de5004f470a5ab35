#pragma once

#include "fictifem/dofs.hpp"
#include "fictifem/estimator.hpp"
#include "fictifem/mesh.hpp"

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace fictifem {

struct VtkPointField {
  std::string name;
  const DofLayout* layout = nullptr;
  const Vector* values = nullptr;  // constraints distributed
};

/// Cell data aligned with forest.active_cells().
using VtkCellField = std::pair<std::string, std::vector<double>>;

/// Legacy ASCII unstructured grid of the active cells (VTK_QUAD = 9). Point data are
/// the vertex values of finite element functions.
void write_vtk(std::ostream& os, const MeshForest& forest, const std::vector<VtkPointField>& point_data,
               const std::vector<VtkCellField>& cell_data, const std::string& title = "fictifem");
void write_vtk(const std::string& path, const MeshForest& forest, const std::vector<VtkPointField>& point_data,
               const std::vector<VtkCellField>& cell_data, const std::string& title = "fictifem");

/// Writes <dir>/omega_<cycle>.vtk (u, eta, osc, lambda extended by zero at cell centres)
/// and <dir>/omega2_<cycle>.vtk (u2, eta, osc, lambda).
void write_cycle_vtk(const std::string& dir, int cycle, const StateView& s, const IndicatorField& eta1,
                     const IndicatorField& eta2);

}  // namespace fictifem
