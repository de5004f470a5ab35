#pragma once

#include "fictifem/assembly.hpp"
#include "fictifem/mesh.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace fictifem {

enum class CoefficientMode { constant, smooth };

std::string_view to_string(CoefficientMode m);
CoefficientMode parse_coefficient_mode(std::string_view s);

/// Per-cell indicators of one mesh. Entry i belongs to cells[i] (the active cells in
/// forest order). eta[i]^2 is the sum of the four squared contributions.
struct IndicatorField {
  std::vector<int> cells;
  std::vector<double> element_sq;      // h_K^2 ||R_K||^2
  std::vector<double> edge_sq;         // half-weighted interior edge terms
  std::vector<double> interface_sq;    // full-weight terms on the immersed boundary
  std::vector<double> restriction_sq;  // ||u_h - u_2h||_{1,K}^2 (immersed mesh only)
  std::vector<double> eta;
  std::vector<double> osc;

  std::size_t size() const { return cells.size(); }
  double global() const;
  double osc_global() const;
  /// Field with the given cell values (cells numbered 0..n-1), all in element_sq.
  static IndicatorField from_values(const std::vector<double>& eta);
};

/// A solved state; references must outlive the view.
struct StateView {
  const ProblemSpec& problem;
  const Discretization& disc;
  const Solution& solution;
};

/// Quadrature mean of a field over a cell.
double project_p0(const ScalarField& field, const CellVertices& cell, const QuadratureRule& rule);

/// ||R_K1||_{0,K}, with R_K1 = beta Lap u_h - lambda_h (extended by zero) + P0 f.
double element_residual_1(const StateView& s, int cell1, CoefficientMode mode);
/// ||R_E1||_{0,E}: jump of the (coefficient-weighted) normal derivative across an interior edge.
double edge_residual_1(const StateView& s, const EdgeRecord& edge, CoefficientMode mode);
/// ||R_K2||_{0,K}, with R_K2 = beta3 Lap u_2h + lambda_h + P0 f3.
double element_residual_2(const StateView& s, int cell2, CoefficientMode mode);
/// Interior edge of the immersed mesh.
double edge_residual_2(const StateView& s, const EdgeRecord& edge, CoefficientMode mode);
/// Edge on the immersed boundary: one-sided conormal derivative beta3 du_2h/dn.
double interface_residual_2(const StateView& s, const BoundaryEdgeRecord& edge, CoefficientMode mode);
/// ||u_h - u_2h||_{1,K2}^2 by coupling quadrature.
double restriction_sq(const StateView& s, int cell2);

struct OscillationFields {
  std::vector<double> osc1, osc2;  // aligned with the active cells of each forest
};

OscillationFields oscillations(const StateView& s, CoefficientMode mode);

/// Indicators for both meshes (oscillations included).
std::pair<IndicatorField, IndicatorField> indicators(const StateView& s, CoefficientMode mode);

/// Throws ConfigError if constant mode is requested for a problem whose coefficients vary.
void check_coefficient_mode(const ProblemSpec& problem, CoefficientMode mode);

}  // namespace fictifem
