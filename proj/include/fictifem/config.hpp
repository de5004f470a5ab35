#pragma once

#include "fictifem/adapt.hpp"
#include "fictifem/assembly.hpp"
#include "fictifem/estimator.hpp"
#include "fictifem/solver.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace fictifem {

struct ProblemConfig {
  ElementPair element = ElementPair::Q1_Q1B_P0;
  std::optional<int> level1;  // preset default when absent
  std::optional<int> level2;
  CoefficientMode mode = CoefficientMode::constant;
};

struct OutputConfig {
  std::string directory = "fictifem_out";
  bool csv = true;
  bool vtk = false;
  bool summary = true;
  bool matrix_market = false;
};

/// Run configuration. Text form:
///
///   # comment
///   [problem]   element, level1, level2, mode
///   [adapt]     alpha1, alpha2, tol, max_cycles, max_dofs, marking
///   [solver]    method, gmres_rel_tol, restart, max_iters, schur_scaling
///   [output]    directory, csv, vtk, summary, matrix_market
///
/// with one `key = value` per line.
struct Config {
  ProblemConfig problem;
  AdaptConfig adapt;
  SolverConfig solver;
  OutputConfig output;
};

/// Parses configuration text; errors carry "<source>:<line>:" prefixes.
Config parse_config(std::string_view text, const std::string& source = "<config>");
Config load_config(const std::string& path);

}  // namespace fictifem
