#pragma once

#include "fictifem/estimator.hpp"
#include "fictifem/solver.hpp"
#include "fictifem/study.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fictifem {

/// Bulk criterion used for marking. `squared`: sum of eta_K^2 over the marked set reaches
/// alpha^2 eta^2. `linear`: sum of eta_K reaches alpha times the sum of all eta_K.
enum class MarkingCriterion { squared, linear };

std::string_view to_string(MarkingCriterion m);
MarkingCriterion parse_marking_criterion(std::string_view s);

struct AdaptConfig {
  double alpha1 = 0.6;
  double alpha2 = 0.0;
  double tol = 1e-6;
  int max_cycles = 8;
  int max_dofs = 200000;
  MarkingCriterion marking = MarkingCriterion::squared;

  /// Throws ConfigError for fractions outside [0,1], non-positive tol or limits.
  void validate() const;
};

/// Minimal set of cells (ties: larger eta first, then lower cell id) whose squared
/// indicators sum to at least alpha^2 * eta^2. Returns cell ids.
std::vector<int> doerfler_mark(const IndicatorField& field, double alpha,
                               MarkingCriterion criterion = MarkingCriterion::squared);

/// Cells from the small end of the ordering whose cumulative squared indicators stay
/// within alpha2^2 * eta^2. Returns cell ids.
std::vector<int> coarsen_mark(const IndicatorField& field, double alpha2);

/// Everything available after the ESTIMATE step of one cycle.
struct CycleState {
  int cycle = 0;
  const ProblemSpec& problem;
  const Discretization& disc;
  const BlockSystem& system;
  const SolveResult& solve;
  const IndicatorField& eta1;
  const IndicatorField& eta2;
  const StudyRecord& record;
};

struct LoopOptions {
  int level1 = 3;
  int level2 = 2;
  CoefficientMode mode = CoefficientMode::constant;
  AdaptConfig adapt;
  SolverConfig solver;
  std::optional<double> lambda_density;
  std::function<void(const CycleState&)> on_cycle;
};

struct LoopResult {
  std::vector<StudyRecord> records;
  std::string stop_reason;           // "tolerance", "max_cycles", "max_dofs" or "solver_failure"
  std::optional<std::string> error;  // message of the failure that ended the loop
};

/// SOLVE - ESTIMATE - MARK - REFINE on both meshes, each marked from its own indicators.
LoopResult adaptive_loop(const ProblemSpec& problem, const LoopOptions& options);

}  // namespace fictifem
