#include "fictifem/adapt.hpp"

#include "fictifem/norms.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace fictifem {

std::string_view to_string(MarkingCriterion m) { return m == MarkingCriterion::squared ? "squared" : "linear"; }

MarkingCriterion parse_marking_criterion(std::string_view s) {
  std::string key;
  for (char c : s) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "squared") return MarkingCriterion::squared;
  if (key == "linear") return MarkingCriterion::linear;
  throw ConfigError("unknown marking criterion '" + std::string(s) + "' (expected squared or linear)");
}

void AdaptConfig::validate() const {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0)) throw ConfigError("alpha1 must lie in [0, 1]");
  if (!(alpha2 >= 0.0 && alpha2 <= 1.0)) throw ConfigError("alpha2 must lie in [0, 1]");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (max_cycles < 1) throw ConfigError("max_cycles must be at least 1");
  if (max_dofs < 1) throw ConfigError("max_dofs must be positive");
}

std::vector<int> doerfler_mark(const IndicatorField& field, double alpha, MarkingCriterion criterion) {
  if (!(alpha > 0.0)) return {};
  const bool squared = criterion == MarkingCriterion::squared;
  auto weight = [&](std::size_t i) { return squared ? field.eta[i] * field.eta[i] : field.eta[i]; };
  std::vector<std::size_t> order(field.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (field.eta[a] != field.eta[b]) return field.eta[a] > field.eta[b];
    return field.cells[a] < field.cells[b];
  });
  double total = 0.0;
  for (std::size_t i : order) total += weight(i);
  if (total == 0.0) return {};
  const double a = std::min(alpha, 1.0);
  const double target = (squared ? a * a : a) * total;
  std::vector<int> marked;
  double sum = 0.0;
  for (std::size_t i : order) {
    if (sum >= target || field.eta[i] == 0.0) break;
    sum += weight(i);
    marked.push_back(field.cells[i]);
  }
  return marked;
}

std::vector<int> coarsen_mark(const IndicatorField& field, double alpha2) {
  if (!(alpha2 > 0.0)) return {};
  std::vector<std::size_t> order(field.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (field.eta[a] != field.eta[b]) return field.eta[a] < field.eta[b];
    return field.cells[a] < field.cells[b];
  });
  double total = 0.0;
  for (double e : field.eta) total += e * e;
  const double target = alpha2 * alpha2 * total;
  std::vector<int> marked;
  double sum = 0.0;
  for (std::size_t i : order) {
    const double next = sum + field.eta[i] * field.eta[i];
    if (next > target) break;
    sum = next;
    marked.push_back(field.cells[i]);
  }
  return marked;
}

namespace {

std::vector<int> without(const std::vector<int>& cells, const std::vector<int>& removed, const MeshForest& forest) {
  const std::unordered_set<int> drop(removed.begin(), removed.end());
  std::vector<int> out;
  for (int c : cells) {
    if (!drop.contains(c) && forest.cell(c).active) out.push_back(c);
  }
  return out;
}

}  // namespace

LoopResult adaptive_loop(const ProblemSpec& problem, const LoopOptions& options) {
  options.adapt.validate();
  options.solver.validate();
  check_coefficient_mode(problem, options.mode);
  LoopResult result;
  Discretization disc = make_discretization(problem, options.level1, options.level2);

  for (int cycle = 0;; ++cycle) {
    const auto start = std::chrono::steady_clock::now();
    disc.update();
    const BlockSystem system = assemble(problem, disc);
    SolveResult solved;
    try {
      solved = solve(system, options.solver);
    } catch (const SolverError& e) {
      result.stop_reason = "solver_failure";
      result.error = e.what();
      return result;
    }
    const StateView state{problem, disc, solved.solution};
    const auto [eta1, eta2] = indicators(state, options.mode);

    StudyRecord rec;
    rec.cycle = cycle;
    rec.n1 = disc.n1();
    rec.n2 = disc.n2();
    rec.m = disc.m();
    rec.h_max1 = disc.forest1.max_diameter();
    rec.h_max2 = disc.forest2.max_diameter();
    rec.eta1 = eta1.global();
    rec.eta2 = eta2.global();
    rec.osc1 = eta1.osc_global();
    rec.osc2 = eta2.osc_global();
    rec.gmres_iters = solved.report.iterations;
    rec.residual = solved.report.residual;
    rec.constraint_defect = constraint_defect(state);
    rec.max_abs_u = solved.solution.u.lpNorm<Eigen::Infinity>();
    if (problem.exact) {
      const ErrorNorms e = error_norms(state, *problem.exact);
      rec.err_l2_u = e.l2_u;
      rec.err_h1_u = e.h1_u;
      rec.err_l2_u2 = e.l2_u2;
      rec.err_h1_u2 = e.h1_u2;
      const double err = e.h1_u + e.h1_u2;
      if (err > 0.0) rec.eff_index = (rec.eta1 + rec.eta2) / err;
    }
    if (options.lambda_density) rec.lambda_diag = lambda_diagnostic(state, *options.lambda_density);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.records.push_back(rec);
    if (options.on_cycle) options.on_cycle({cycle, problem, disc, system, solved, eta1, eta2, result.records.back()});

    if (rec.eta1 + rec.eta2 <= options.adapt.tol) {
      result.stop_reason = "tolerance";
      break;
    }
    if (cycle + 1 >= options.adapt.max_cycles) {
      result.stop_reason = "max_cycles";
      break;
    }
    if (rec.total_dofs() >= options.adapt.max_dofs) {
      result.stop_reason = "max_dofs";
      break;
    }

    const std::vector<int> refine1 = doerfler_mark(eta1, options.adapt.alpha1, options.adapt.marking);
    const std::vector<int> refine2 = doerfler_mark(eta2, options.adapt.alpha1, options.adapt.marking);
    const std::vector<int> coarse1 = coarsen_mark(eta1, options.adapt.alpha2);
    const std::vector<int> coarse2 = coarsen_mark(eta2, options.adapt.alpha2);
    disc.forest1.refine(refine1);
    disc.forest2.refine(refine2);
    disc.forest1.coarsen(without(coarse1, refine1, disc.forest1));
    disc.forest2.coarsen(without(coarse2, refine2, disc.forest2));
    disc.update();
    if (disc.total_dofs() > options.adapt.max_dofs) {
      result.stop_reason = "max_dofs";
      break;
    }
  }
  return result;
}

}  // namespace fictifem
