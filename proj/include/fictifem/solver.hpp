#pragma once

#include "fictifem/assembly.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace fictifem {

enum class SolverMethod { direct, gmres };

std::string_view to_string(SolverMethod m);
SolverMethod parse_solver_method(std::string_view s);

struct SolverConfig {
  SolverMethod method = SolverMethod::direct;
  double gmres_rel_tol = 1e-10;
  int restart = 200;
  int max_iters = 5000;
  double schur_scaling = 1.0;

  /// Throws ConfigError for non-positive tolerances/scaling or restart < 10.
  void validate() const;
};

struct SolveReport {
  SolverMethod method = SolverMethod::direct;
  int iterations = 0;
  ResidualNorms residual;
  double rhs_norm = 0.0;
  bool converged = false;
};

struct SolveResult {
  Solution solution;  // constrained DoFs post-filled
  SolveReport report;
};

/// Block upper-triangular preconditioner
///   [A  0   C^T ]
///   [0  A2' -M^T]      A2' = A2 + delta * mass2,  S = -schur_scaling * diag(cell areas)
///   [0  0   S   ]
/// applied by back substitution: lambda = S^{-1} r3, u2 = A2'^{-1}(r2 + M^T lambda),
/// u = A^{-1}(r1 - C^T lambda). Inner solves reuse sparse factorizations.
class BlockPreconditioner {
 public:
  BlockPreconditioner();
  ~BlockPreconditioner();
  BlockPreconditioner(const BlockPreconditioner&) = delete;
  BlockPreconditioner& operator=(const BlockPreconditioner&) = delete;
  BlockPreconditioner(BlockPreconditioner&&) noexcept;
  BlockPreconditioner& operator=(BlockPreconditioner&&) noexcept;

  /// Factorizes the diagonal blocks. Throws SolverError if one of them is singular.
  void setup(const BlockSystem& system, double schur_scaling);
  Vector apply(const Vector& r) const;
  double delta() const { return delta_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double delta_ = 0.0;
};

BlockPreconditioner make_preconditioner(const BlockSystem& system, const SolverConfig& config);

/// Solves the block system. Throws SolverError on factorization breakdown or when GMRES
/// does not reach the tolerance within max_iters.
SolveResult solve(const BlockSystem& system, const SolverConfig& config);

}  // namespace fictifem
