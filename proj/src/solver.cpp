#include "fictifem/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#ifdef FICTIFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fictifem {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

#ifdef FICTIFEM_HAVE_UMFPACK
using LUSolver = Eigen::UmfPackLU<ColMatrix>;
#else
using LUSolver = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;
#endif

void factorize(LUSolver& lu, const ColMatrix& K, const char* what) {
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverError(std::string("sparse LU factorization of ") + what + " failed");
}

/// Adapter exposing BlockPreconditioner through Eigen's preconditioner interface.
class EigenBlockPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  EigenBlockPreconditioner() = default;
  template <typename M>
  EigenBlockPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  EigenBlockPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  EigenBlockPreconditioner& compute(const M&) { return *this; }
  template <typename Rhs>
  Vector solve(const Rhs& b) const { return pc->apply(b); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

  const BlockPreconditioner* pc = nullptr;
};

Solution finish(const BlockSystem& system, const Vector& x) {
  Solution s = split(system, x);
  system.constraints1.zero_constrained(s.u);
  system.constraints2.zero_constrained(s.u2);
  system.constraints1.distribute(s.u);
  system.constraints2.distribute(s.u2);
  return s;
}

double total(const ResidualNorms& r) { return std::sqrt(r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3); }

}  // namespace

std::string_view to_string(SolverMethod m) { return m == SolverMethod::direct ? "direct" : "gmres"; }

SolverMethod parse_solver_method(std::string_view s) {
  std::string key;
  for (char c : s) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "direct") return SolverMethod::direct;
  if (key == "gmres") return SolverMethod::gmres;
  throw ConfigError("unknown solver method '" + std::string(s) + "' (expected direct or gmres)");
}

void SolverConfig::validate() const {
  if (!(gmres_rel_tol > 0.0)) throw ConfigError("gmres_rel_tol must be positive");
  if (restart < 10) throw ConfigError("restart must be at least 10");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (!(schur_scaling > 0.0)) throw ConfigError("schur_scaling must be positive");
}

struct BlockPreconditioner::Impl {
  const BlockSystem* system = nullptr;
  Eigen::SimplicialLDLT<ColMatrix> a_solver;
  // UMFPACK solves read the factorized matrix again, so it must outlive the factorization.
  ColMatrix a2_regularized;
  LUSolver a2_solver;
  Vector schur_inv;
};

BlockPreconditioner::BlockPreconditioner() : impl_(std::make_unique<Impl>()) {}
BlockPreconditioner::~BlockPreconditioner() = default;
BlockPreconditioner::BlockPreconditioner(BlockPreconditioner&&) noexcept = default;
BlockPreconditioner& BlockPreconditioner::operator=(BlockPreconditioner&&) noexcept = default;

void BlockPreconditioner::setup(const BlockSystem& system, double schur_scaling) {
  impl_->system = &system;
  const ColMatrix A = system.A;
  impl_->a_solver.compute(A);
  if (impl_->a_solver.info() != Eigen::Success) throw SolverError("factorization of the background stiffness failed");

  const double trace_a2 = std::abs(system.A2.diagonal().sum());
  const double trace_m2 = std::abs(system.mass2.diagonal().sum());
  delta_ = trace_m2 > 0.0 ? 1e-8 * trace_a2 / trace_m2 : 1e-8;
  impl_->a2_regularized = system.A2 + delta_ * system.mass2;
  factorize(impl_->a2_solver, impl_->a2_regularized, "the regularized immersed stiffness");

  impl_->schur_inv.resize(system.m);
  for (int i = 0; i < system.m; ++i) {
    const double s = -schur_scaling * system.lambda_mass[i];
    if (s == 0.0) throw SolverError("zero-area immersed cell in the Schur approximation");
    impl_->schur_inv[i] = 1.0 / s;
  }
}

Vector BlockPreconditioner::apply(const Vector& r) const {
  const BlockSystem& sys = *impl_->system;
  const Vector lambda = impl_->schur_inv.cwiseProduct(r.tail(sys.m));
  const Vector u2 = impl_->a2_solver.solve(Vector(r.segment(sys.n1, sys.n2) + sys.M.transpose() * lambda));
  const Vector u = impl_->a_solver.solve(Vector(r.head(sys.n1) - sys.C.transpose() * lambda));
  Vector z(r.size());
  z << u, u2, lambda;
  return z;
}

BlockPreconditioner make_preconditioner(const BlockSystem& system, const SolverConfig& config) {
  config.validate();
  BlockPreconditioner pc;
  pc.setup(system, config.schur_scaling);
  return pc;
}

SolveResult solve(const BlockSystem& system, const SolverConfig& config) {
  config.validate();
  const Vector b = system.rhs();
  const double rhs_norm = b.norm();
  SolveResult result;
  result.report.method = config.method;
  result.report.rhs_norm = rhs_norm;

  if (system.size() == 0) throw SolverError("empty system");
  if (rhs_norm == 0.0) {
    result.solution = finish(system, Vector::Zero(system.size()));
    result.report.converged = true;
    return result;
  }

  const ColMatrix K = system.full();
  Vector x;
  if (config.method == SolverMethod::direct) {
    LUSolver lu;
    factorize(lu, K, "the saddle-point system");
    x = lu.solve(b);
    // One step of iterative refinement guards against mild ill-conditioning.
    const Vector r = b - K * x;
    if (r.norm() > 1e-12 * (1.0 + rhs_norm)) x += lu.solve(r);
    result.report.converged = true;
  } else {
    BlockPreconditioner pc = make_preconditioner(system, config);
    Eigen::GMRES<ColMatrix, EigenBlockPreconditioner> gmres;
    gmres.set_restart(config.restart);
    gmres.compute(K);
    gmres.preconditioner().pc = &pc;
    const double target = config.gmres_rel_tol * (1.0 + rhs_norm);
    x = Vector::Zero(system.size());
    double tol = config.gmres_rel_tol;
    int used = 0;
    // The inner tolerance applies to the preconditioned residual; tighten it until the
    // true residual meets the target.
    while (used < config.max_iters) {
      gmres.setMaxIterations(config.max_iters - used);
      gmres.setTolerance(tol);
      x = gmres.solveWithGuess(b, x);
      used += static_cast<int>(gmres.iterations());
      const double res = (b - K * x).norm();
      if (res <= target) {
        result.report.converged = true;
        break;
      }
      if (gmres.iterations() == 0 || tol < 1e-15) break;
      tol = std::max(tol * std::min(0.5, 0.5 * target / res), 1e-16);
    }
    result.report.iterations = used;
    if (!result.report.converged) {
      throw SolverError("GMRES did not converge within " + std::to_string(config.max_iters) +
                        " iterations (residual " + std::to_string((b - K * x).norm()) + ")");
    }
  }
  result.solution = finish(system, x);
  result.report.residual = residual(system, result.solution);
  if (config.method == SolverMethod::direct && total(result.report.residual) > 1e-6 * (1.0 + rhs_norm)) {
    throw SolverError("direct solve left residual " + std::to_string(total(result.report.residual)));
  }
  return result;
}

}  // namespace fictifem
