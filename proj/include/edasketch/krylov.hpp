#pragma once

#include "edasketch/assim.hpp"
#include "edasketch/linear_operator.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace edasketch {

struct SolverConfig {
  int max_iters = 40;
  // Stop once the preconditioned residual norm falls below this fraction of
  // its initial value; 0 runs the full iteration budget.
  double residual_rtol = 0.0;
  bool trace_cost = true;
};

enum class SolveStatus { MaxIterations, Converged };

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;           // J(dz_i); NaN when cost tracing is off
  double residual_norm = 0.0;  // sqrt(r_i^T P r_i)
  std::size_t matvecs = 0;     // cumulative products with the system operator
};

struct SolveTrace {
  std::vector<IterationRecord> records;  // records[0] is the initial guess dz = 0
  SolveStatus status = SolveStatus::MaxIterations;

  int iterations() const { return static_cast<int>(records.size()) - 1; }
};

struct SolveResult {
  Vector solution;
  SolveTrace trace;
};

using CostFunction = std::function<double(const Vector&)>;

/// Preconditioned conjugate gradients for an SPD system from dz_0 = 0.
/// `system` is the full operator (I + A); `precond` may be null for plain CG.
/// Throws BreakdownError naming the iteration if p^T (I+A) p <= 0.
SolveResult pcg(const LinearOperator& system, const Vector& b, const LinearOperator* precond,
                const SolverConfig& cfg, const CostFunction& cost = {});

/// Convenience overload tracking the member's quadratic cost.
SolveResult pcg(const LinearOperator& system, const Vector& b, const LinearOperator* precond,
                const SolverConfig& cfg, const MemberProblem& member, const AssimContext& ctx);

struct LanczosResult {
  Vector values;     // leading Ritz values, nonincreasing
  Vector residuals;  // residual norm bound for each value
  int steps = 0;     // Lanczos steps taken
  int restarts = 0;  // invariant subspaces hit before m steps
};

/// Symmetric Lanczos with full reorthogonalization. m basis vectors are built
/// (fewer if the whole space is exhausted); on an invariant subspace the
/// process restarts from a fresh random vector orthogonal to the basis.
LanczosResult lanczos_eigs(const LinearOperator& op, int m, int n_eigs, std::uint64_t seed);

}  // namespace edasketch
