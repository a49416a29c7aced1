#include "edasketch/krylov.hpp"

#include "edasketch/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace edasketch {

SolveResult pcg(const LinearOperator& system, const Vector& b, const LinearOperator* precond,
                const SolverConfig& cfg, const CostFunction& cost) {
  const Index n = system.size();
  require_size(b.size(), n, "pcg");
  if (cfg.max_iters < 1) throw ConfigError("pcg: max_iters must be >= 1");
  if (precond) require_size(precond->size(), n, "pcg preconditioner");

  const bool track = cfg.trace_cost && static_cast<bool>(cost);
  const auto record_cost = [&](const Vector& x) {
    return track ? cost(x) : std::numeric_limits<double>::quiet_NaN();
  };

  SolveResult out;
  Vector& x = out.solution;
  x = Vector::Zero(n);
  Vector r = b;
  Vector z = precond ? precond->apply(r) : r;
  Vector p = z;
  double rz = r.dot(z);
  const double rz0 = rz;
  std::size_t matvecs = 0;

  out.trace.records.push_back({0, record_cost(x), std::sqrt(std::max(rz, 0.0)), 0});
  if (rz == 0.0) {
    out.trace.status = SolveStatus::Converged;
    return out;
  }

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Vector ap = system.apply(p);
    ++matvecs;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw BreakdownError("pcg: p^T A p <= 0 at iteration " + std::to_string(it) +
                           " (operator not SPD)");
    }
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = precond ? precond->apply(r) : r;
    const double rz_next = r.dot(z);
    if (rz_next < 0.0) throw BreakdownError("pcg: preconditioner not SPD at iteration " + std::to_string(it));

    const double res = std::sqrt(rz_next);
    out.trace.records.push_back({it, record_cost(x), res, matvecs});
    if (rz_next == 0.0 || res <= cfg.residual_rtol * std::sqrt(rz0)) {
      out.trace.status = SolveStatus::Converged;
      break;
    }
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

SolveResult pcg(const LinearOperator& system, const Vector& b, const LinearOperator* precond,
                const SolverConfig& cfg, const MemberProblem& member, const AssimContext& ctx) {
  return pcg(system, b, precond, cfg,
             [&](const Vector& dz) { return quadratic_cost(dz, member, ctx); });
}

namespace {

// Two passes of classical Gram-Schmidt against the first `count` columns.
void orthogonalize(const Matrix& basis, Index count, Vector& v) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vector c = basis.leftCols(count).transpose() * v;
    v -= basis.leftCols(count) * c;
  }
}

}  // namespace

LanczosResult lanczos_eigs(const LinearOperator& op, int m, int n_eigs, std::uint64_t seed) {
  const Index n = op.size();
  if (n_eigs < 1) throw ConfigError("lanczos_eigs: n_eigs must be >= 1");
  if (m < n_eigs) throw ConfigError("lanczos_eigs: need m >= n_eigs");
  if (n_eigs > n) throw ConfigError("lanczos_eigs: more eigenvalues requested than dimension");
  m = static_cast<int>(std::min<Index>(m, n));

  Matrix basis(n, m);
  Vector alpha = Vector::Zero(m);
  Vector beta = Vector::Zero(m);  // beta[j] couples basis j and j+1
  std::vector<Index> block_ends;  // last index of each invariant block
  std::vector<double> block_betas;

  LanczosResult out;
  const auto fresh_start = [&](Index filled) -> bool {
    // Random vectors until one survives orthogonalization against the basis.
    for (int attempt = 0; attempt < 8; ++attempt) {
      Substream rng(seed, Stream::Lanczos, static_cast<std::uint64_t>(out.restarts) * 8 + attempt);
      Vector v = rng.normal_vector(n);
      const double before = v.norm();
      orthogonalize(basis, filled, v);
      const double after = v.norm();
      if (after > 1e-8 * before) {
        basis.col(filled) = v / after;
        return true;
      }
    }
    return false;
  };

  if (!fresh_start(0)) throw BreakdownError("lanczos_eigs: could not build a start vector");
  Index steps = 0;
  double scale = 0.0;
  for (Index j = 0; j < m; ++j) {
    Vector w = op.apply(basis.col(j));
    steps = j + 1;
    alpha[j] = basis.col(j).dot(w);
    w -= alpha[j] * basis.col(j);
    if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
    orthogonalize(basis, j + 1, w);
    const double b = w.norm();
    scale = std::max({scale, std::abs(alpha[j]), b});

    if (j + 1 == m) {
      beta[j] = b;
      break;
    }
    if (b <= 1e-10 * scale) {
      // Invariant subspace: close the block and restart.
      block_ends.push_back(j);
      block_betas.push_back(b);
      beta[j] = 0.0;
      ++out.restarts;
      if (!fresh_start(j + 1)) break;
    } else {
      beta[j] = b;
      basis.col(j + 1) = w / b;
    }
  }
  out.steps = static_cast<int>(steps);
  if (block_ends.empty() || block_ends.back() != steps - 1) {
    block_ends.push_back(steps - 1);
    block_betas.push_back(beta[steps - 1]);
  }

  Matrix t = Matrix::Zero(steps, steps);
  for (Index i = 0; i < steps; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
  const Vector& theta = eig.eigenvalues();  // ascending
  const Matrix& y = eig.eigenvectors();

  const Index k = std::min<Index>(n_eigs, steps);
  out.values.resize(k);
  out.residuals.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Index col = steps - 1 - i;
    out.values[i] = theta[col];
    double acc = 0.0;
    for (std::size_t bidx = 0; bidx < block_ends.size(); ++bidx) {
      const double e = block_betas[bidx] * y(block_ends[bidx], col);
      acc += e * e;
    }
    out.residuals[i] = std::sqrt(acc);
  }
  return out;
}

}  // namespace edasketch
