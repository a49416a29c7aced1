#pragma once

#include "edasketch/linear_operator.hpp"

#include <optional>
#include <string>

namespace edasketch {

enum class ShiftMode { None, EpsTrace, EpsFrobY };

std::string to_string(ShiftMode mode);
ShiftMode parse_shift_mode(const std::string& name);

struct NystromConfig {
  Index rank = 20;  // k, number of pairs kept
  int passes = 1;   // q, number of products with A
  ShiftMode shift_mode = ShiftMode::None;
  // trace(A), required by ShiftMode::EpsTrace since it is not available
  // matrix-free.
  std::optional<double> trace_hint;
};

/// Approximate leading eigenpairs of a symmetric positive semidefinite A.
struct EigenApproximation {
  Matrix vectors;  // n x k, orthonormal columns
  Vector values;   // k values, nonincreasing, >= 0
  double shift = 0.0;  // nu actually applied (0 when no shift was used)
  int passes = 0;

  Index rank() const { return values.size(); }
  /// S D S^T.
  Matrix reconstruct() const;
};

/// Upper-triangular C with C^T C = W + nu I. Throws BreakdownError when the
/// shifted matrix is not numerically positive definite.
Matrix shifted_cholesky(const Matrix& w, double nu);

/// Shift value nu for the given mode; sketch is A times an orthonormal Phi.
double nystrom_shift(ShiftMode mode, const Matrix& sketch, std::optional<double> trace_hint);

/// q-pass Nystrom approximation.
///
///   Y = A Phi;  Y = Q_Y R_Y
///   for j = 2..q:  Phi = Q_Y;  Y = A Phi;  Y = Q_Y R_Y
///   W = Phi^T Y = C^T C;   T = R_Y C^-1 = U_T Sigma_T V_T^T
///   S = Q_Y U_T;   D = Sigma_T^2;   keep the first k columns / values.
///
/// With a shift mode, Phi is first orthonormalized and A is replaced by
/// A + nu I (Y += nu Phi); nu is subtracted from the returned values, which
/// are then clamped at zero. Without a shift, a numerically rank-deficient Y
/// or an indefinite W raise BreakdownError naming the offending column.
EigenApproximation nystrom_evd(const LinearOperator& a, const Matrix& phi, const NystromConfig& cfg);

}  // namespace edasketch
