#pragma once

#include "edasketch/linear_operator.hpp"
#include "edasketch/nystrom.hpp"

#include <string>

namespace edasketch {

enum class ThetaRule { HalfSum, LambdaK, One };

std::string to_string(ThetaRule rule);
ThetaRule parse_theta_rule(const std::string& name);

/// Scaling factor from the k-th approximate eigenvalue of I + A:
/// HalfSum -> (lambda_k + 1) / 2, LambdaK -> lambda_k, One -> 1.
double choose_theta(ThetaRule rule, double lambda_k_of_i_plus_a);

/// Scaled spectral limited-memory preconditioner for I + A,
///
///   P = I + S_k (theta (L_k + I)^-1 - I) S_k^T = U U^T,
///   U = U^T = I + S_k (sqrt(theta) (L_k + I)^-1/2 - I) S_k^T,
///
/// where L_k holds eigenvalues of A (not of I + A).
class SpectralLmp {
 public:
  SpectralLmp(Matrix vectors, Vector eigenvalues_of_a, double theta);
  SpectralLmp(const EigenApproximation& approx, ThetaRule rule);

  Index size() const { return vectors_.rows(); }
  Index rank() const { return vectors_.cols(); }
  double theta() const { return theta_; }
  const Matrix& vectors() const { return vectors_; }
  const Vector& eigenvalues() const { return values_; }

  Vector apply_u(const Vector& v) const;  // U_theta v
  Vector apply_p(const Vector& v) const;  // P_theta v

 private:
  Vector apply_diag(const Vector& v, const Vector& diag) const;

  Matrix vectors_;
  Vector values_;
  double theta_;
  Vector u_diag_;  // sqrt(theta) (lambda + 1)^-1/2 - 1
  Vector p_diag_;  // theta (lambda + 1)^-1 - 1
};

inline Vector apply_u_theta(const SpectralLmp& p, const Vector& v) { return p.apply_u(v); }
inline Vector apply_p_theta(const SpectralLmp& p, const Vector& v) { return p.apply_p(v); }

/// P_theta as a LinearOperator, for use as a PCG preconditioner.
class LmpPreconditioner final : public LinearOperator {
 public:
  explicit LmpPreconditioner(const SpectralLmp& lmp) : lmp_(lmp) {}
  Index size() const override { return lmp_.size(); }
  Vector apply(const Vector& v) const override { return lmp_.apply_p(v); }

 private:
  const SpectralLmp& lmp_;
};

}  // namespace edasketch
