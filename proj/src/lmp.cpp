#include "edasketch/lmp.hpp"

#include <cmath>

namespace edasketch {

std::string to_string(ThetaRule rule) {
  switch (rule) {
    case ThetaRule::HalfSum: return "half_sum";
    case ThetaRule::LambdaK: return "lambda_k";
    case ThetaRule::One: return "one";
  }
  return "unknown";
}

ThetaRule parse_theta_rule(const std::string& name) {
  for (auto r : {ThetaRule::HalfSum, ThetaRule::LambdaK, ThetaRule::One}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown theta rule '" + name + "' (expected half_sum, lambda_k, one)");
}

double choose_theta(ThetaRule rule, double lambda_k) {
  switch (rule) {
    case ThetaRule::HalfSum: return 0.5 * (lambda_k + 1.0);
    case ThetaRule::LambdaK: return lambda_k;
    case ThetaRule::One: return 1.0;
  }
  return 1.0;
}

SpectralLmp::SpectralLmp(Matrix vectors, Vector eigenvalues_of_a, double theta)
    : vectors_(std::move(vectors)), values_(std::move(eigenvalues_of_a)), theta_(theta) {
  if (vectors_.cols() < 1) throw ConfigError("SpectralLmp: need at least one eigenpair");
  require_size(values_.size(), vectors_.cols(), "SpectralLmp");
  if (!(theta_ > 0.0)) throw ConfigError("SpectralLmp: theta must be positive");
  if ((values_.array() < 0.0).any()) throw ConfigError("SpectralLmp: negative eigenvalue of A");
  const Vector shifted = values_.array() + 1.0;
  u_diag_ = (std::sqrt(theta_) * shifted.array().rsqrt() - 1.0).matrix();
  p_diag_ = (theta_ * shifted.array().inverse() - 1.0).matrix();
}

SpectralLmp::SpectralLmp(const EigenApproximation& approx, ThetaRule rule)
    : SpectralLmp(approx.vectors, approx.values,
                  choose_theta(rule, 1.0 + approx.values[approx.rank() - 1])) {}

Vector SpectralLmp::apply_diag(const Vector& v, const Vector& diag) const {
  require_size(v.size(), size(), "SpectralLmp::apply");
  const Vector coeff = vectors_.transpose() * v;
  return v + vectors_ * diag.cwiseProduct(coeff);
}

Vector SpectralLmp::apply_u(const Vector& v) const { return apply_diag(v, u_diag_); }

Vector SpectralLmp::apply_p(const Vector& v) const { return apply_diag(v, p_diag_); }

}  // namespace edasketch
