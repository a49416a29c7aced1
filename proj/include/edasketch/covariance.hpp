#pragma once

#include "edasketch/core.hpp"

namespace edasketch {

struct DiffusionCovarianceConfig {
  Index n = 1500;
  double sigma_b = 0.8;
  double length_scale = 6.0;  // Daley length-scale D in grid units
  int diffusion_steps = 10;   // M

  void validate() const;
};

/// Symmetric square root U_B of B = sigma_b^2 C_B on the periodic grid.
///
/// C_B is the correlation operator of 2M implicit diffusion steps with
/// diffusivity kappa = D^2 / (4M); U_B applies M of them, scaled so that the
/// diagonal of C_B is exactly one. Being circulant with a real even symbol,
/// U_B = U_B^T and it is applied spectrally.
class CovarianceFactor {
 public:
  explicit CovarianceFactor(const DiffusionCovarianceConfig& cfg);

  Index size() const { return symbol_.size(); }
  double sigma() const { return sigma_; }
  /// Spectral multipliers u(m), m = 0..n-1, including sigma_b.
  const Vector& symbol() const { return symbol_; }

  Vector apply(const Vector& v) const;            // U_B v
  Vector apply_transpose(const Vector& v) const;  // U_B^T v (== U_B v)
  Vector apply_b(const Vector& v) const;          // B v = U_B U_B^T v

  /// First column of U_B, i.e. the circulant kernel. apply() equals the
  /// circular convolution with this kernel.
  Vector kernel() const;

 private:
  Vector symbol_;
  double sigma_;
};

CovarianceFactor build_ub(const DiffusionCovarianceConfig& cfg);

inline Vector apply_ub(const CovarianceFactor& f, const Vector& v) { return f.apply(v); }

/// Observation-error square root U_R = sigma_o I and inverse covariance R^{-1}.
Vector apply_ur(double sigma_o, const Vector& v);
Vector apply_rinv(double sigma_o, const Vector& v);

}  // namespace edasketch
