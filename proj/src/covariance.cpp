#include "edasketch/covariance.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace edasketch {

namespace {

// kissfft caches twiddles per instance; one instance per thread keeps
// concurrent applications safe.
Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

void DiffusionCovarianceConfig::validate() const {
  if (n < 1) throw ConfigError("DiffusionCovarianceConfig: n must be positive");
  if (!(sigma_b > 0.0)) throw ConfigError("DiffusionCovarianceConfig: sigma_b must be positive");
  if (!(length_scale >= 0.0)) throw ConfigError("DiffusionCovarianceConfig: D must be >= 0");
  if (diffusion_steps < 1) throw ConfigError("DiffusionCovarianceConfig: M must be >= 1");
}

CovarianceFactor::CovarianceFactor(const DiffusionCovarianceConfig& cfg)
    : symbol_(cfg.n), sigma_(cfg.sigma_b) {
  cfg.validate();
  const Index n = cfg.n;
  const int M = cfg.diffusion_steps;
  const double kappa = cfg.length_scale * cfg.length_scale / (4.0 * M);

  Vector base(n);
  double sum_sq = 0.0;
  for (Index m = 0; m < n; ++m) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
    base[m] = std::pow(1.0 + 4.0 * kappa * s * s, -M);
    sum_sq += base[m] * base[m];
  }
  const double gamma = std::sqrt(static_cast<double>(n) / sum_sq);
  symbol_ = (cfg.sigma_b * gamma) * base;
}

Vector CovarianceFactor::apply(const Vector& v) const {
  require_size(v.size(), size(), "CovarianceFactor::apply");
  auto& fft = thread_fft();
  std::vector<double> in(v.data(), v.data() + v.size());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (Index m = 0; m < size(); ++m) spec[m] *= symbol_[m];
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<const Vector>(out.data(), size());
}

Vector CovarianceFactor::apply_transpose(const Vector& v) const { return apply(v); }

Vector CovarianceFactor::apply_b(const Vector& v) const { return apply(apply_transpose(v)); }

Vector CovarianceFactor::kernel() const {
  Vector e = Vector::Zero(size());
  e[0] = 1.0;
  return apply(e);
}

CovarianceFactor build_ub(const DiffusionCovarianceConfig& cfg) { return CovarianceFactor(cfg); }

Vector apply_ur(double sigma_o, const Vector& v) { return sigma_o * v; }

Vector apply_rinv(double sigma_o, const Vector& v) { return v / (sigma_o * sigma_o); }

}  // namespace edasketch
