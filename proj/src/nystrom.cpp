#include "edasketch/nystrom.hpp"

#include <cmath>
#include <limits>

namespace edasketch {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// |R_ii| below this fraction of max |R_jj| counts as a dependent column.
constexpr double kRankTol = 1e3 * kEps;

struct ThinQr {
  Matrix q;
  Matrix r;
};

ThinQr thin_qr(const Matrix& y) {
  const Index n = y.rows(), l = y.cols();
  if (l > n) throw ConfigError("nystrom_evd: sketch width exceeds operator size");
  Eigen::HouseholderQR<Matrix> qr(y);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(n, l);
  out.r = qr.matrixQR().topRows(l).triangularView<Eigen::Upper>();
  return out;
}

void check_rank(const Matrix& r) {
  const Vector diag = r.diagonal().cwiseAbs();
  if (!diag.allFinite()) throw BreakdownError("nystrom_evd: non-finite sketch");
  const double scale = diag.maxCoeff();
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > kRankTol * scale)) {
      throw BreakdownError("nystrom_evd: sketch A*Phi is numerically rank deficient at column " +
                           std::to_string(i));
    }
  }
}

}  // namespace

std::string to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::None: return "none";
    case ShiftMode::EpsTrace: return "eps_trace";
    case ShiftMode::EpsFrobY: return "eps_frob_y";
  }
  return "unknown";
}

ShiftMode parse_shift_mode(const std::string& name) {
  for (auto m : {ShiftMode::None, ShiftMode::EpsTrace, ShiftMode::EpsFrobY}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown shift mode '" + name + "'");
}

Matrix EigenApproximation::reconstruct() const {
  return vectors * values.asDiagonal() * vectors.transpose();
}

Matrix shifted_cholesky(const Matrix& w, double nu) {
  if (w.rows() != w.cols()) throw DimensionError("shifted_cholesky: W must be square");
  // Symmetrize: Phi^T A Phi is symmetric only up to rounding.
  Matrix ws = 0.5 * (w + w.transpose());
  ws.diagonal().array() += nu;
  Eigen::LLT<Matrix> llt(ws);
  if (llt.info() != Eigen::Success) {
    throw BreakdownError("shifted_cholesky: W + nu I is not positive definite (nu = " +
                         std::to_string(nu) + ")");
  }
  return llt.matrixU();
}

double nystrom_shift(ShiftMode mode, const Matrix& sketch, std::optional<double> trace_hint) {
  switch (mode) {
    case ShiftMode::None:
      return 0.0;
    case ShiftMode::EpsTrace:
      if (!trace_hint) throw ConfigError("nystrom_evd: eps_trace shift needs trace(A)");
      return kEps * *trace_hint;
    case ShiftMode::EpsFrobY:
      return kEps * sketch.norm();
  }
  return 0.0;
}

EigenApproximation nystrom_evd(const LinearOperator& a, const Matrix& phi_in,
                               const NystromConfig& cfg) {
  const Index l = phi_in.cols();
  require_size(phi_in.rows(), a.size(), "nystrom_evd");
  if (l < 1) throw ConfigError("nystrom_evd: empty sketching matrix");
  if (cfg.rank < 1 || cfg.rank > l) throw ConfigError("nystrom_evd: need 1 <= k <= sketch width");
  if (cfg.passes < 1) throw ConfigError("nystrom_evd: q must be >= 1");

  const bool shifted = cfg.shift_mode != ShiftMode::None;
  Matrix phi = shifted ? thin_qr(phi_in).q : phi_in;

  Matrix y = a.apply_block(phi);
  double nu = 0.0;
  if (shifted) {
    nu = nystrom_shift(cfg.shift_mode, y, cfg.trace_hint);
    y += nu * phi;
  }
  ThinQr qr = thin_qr(y);
  for (int j = 2; j <= cfg.passes; ++j) {
    if (!shifted) check_rank(qr.r);
    phi = qr.q;
    y = a.apply_block(phi);
    if (shifted) y += nu * phi;
    qr = thin_qr(y);
  }
  if (!shifted) check_rank(qr.r);

  const Matrix w = phi.transpose() * y;
  // The shift already sits in y, so W needs no further regularization.
  const Matrix c = shifted_cholesky(w, 0.0);
  // T = R_Y C^-1  <=>  C^T T^T = R_Y^T.
  const Matrix t =
      c.transpose().triangularView<Eigen::Lower>().solve(qr.r.transpose()).transpose();

  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinU);
  const Index k = cfg.rank;

  EigenApproximation out;
  out.vectors = qr.q * svd.matrixU().leftCols(k);
  out.values = svd.singularValues().head(k).array().square();
  if (shifted) out.values = (out.values.array() - nu).max(0.0);
  out.shift = nu;
  out.passes = cfg.passes;
  return out;
}

}  // namespace edasketch
