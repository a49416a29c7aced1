#include "edasketch/sketch.hpp"

#include "edasketch/parallel.hpp"
#include "edasketch/random.hpp"

namespace edasketch {

std::string to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::Gaussian: return "psi";
    case SketchKind::PowerA: return "a_psi";
    case SketchKind::BPsi: return "b_psi";
    case SketchKind::UbtPsi: return "ubt_psi";
    case SketchKind::RhsGamma: return "gamma";
  }
  return "unknown";
}

SketchKind parse_sketch_kind(const std::string& name) {
  for (auto k : {SketchKind::Gaussian, SketchKind::PowerA, SketchKind::BPsi, SketchKind::UbtPsi,
                 SketchKind::RhsGamma}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown sketch kind '" + name + "' (expected psi, a_psi, b_psi, ubt_psi, gamma)");
}

SketchMatrix sketch_gaussian(Index n, Index width, std::uint64_t seed) {
  if (width < 1) throw ConfigError("sketch_gaussian: width must be >= 1");
  SketchMatrix s{Matrix(n, width), SketchKind::Gaussian, seed};
  for (Index j = 0; j < width; ++j) {
    Substream rng(seed, Stream::Sketch, static_cast<std::uint64_t>(j));
    s.columns.col(j) = rng.normal_vector(n);
  }
  return s;
}

SketchMatrix sketch_power(const LinearOperator& a, const SketchMatrix& psi, int q) {
  if (q < 1) throw ConfigError("sketch_power: q must be >= 1");
  SketchMatrix s{psi.columns, SketchKind::PowerA, psi.seed};
  for (int i = 1; i < q; ++i) s.columns = a.apply_block(s.columns);
  return s;
}

namespace {

template <typename Fn>
Matrix map_columns(const Matrix& in, Fn fn) {
  Matrix out(in.rows(), in.cols());
  parallel_for(static_cast<std::size_t>(in.cols()), [&](std::size_t j) {
    const Index c = static_cast<Index>(j);
    out.col(c) = fn(Vector(in.col(c)));
  });
  return out;
}

}  // namespace

SketchMatrix sketch_b(const CovarianceFactor& f, const SketchMatrix& psi) {
  require_size(psi.columns.rows(), f.size(), "sketch_b");
  return {map_columns(psi.columns, [&](const Vector& v) { return f.apply_b(v); }),
          SketchKind::BPsi, psi.seed};
}

SketchMatrix sketch_ubt(const CovarianceFactor& f, const SketchMatrix& psi) {
  require_size(psi.columns.rows(), f.size(), "sketch_ubt");
  return {map_columns(psi.columns, [&](const Vector& v) { return f.apply_transpose(v); }),
          SketchKind::UbtPsi, psi.seed};
}

SketchMatrix sketch_gamma(const std::vector<MemberProblem>& members) {
  if (members.size() < 2) throw ConfigError("sketch_gamma: need the control and at least one member");
  const Vector& control = members.front().rhs;
  SketchMatrix s{Matrix(control.size(), static_cast<Index>(members.size() - 1)),
                 SketchKind::RhsGamma, 0};
  for (std::size_t j = 1; j < members.size(); ++j) {
    require_size(members[j].rhs.size(), control.size(), "sketch_gamma");
    s.columns.col(static_cast<Index>(j - 1)) = members[j].rhs - control;
  }
  return s;
}

}  // namespace edasketch
