#pragma once

#include "edasketch/assim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edasketch {

enum class SketchKind { Gaussian, PowerA, BPsi, UbtPsi, RhsGamma };

std::string to_string(SketchKind kind);
SketchKind parse_sketch_kind(const std::string& name);

struct SketchMatrix {
  Matrix columns;
  SketchKind kind = SketchKind::Gaussian;
  std::uint64_t seed = 0;

  Index width() const { return columns.cols(); }
};

/// n x width block of i.i.d. standard normal entries; column j comes from its
/// own substream so it does not depend on the block width.
SketchMatrix sketch_gaussian(Index n, Index width, std::uint64_t seed);

/// A^(q-1) Psi, applying A column-wise.
SketchMatrix sketch_power(const LinearOperator& a, const SketchMatrix& psi, int q);

/// B Psi = U_B^T U_B Psi and U_B^T Psi.
SketchMatrix sketch_b(const CovarianceFactor& f, const SketchMatrix& psi);
SketchMatrix sketch_ubt(const CovarianceFactor& f, const SketchMatrix& psi);

/// Right-hand-side differences: column j-1 is rhs(members[j]) - rhs(members[0]),
/// members[0] being the control. Requires at least two members.
SketchMatrix sketch_gamma(const std::vector<MemberProblem>& members);

}  // namespace edasketch
