#pragma once

#include "edasketch/core.hpp"

#include <functional>
#include <utility>

namespace edasketch {

/// Square linear operator known only through its action on vectors.
///
/// All Hessian algebra in the library goes through this interface; no large
/// matrix is ever formed outside of test oracles and the small-scale
/// validation path (see assemble()).
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index size() const = 0;
  virtual Vector apply(const Vector& x) const = 0;

  /// Column-wise application. Columns are independent and are dispatched
  /// through parallel_for; the result does not depend on the thread count.
  Matrix apply_block(const Matrix& X) const;
};

/// Wraps an explicit matrix. Used for small dense test instances.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix m);

  Index size() const override { return m_.rows(); }
  Vector apply(const Vector& x) const override;
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Index n) : n_(n) {}
  Index size() const override { return n_; }
  Vector apply(const Vector& x) const override;

 private:
  Index n_;
};

/// Adapts any callable Vector -> Vector.
class FunctionOperator final : public LinearOperator {
 public:
  FunctionOperator(Index n, std::function<Vector(const Vector&)> fn)
      : n_(n), fn_(std::move(fn)) {}
  Index size() const override { return n_; }
  Vector apply(const Vector& x) const override;

 private:
  Index n_;
  std::function<Vector(const Vector&)> fn_;
};

/// I + A for a borrowed operator A.
class IdentityPlus final : public LinearOperator {
 public:
  explicit IdentityPlus(const LinearOperator& a) : a_(a) {}
  Index size() const override { return a_.size(); }
  Vector apply(const Vector& x) const override;

 private:
  const LinearOperator& a_;
};

/// Dense matrix of an operator, built by applying it to every unit vector.
Matrix assemble(const LinearOperator& op);

}  // namespace edasketch
