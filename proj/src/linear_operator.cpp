#include "edasketch/linear_operator.hpp"

#include "edasketch/parallel.hpp"

namespace edasketch {

Matrix LinearOperator::apply_block(const Matrix& X) const {
  require_size(X.rows(), size(), "LinearOperator::apply_block");
  Matrix Y(size(), X.cols());
  parallel_for(static_cast<std::size_t>(X.cols()), [&](std::size_t j) {
    const Index c = static_cast<Index>(j);
    Y.col(c) = apply(X.col(c));
  });
  return Y;
}

DenseOperator::DenseOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("DenseOperator: matrix must be square");
}

Vector DenseOperator::apply(const Vector& x) const {
  require_size(x.size(), m_.cols(), "DenseOperator::apply");
  return m_ * x;
}

Vector IdentityOperator::apply(const Vector& x) const {
  require_size(x.size(), n_, "IdentityOperator::apply");
  return x;
}

Vector FunctionOperator::apply(const Vector& x) const {
  require_size(x.size(), n_, "FunctionOperator::apply");
  return fn_(x);
}

Vector IdentityPlus::apply(const Vector& x) const { return x + a_.apply(x); }

Matrix assemble(const LinearOperator& op) {
  return op.apply_block(Matrix::Identity(op.size(), op.size()));
}

}  // namespace edasketch
