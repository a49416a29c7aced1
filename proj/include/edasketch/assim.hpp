#pragma once

#include "edasketch/covariance.hpp"
#include "edasketch/linear_operator.hpp"
#include "edasketch/obs.hpp"

#include <atomic>
#include <memory>

namespace edasketch {

/// Quantities shared by every member of an ensemble: the observation network
/// and the error covariances (B_j = B and R_j = R).
struct AssimContext {
  ObsNetwork net;
  CovarianceFactor ub;
  double sigma_o;
};

/// One incremental 4D-Var problem in control-variable space:
/// (I + A) dz = b with A = U_B^T G^T R^-1 G U_B and b = U_B^T G^T R^-1 d.
struct MemberProblem {
  int id = 0;  // 0 is the control member
  std::shared_ptr<const Trajectory> traj;  // linearization trajectory
  ObsVector innovation;
  Vector rhs;
};

/// b = U_B^T G^T R^-1 d.
Vector build_rhs(const Trajectory& traj, const ObsVector& d, const AssimContext& ctx);

MemberProblem make_member_problem(int id, std::shared_ptr<const Trajectory> traj, ObsVector d,
                                  const AssimContext& ctx);

/// Quadratic cost in z-coordinates:
/// J = 1/2 dz^T dz + 1/2 (G U_B dz - d)^T R^-1 (G U_B dz - d).
double quadratic_cost(const Vector& dz, const MemberProblem& member, const AssimContext& ctx);

/// The low-rank part A of the first-level preconditioned Hessian of one
/// member. Every apply() counts as one matrix-vector product with A (one TLM
/// and one adjoint sweep). The counter is atomic so that sketch columns can be
/// applied concurrently through one instance.
class HessianOperator final : public LinearOperator {
 public:
  HessianOperator(std::shared_ptr<const Trajectory> traj, const AssimContext& ctx);
  HessianOperator(const MemberProblem& member, const AssimContext& ctx)
      : HessianOperator(member.traj, ctx) {}

  Index size() const override { return ctx_.ub.size(); }
  Vector apply(const Vector& dz) const override;

  std::size_t matvecs() const { return counter_.load(); }
  void reset_counter() { counter_.store(0); }

  const Trajectory& trajectory() const { return *traj_; }

 private:
  std::shared_ptr<const Trajectory> traj_;
  const AssimContext& ctx_;
  mutable std::atomic<std::size_t> counter_{0};
};

inline Vector apply_A(const HessianOperator& h, const Vector& dz) { return h.apply(dz); }
inline Vector apply_I_plus_A(const HessianOperator& h, const Vector& dz) { return dz + h.apply(dz); }

}  // namespace edasketch
