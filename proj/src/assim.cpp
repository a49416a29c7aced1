#include "edasketch/assim.hpp"

namespace edasketch {

Vector build_rhs(const Trajectory& traj, const ObsVector& d, const AssimContext& ctx) {
  require_size(d.size(), ctx.net.p(), "build_rhs");
  return ctx.ub.apply_transpose(gop_adjoint(traj, apply_rinv(ctx.sigma_o, d), ctx.net));
}

MemberProblem make_member_problem(int id, std::shared_ptr<const Trajectory> traj, ObsVector d,
                                  const AssimContext& ctx) {
  MemberProblem m;
  m.id = id;
  m.rhs = build_rhs(*traj, d, ctx);
  m.traj = std::move(traj);
  m.innovation = std::move(d);
  return m;
}

double quadratic_cost(const Vector& dz, const MemberProblem& member, const AssimContext& ctx) {
  require_size(dz.size(), ctx.ub.size(), "quadratic_cost");
  const ObsVector misfit = gop_tlm(*member.traj, ctx.ub.apply(dz), ctx.net) - member.innovation;
  return 0.5 * dz.squaredNorm() + 0.5 * misfit.dot(apply_rinv(ctx.sigma_o, misfit));
}

HessianOperator::HessianOperator(std::shared_ptr<const Trajectory> traj, const AssimContext& ctx)
    : traj_(std::move(traj)), ctx_(ctx) {
  require_size(traj_->n(), ctx_.ub.size(), "HessianOperator");
  if (ctx_.net.last_step() > traj_->n_steps()) {
    throw DimensionError("HessianOperator: trajectory shorter than observation window");
  }
}

Vector HessianOperator::apply(const Vector& dz) const {
  require_size(dz.size(), size(), "HessianOperator::apply");
  counter_.fetch_add(1);
  const ObsVector g = gop_tlm(*traj_, ctx_.ub.apply(dz), ctx_.net);
  return ctx_.ub.apply_transpose(gop_adjoint(*traj_, apply_rinv(ctx_.sigma_o, g), ctx_.net));
}

}  // namespace edasketch
