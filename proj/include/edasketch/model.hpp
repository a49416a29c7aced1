#pragma once

#include "edasketch/core.hpp"

#include <array>
#include <vector>

namespace edasketch {

using StateVector = Vector;

struct ModelConfig {
  Index n = 1500;       // grid points on the latitude circle
  double forcing = 8.0;
  double dt = 2.5e-2;
  int n_steps = 10;     // assimilation window length in time steps

  void validate() const;
};

/// Forward run of the RK4 scheme with every stage input stored for
/// linearization. stages[i] holds the inputs of the four RK4 stages of the
/// step states[i] -> states[i+1] (the first stage input is states[i] itself).
struct Trajectory {
  double dt = 0.0;
  double forcing = 0.0;
  std::vector<StateVector> states;
  std::vector<std::array<StateVector, 3>> stages;

  int n_steps() const { return static_cast<int>(stages.size()); }
  Index n() const { return states.front().size(); }
};

/// Lorenz-96 right-hand side with cyclic boundary conditions.
StateVector tendency(const StateVector& x, double forcing);

/// One classical fourth-order Runge-Kutta step.
StateVector rk4_step(const StateVector& x, double dt, double forcing);

/// Integrates cfg.n_steps steps from x0. Throws DivergenceError naming the
/// step at which a non-finite value first appears.
Trajectory integrate(const StateVector& x0, const ModelConfig& cfg);
Trajectory integrate(const StateVector& x0, const ModelConfig& cfg, int n_steps);

/// Jacobian of the tendency at x applied to v, and its transpose.
StateVector tendency_tl(const StateVector& x, const StateVector& v);
StateVector tendency_ad(const StateVector& x, const StateVector& w);

/// Tangent-linear propagation of dx0 through the discrete scheme. Returns the
/// perturbation at steps 0..last_step (default: whole trajectory).
std::vector<StateVector> tlm_apply(const Trajectory& traj, const StateVector& dx0,
                                   int last_step = -1);

/// Exact transpose of tlm_apply: returns sum_i M(0->i)^T w_steps[i], where
/// w_steps may be shorter than the trajectory (missing trailing steps are zero).
StateVector adjoint_apply(const Trajectory& traj, const std::vector<StateVector>& w_steps);

}  // namespace edasketch
