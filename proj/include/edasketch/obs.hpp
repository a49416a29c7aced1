#pragma once

#include "edasketch/model.hpp"

#include <vector>

namespace edasketch {

using ObsVector = Vector;

/// Direct observations of a set of grid points at a set of model steps.
/// Observation vectors are ordered time-major: entry t * n_points + g is grid
/// point grid_indices[g] at step time_steps[t].
struct ObsNetwork {
  std::vector<Index> grid_indices;
  std::vector<int> time_steps;

  Index p() const { return static_cast<Index>(grid_indices.size() * time_steps.size()); }
  int last_step() const;
  void validate(Index n, int n_steps) const;

  /// n_vars points with uniform stride n / n_vars starting at 0 (contiguous
  /// block starting at 0 when strided is false), observed at n_times steps
  /// spread uniformly through the window, excluding t = 0.
  static ObsNetwork uniform(Index n, Index n_vars, int n_steps, int n_times = 3,
                            bool strided = true);
};

/// Samples a sequence of states (indexed by step) at the network points.
ObsVector sample(const std::vector<StateVector>& states, const ObsNetwork& net);

/// Adjoint of sample(): scatters w into per-step forcing vectors for
/// steps 0..net.last_step().
std::vector<StateVector> sample_adjoint(const ObsVector& w, const ObsNetwork& net, Index n);

/// Generalized nonlinear observation operator: integrate then sample.
ObsVector gop_nonlinear(const StateVector& x0, const ObsNetwork& net, const ModelConfig& cfg);

/// Jacobian G around traj applied to dx, and its transpose.
ObsVector gop_tlm(const Trajectory& traj, const StateVector& dx, const ObsNetwork& net);
StateVector gop_adjoint(const Trajectory& traj, const ObsVector& w, const ObsNetwork& net);

}  // namespace edasketch
