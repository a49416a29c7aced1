#include "edasketch/obs.hpp"

#include <algorithm>
#include <string>

namespace edasketch {

int ObsNetwork::last_step() const {
  return time_steps.empty() ? 0 : *std::max_element(time_steps.begin(), time_steps.end());
}

void ObsNetwork::validate(Index n, int n_steps) const {
  if (grid_indices.empty() || time_steps.empty()) throw ConfigError("ObsNetwork: empty network");
  for (Index g : grid_indices) {
    if (g < 0 || g >= n) throw ConfigError("ObsNetwork: grid index " + std::to_string(g) + " out of range");
  }
  for (int t : time_steps) {
    if (t < 0 || t > n_steps) throw ConfigError("ObsNetwork: time step " + std::to_string(t) + " outside window");
  }
}

ObsNetwork ObsNetwork::uniform(Index n, Index n_vars, int n_steps, int n_times, bool strided) {
  if (n_vars < 1 || n_vars > n) throw ConfigError("ObsNetwork::uniform: bad variable count");
  if (n_times < 1 || n_times > n_steps) throw ConfigError("ObsNetwork::uniform: bad time count");
  ObsNetwork net;
  const Index stride = strided ? n / n_vars : 1;
  for (Index g = 0; g < n_vars; ++g) net.grid_indices.push_back(g * stride);
  // Steps 3,6,9 for a 10-step window with three observation times.
  const int spacing = std::max(1, (n_steps - 1) / n_times);
  for (int t = 1; t <= n_times; ++t) net.time_steps.push_back(std::min(n_steps, t * spacing));
  net.time_steps.erase(std::unique(net.time_steps.begin(), net.time_steps.end()),
                       net.time_steps.end());
  if (static_cast<int>(net.time_steps.size()) != n_times) {
    throw ConfigError("ObsNetwork::uniform: window too short for distinct observation times");
  }
  return net;
}

ObsVector sample(const std::vector<StateVector>& states, const ObsNetwork& net) {
  const Index ng = static_cast<Index>(net.grid_indices.size());
  ObsVector y(net.p());
  for (std::size_t t = 0; t < net.time_steps.size(); ++t) {
    const int step = net.time_steps[t];
    if (step >= static_cast<int>(states.size())) throw DimensionError("sample: step beyond states");
    const StateVector& x = states[step];
    for (Index g = 0; g < ng; ++g) y[static_cast<Index>(t) * ng + g] = x[net.grid_indices[g]];
  }
  return y;
}

std::vector<StateVector> sample_adjoint(const ObsVector& w, const ObsNetwork& net, Index n) {
  require_size(w.size(), net.p(), "sample_adjoint");
  const Index ng = static_cast<Index>(net.grid_indices.size());
  std::vector<StateVector> forcing(net.last_step() + 1, StateVector::Zero(n));
  for (std::size_t t = 0; t < net.time_steps.size(); ++t) {
    StateVector& f = forcing[net.time_steps[t]];
    for (Index g = 0; g < ng; ++g) f[net.grid_indices[g]] += w[static_cast<Index>(t) * ng + g];
  }
  return forcing;
}

ObsVector gop_nonlinear(const StateVector& x0, const ObsNetwork& net, const ModelConfig& cfg) {
  net.validate(cfg.n, cfg.n_steps);
  return sample(integrate(x0, cfg, net.last_step()).states, net);
}

ObsVector gop_tlm(const Trajectory& traj, const StateVector& dx, const ObsNetwork& net) {
  if (net.last_step() > traj.n_steps()) throw DimensionError("gop_tlm: trajectory too short");
  return sample(tlm_apply(traj, dx, net.last_step()), net);
}

StateVector gop_adjoint(const Trajectory& traj, const ObsVector& w, const ObsNetwork& net) {
  if (net.last_step() > traj.n_steps()) throw DimensionError("gop_adjoint: trajectory too short");
  return adjoint_apply(traj, sample_adjoint(w, net, traj.n()));
}

}  // namespace edasketch
