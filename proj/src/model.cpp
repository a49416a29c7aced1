#include "edasketch/model.hpp"

#include <cmath>
#include <string>

namespace edasketch {

namespace {

inline Index wrap(Index i, Index n) { return (i % n + n) % n; }

void check_n(Index n) {
  if (n < 4) throw ConfigError("Lorenz-96 requires n >= 4, got " + std::to_string(n));
}

}  // namespace

void ModelConfig::validate() const {
  check_n(n);
  if (!(dt > 0.0)) throw ConfigError("ModelConfig: dt must be positive");
  if (n_steps < 1) throw ConfigError("ModelConfig: n_steps must be >= 1");
}

StateVector tendency(const StateVector& x, double forcing) {
  const Index n = x.size();
  check_n(n);
  StateVector f(n);
  for (Index j = 0; j < n; ++j) {
    const double xm2 = x[wrap(j - 2, n)];
    const double xm1 = x[wrap(j - 1, n)];
    const double xp1 = x[wrap(j + 1, n)];
    f[j] = (xp1 - xm2) * xm1 - x[j] + forcing;
  }
  return f;
}

StateVector tendency_tl(const StateVector& x, const StateVector& v) {
  const Index n = x.size();
  require_size(v.size(), n, "tendency_tl");
  StateVector df(n);
  for (Index j = 0; j < n; ++j) {
    const Index m2 = wrap(j - 2, n), m1 = wrap(j - 1, n), p1 = wrap(j + 1, n);
    df[j] = (v[p1] - v[m2]) * x[m1] + (x[p1] - x[m2]) * v[m1] - v[j];
  }
  return df;
}

StateVector tendency_ad(const StateVector& x, const StateVector& w) {
  const Index n = x.size();
  require_size(w.size(), n, "tendency_ad");
  StateVector g(n);
  for (Index i = 0; i < n; ++i) {
    const Index m2 = wrap(i - 2, n), m1 = wrap(i - 1, n), p1 = wrap(i + 1, n),
                p2 = wrap(i + 2, n);
    g[i] = -x[p1] * w[p2] + (x[p2] - x[m1]) * w[p1] + x[m2] * w[m1] - w[i];
  }
  return g;
}

StateVector rk4_step(const StateVector& x, double dt, double forcing) {
  const StateVector k1 = tendency(x, forcing);
  const StateVector k2 = tendency(x + 0.5 * dt * k1, forcing);
  const StateVector k3 = tendency(x + 0.5 * dt * k2, forcing);
  const StateVector k4 = tendency(x + dt * k3, forcing);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const StateVector& x0, const ModelConfig& cfg) {
  return integrate(x0, cfg, cfg.n_steps);
}

Trajectory integrate(const StateVector& x0, const ModelConfig& cfg, int n_steps) {
  check_n(x0.size());
  require_size(x0.size(), cfg.n, "integrate");
  if (n_steps < 0) throw ConfigError("integrate: negative step count");
  if (!x0.allFinite()) throw DivergenceError("integrate: non-finite initial state", 0);

  const double dt = cfg.dt;
  const double F = cfg.forcing;
  Trajectory traj;
  traj.dt = dt;
  traj.forcing = F;
  traj.states.reserve(n_steps + 1);
  traj.stages.reserve(n_steps);
  traj.states.push_back(x0);

  for (int s = 0; s < n_steps; ++s) {
    const StateVector& x = traj.states.back();
    // Same arithmetic as rk4_step, keeping the stage inputs.
    const StateVector k1 = tendency(x, F);
    StateVector s2 = x + 0.5 * dt * k1;
    const StateVector k2 = tendency(s2, F);
    StateVector s3 = x + 0.5 * dt * k2;
    const StateVector k3 = tendency(s3, F);
    StateVector s4 = x + dt * k3;
    const StateVector k4 = tendency(s4, F);
    StateVector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
      throw DivergenceError("integrate: non-finite state at step " + std::to_string(s + 1),
                            s + 1);
    }
    traj.stages.push_back({std::move(s2), std::move(s3), std::move(s4)});
    traj.states.push_back(std::move(next));
  }
  return traj;
}

std::vector<StateVector> tlm_apply(const Trajectory& traj, const StateVector& dx0,
                                   int last_step) {
  require_size(dx0.size(), traj.n(), "tlm_apply");
  if (last_step < 0) last_step = traj.n_steps();
  if (last_step > traj.n_steps()) throw DimensionError("tlm_apply: step beyond trajectory");

  const double h = traj.dt;
  std::vector<StateVector> out;
  out.reserve(last_step + 1);
  out.push_back(dx0);
  for (int s = 0; s < last_step; ++s) {
    const StateVector& dx = out.back();
    const auto& st = traj.stages[s];
    const StateVector dk1 = tendency_tl(traj.states[s], dx);
    const StateVector dk2 = tendency_tl(st[0], dx + 0.5 * h * dk1);
    const StateVector dk3 = tendency_tl(st[1], dx + 0.5 * h * dk2);
    const StateVector dk4 = tendency_tl(st[2], dx + h * dk3);
    out.push_back(dx + (h / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4));
  }
  return out;
}

StateVector adjoint_apply(const Trajectory& traj, const std::vector<StateVector>& w_steps) {
  const Index n = traj.n();
  if (static_cast<int>(w_steps.size()) > traj.n_steps() + 1) {
    throw DimensionError("adjoint_apply: more forcing terms than trajectory states");
  }
  for (const auto& w : w_steps) require_size(w.size(), n, "adjoint_apply");
  if (w_steps.empty()) return StateVector::Zero(n);

  const double h = traj.dt;
  const int last = static_cast<int>(w_steps.size()) - 1;
  StateVector adx = w_steps[last];
  for (int s = last - 1; s >= 0; --s) {
    const auto& st = traj.stages[s];
    // Reverse sweep of the TLM step; adx is the adjoint of the step output.
    const StateVector a_dk1_0 = (h / 6.0) * adx;
    const StateVector a_dk23 = (h / 3.0) * adx;
    StateVector a_dx = adx;

    const StateVector a_u4 = tendency_ad(st[2], a_dk1_0);  // a_dk4 == a_dk1_0
    a_dx += a_u4;
    const StateVector a_dk3 = a_dk23 + h * a_u4;
    const StateVector a_u3 = tendency_ad(st[1], a_dk3);
    a_dx += a_u3;
    const StateVector a_dk2 = a_dk23 + 0.5 * h * a_u3;
    const StateVector a_u2 = tendency_ad(st[0], a_dk2);
    a_dx += a_u2;
    const StateVector a_dk1 = a_dk1_0 + 0.5 * h * a_u2;
    a_dx += tendency_ad(traj.states[s], a_dk1);

    adx = a_dx + w_steps[s];
  }
  return adx;
}

}  // namespace edasketch
