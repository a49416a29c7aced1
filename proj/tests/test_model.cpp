#include "edasketch/model.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace edasketch;
using testutil::randn;

namespace {

Trajectory chaotic_trajectory(Index n, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelConfig cfg;
  cfg.n = n;
  cfg.n_steps = steps;
  const StateVector x0 = StateVector::Constant(n, 8.0) + randn(n, rng);
  // Move onto the attractor before linearizing.
  const StateVector xs = integrate(x0, cfg, 200).states.back();
  return integrate(xs, cfg);
}

// Dense Jacobian of one RK4 step by central differences.
Matrix fd_step_jacobian(const StateVector& x, double dt, double f, double h) {
  const Index n = x.size();
  Matrix jac(n, n);
  for (Index j = 0; j < n; ++j) {
    StateVector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (testutil::rk4_reference(xp, dt, f) - testutil::rk4_reference(xm, dt, f)) / (2 * h);
  }
  return jac;
}

}  // namespace

TEST(Tendency, EquilibriumIsZero) {
  const StateVector x = StateVector::Constant(40, 8.0);
  EXPECT_LT(tendency(x, 8.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Tendency, HandEvaluatedFourPointCase) {
  StateVector x(4);
  x << 1, 0, 0, 0;
  StateVector expected(4);
  expected << -1, 0, 0, 0;
  EXPECT_LT((tendency(x, 0.0) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Tendency, ZeroStateGivesForcing) {
  const StateVector f = tendency(StateVector::Zero(12), 8.0);
  EXPECT_LT((f - StateVector::Constant(12, 8.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Tendency, RejectsFewerThanFourPoints) {
  EXPECT_THROW(tendency(StateVector::Zero(3), 8.0), ConfigError);
}

TEST(Tendency, MatchesReferenceAndIsShiftEquivariant) {
  std::mt19937_64 rng(3);
  const StateVector x = randn(37, rng) * 4.0;
  const StateVector f = tendency(x, 8.0);
  EXPECT_LT((f - testutil::l96_reference(x, 8.0)).norm(), 1e-12 * f.norm());
  StateVector shifted(37);
  for (Index i = 0; i < 37; ++i) shifted[(i + 5) % 37] = x[i];
  const StateVector fs = tendency(shifted, 8.0);
  for (Index i = 0; i < 37; ++i) EXPECT_NEAR(fs[(i + 5) % 37], f[i], 1e-12);
}

TEST(Rk4, FixedPointAndZeroStep) {
  const StateVector eq = StateVector::Constant(40, 8.0);
  EXPECT_LT((rk4_step(eq, 0.025, 8.0) - eq).cwiseAbs().maxCoeff(), 1e-13);
  std::mt19937_64 rng(4);
  const StateVector x = randn(40, rng);
  EXPECT_EQ(rk4_step(x, 0.0, 8.0), x);
}

TEST(Rk4, MatchesIndependentReference) {
  std::mt19937_64 rng(5);
  const StateVector x = StateVector::Constant(40, 8.0) + 3.0 * randn(40, rng);
  const StateVector got = rk4_step(x, 0.025, 8.0);
  const StateVector want = testutil::rk4_reference(x, 0.025, 8.0);
  EXPECT_LE((got - want).norm(), 1e-13 * want.norm());
}

TEST(Integrate, ZeroStepsAndEquilibrium) {
  ModelConfig cfg;
  cfg.n = 40;
  const StateVector eq = StateVector::Constant(40, 8.0);
  const Trajectory t0 = integrate(eq, cfg, 0);
  ASSERT_EQ(t0.states.size(), 1u);
  EXPECT_EQ(t0.states[0], eq);
  const Trajectory t = integrate(eq, cfg);
  ASSERT_EQ(t.states.size(), 11u);
  for (const auto& s : t.states) EXPECT_LT((s - eq).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Integrate, StatesFollowRk4Exactly) {
  std::mt19937_64 rng(6);
  ModelConfig cfg;
  cfg.n = 40;
  const Trajectory t = integrate(StateVector::Constant(40, 8.0) + randn(40, rng), cfg);
  for (int i = 0; i < t.n_steps(); ++i) {
    EXPECT_EQ(t.states[i + 1], rk4_step(t.states[i], cfg.dt, cfg.forcing));
  }
}

TEST(Integrate, ChaoticSeparationGrows) {
  std::mt19937_64 rng(7);
  ModelConfig cfg;
  cfg.n = 40;
  const StateVector x0 = StateVector::Constant(40, 8.0) + randn(40, rng);
  StateVector x1 = x0;
  x1[0] += 1e-8;
  const auto a = integrate(x0, cfg, 800).states.back();
  const auto b = integrate(x1, cfg, 800).states.back();
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Integrate, DivergenceNamesStep) {
  ModelConfig cfg;
  cfg.n = 8;
  cfg.dt = 1.0;
  const StateVector x0 = StateVector::LinSpaced(8, -1e80, 1e80);
  try {
    integrate(x0, cfg, 50);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 1);
    EXPECT_LE(e.step(), 50);
  }
}

TEST(ModelConfig, RejectsInvalid) {
  ModelConfig cfg;
  cfg.n = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.n = 10;
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = 0.01;
  cfg.n_steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TendencyLinearization, MatchesFiniteDifferencesAndTransposes) {
  std::mt19937_64 rng(8);
  const StateVector x = randn(9, rng) * 3.0;
  const StateVector v = randn(9, rng);
  const double h = 1e-6;
  const StateVector fd = (tendency(x + h * v, 8.0) - tendency(x - h * v, 8.0)) / (2 * h);
  EXPECT_LT((tendency_tl(x, v) - fd).norm(), 1e-7 * fd.norm());
  const StateVector w = randn(9, rng);
  EXPECT_NEAR(tendency_tl(x, v).dot(w), v.dot(tendency_ad(x, w)), 1e-12 * v.norm() * w.norm() * 10);
}

TEST(Tlm, ZeroPerturbationAndLinearity) {
  const Trajectory traj = chaotic_trajectory(40, 10, 9);
  for (const auto& s : tlm_apply(traj, StateVector::Zero(40))) EXPECT_EQ(s.norm(), 0.0);
  std::mt19937_64 rng(10);
  const StateVector u = randn(40, rng), v = randn(40, rng);
  const auto lhs = tlm_apply(traj, 2.5 * u - 0.7 * v);
  const auto tu = tlm_apply(traj, u), tv = tlm_apply(traj, v);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const StateVector rhs = 2.5 * tu[i] - 0.7 * tv[i];
    EXPECT_LE((lhs[i] - rhs).norm(), 1e-12 * rhs.norm() + 1e-300);
  }
}

TEST(Tlm, SingleStepMatchesFiniteDifferenceJacobian) {
  std::mt19937_64 rng(11);
  ModelConfig cfg;
  cfg.n = 4;
  cfg.n_steps = 1;
  const StateVector x = StateVector::Constant(4, 8.0) + 2.0 * randn(4, rng);
  const Trajectory traj = integrate(x, cfg);
  const Matrix jac = fd_step_jacobian(x, cfg.dt, cfg.forcing, 1e-5);
  Matrix tlm(4, 4), adj(4, 4);
  for (Index j = 0; j < 4; ++j) {
    tlm.col(j) = tlm_apply(traj, StateVector::Unit(4, j))[1];
    adj.col(j) = adjoint_apply(traj, {StateVector::Zero(4), StateVector::Unit(4, j)});
  }
  EXPECT_LE((tlm - jac).norm(), 1e-6 * jac.norm());
  EXPECT_LE((adj - jac.transpose()).norm(), 1e-6 * jac.norm());
}

TEST(Tlm, TaylorRemainderIsSecondOrder) {
  const Trajectory traj = chaotic_trajectory(40, 10, 12);
  std::mt19937_64 rng(13);
  const StateVector v = randn(40, rng);
  ModelConfig cfg;
  cfg.n = 40;
  const StateVector& x = traj.states.front();
  const StateVector mx = traj.states.back();
  const StateVector gv = tlm_apply(traj, v).back();
  double prev = -1.0;
  for (double eps = 1e-2; eps >= 0.99e-5; eps /= 2.0) {
    const double err = (integrate(x + eps * v, cfg).states.back() - mx - eps * gv).norm();
    if (prev > 0) {
      EXPECT_GE(prev / err, 3.5) << "eps=" << eps;
      EXPECT_LE(prev / err, 4.5) << "eps=" << eps;
    }
    prev = err;
  }
}

TEST(Adjoint, ZeroForcingGivesZero) {
  const Trajectory traj = chaotic_trajectory(40, 10, 14);
  std::vector<StateVector> w(11, StateVector::Zero(40));
  EXPECT_EQ(adjoint_apply(traj, w).norm(), 0.0);
}

TEST(Adjoint, IdentityForEveryWindowLength) {
  std::mt19937_64 rng(15);
  for (int window = 1; window <= 10; ++window) {
    const Trajectory traj = chaotic_trajectory(40, window, 100 + window);
    for (int pair = 0; pair < 100; ++pair) {
      const StateVector v = randn(40, rng);
      std::vector<StateVector> w;
      for (int i = 0; i <= window; ++i) w.push_back(randn(40, rng));
      const auto mv = tlm_apply(traj, v);
      double lhs = 0.0, wnorm2 = 0.0;
      for (int i = 0; i <= window; ++i) {
        lhs += mv[i].dot(w[i]);
        wnorm2 += w[i].squaredNorm();
      }
      const double rhs = v.dot(adjoint_apply(traj, w));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * v.norm() * std::sqrt(wnorm2));
    }
  }
}

TEST(Adjoint, ShortForcingSequenceIsZeroPadded) {
  const Trajectory traj = chaotic_trajectory(40, 10, 16);
  std::mt19937_64 rng(17);
  const StateVector w3 = randn(40, rng);
  std::vector<StateVector> shortw(4, StateVector::Zero(40));
  shortw[3] = w3;
  std::vector<StateVector> longw(11, StateVector::Zero(40));
  longw[3] = w3;
  EXPECT_LE((adjoint_apply(traj, shortw) - adjoint_apply(traj, longw)).norm(), 1e-14 * w3.norm());
}

TEST(Adjoint, RejectsSizeMismatch) {
  const Trajectory traj = chaotic_trajectory(40, 10, 18);
  EXPECT_THROW(tlm_apply(traj, StateVector::Zero(39)), DimensionError);
  EXPECT_THROW(adjoint_apply(traj, {StateVector::Zero(39)}), DimensionError);
}
