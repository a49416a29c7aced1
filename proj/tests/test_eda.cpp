#include "edasketch/eda.hpp"
#include "edasketch/parallel.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace edasketch;

TEST(Truth, UnperturbedEquilibriumStaysAtForcing) {
  TwinConfig cfg = TwinConfig::small();
  cfg.spinup_perturbation = 0.0;
  cfg.spinup_steps = 0;
  EXPECT_EQ(make_truth(cfg), StateVector::Constant(120, 8.0));
  cfg.spinup_steps = 50;
  EXPECT_LT((make_truth(cfg).array() - 8.0).abs().maxCoeff(), 1e-12);
}

TEST(Truth, DeterministicAndOnAttractor) {
  const TwinConfig cfg = TwinConfig::small();
  const StateVector a = make_truth(cfg);
  EXPECT_EQ(a, make_truth(cfg));
  EXPECT_GT(a.minCoeff(), -10.0);
  EXPECT_LT(a.maxCoeff(), 15.0);
  EXPECT_GT((a.array() - 8.0).abs().maxCoeff(), 1.0);
  TwinConfig other = cfg;
  other.seed = 2;
  EXPECT_NE(a, make_truth(other));
}

TEST(Twin, ControlProblemIsConsistent) {
  const auto twin = make_twin(TwinConfig::small());
  const AssimContext& ctx = *twin->ctx;
  EXPECT_EQ(twin->control.id, 0);
  const ObsVector d = twin->observations - gop_nonlinear(twin->background, ctx.net, twin->cfg.model);
  EXPECT_LT((twin->control.innovation - d).norm(), 1e-12 * d.norm());
  EXPECT_LT((twin->control.traj->states.front() - twin->background).norm(), 1e-15);
  EXPECT_THROW(
      [] {
        TwinConfig bad = TwinConfig::small();
        bad.sigma_o = 0.0;
        return make_twin(bad);
      }(),
      ConfigError);
}

TEST(Members, UnperturbedSharedMembersReproduceControl) {
  TwinConfig cfg = TwinConfig::small();
  cfg.member_obs_noise = 0.0;
  cfg.member_background_noise = 0.0;
  const auto twin = make_twin(cfg);
  const EnsembleSetup ens = shared_linearization_mode(twin, 7, 5);
  ASSERT_EQ(ens.members.size(), 5u);
  EXPECT_EQ(ens.gamma.width(), 5);
  EXPECT_EQ(ens.gamma.columns.norm(), 0.0);
  for (const auto& m : ens.members) EXPECT_EQ(m.rhs, twin->control.rhs);
}

TEST(Members, IdsCountAndSketch) {
  const auto twin = make_twin(TwinConfig::small());
  const EnsembleSetup ens = make_members(twin, 3);
  ASSERT_EQ(ens.members.size(), 20u);
  EXPECT_EQ(ens.gamma.width(), 20);
  EXPECT_EQ(ens.gamma.kind, SketchKind::RhsGamma);
  for (int j = 0; j < 20; ++j) {
    EXPECT_EQ(ens.members[j].id, j + 1);
    EXPECT_LT((ens.gamma.columns.col(j) - (ens.members[j].rhs - twin->control.rhs)).norm(), 1e-15);
  }
  EXPECT_THROW(make_members(twin, 3, Linearization::OwnBackground, 0), ConfigError);
}

TEST(Members, SharedModeHessiansEqualControl) {
  const auto twin = make_twin(TwinConfig::small());
  const EnsembleSetup ens = shared_linearization_mode(twin, 4, 3);
  const HessianOperator ac(twin->control, *twin->ctx);
  std::mt19937_64 rng(1);
  const Vector v = testutil::randn(120, rng);
  for (const auto& m : ens.members) {
    EXPECT_EQ(m.traj.get(), twin->control.traj.get());
    EXPECT_EQ(HessianOperator(m, *twin->ctx).apply(v), ac.apply(v));
  }
}

TEST(Members, OwnBackgroundLinearizesAtMemberBackground) {
  const auto twin = make_twin(TwinConfig::small());
  const EnsembleSetup ens = make_members(twin, 5, Linearization::OwnBackground, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_LT((ens.members[j].traj->states.front() - ens.backgrounds[j]).norm(), 1e-15);
    const ObsVector d =
        ens.observations[j] - gop_nonlinear(ens.backgrounds[j], twin->ctx->net, twin->cfg.model);
    EXPECT_LT((ens.members[j].innovation - d).norm(), 1e-12 * d.norm());
  }
}

TEST(Members, BackgroundPerturbationsHaveCovarianceB) {
  const auto twin = make_twin(TwinConfig::small());
  const int count = 5000;
  const EnsembleSetup ens = make_members(twin, 9, Linearization::SharedControl, count);
  Matrix dev(120, count);
  for (int j = 0; j < count; ++j) dev.col(j) = ens.backgrounds[j] - twin->background;
  const Matrix cov = dev * dev.transpose() / static_cast<double>(count);
  Matrix b(120, 120);
  for (Index j = 0; j < 120; ++j) b.col(j) = twin->ctx->ub.apply_b(Vector::Unit(120, j));
  EXPECT_LE(testutil::spectral_norm_sym(cov - b) / testutil::spectral_norm_sym(b), 0.15);

  Vector mean = Vector::Zero(twin->ctx->net.p());
  for (int j = 0; j < count; ++j) mean += ens.observations[j] - twin->observations;
  mean /= static_cast<double>(count);
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 4.0 * twin->cfg.sigma_o / std::sqrt(static_cast<double>(count)));
}

TEST(Members, IndependentOfThreadCountAndOrder) {
  const auto twin = make_twin(TwinConfig::small());
  const std::size_t saved = worker_count();
  set_worker_count(1);
  const EnsembleSetup serial = make_members(twin, 11);
  set_worker_count(4);
  const EnsembleSetup threaded = make_members(twin, 11);
  set_worker_count(saved);
  EXPECT_EQ(serial.gamma.columns, threaded.gamma.columns);
  const EnsembleSetup fewer = make_members(twin, 11, Linearization::OwnBackground, 5);
  EXPECT_EQ(fewer.gamma.columns, serial.gamma.columns.leftCols(5));
  EXPECT_NE(make_members(twin, 12).gamma.columns, serial.gamma.columns);
}
