#include "edasketch/eda.hpp"

#include "edasketch/parallel.hpp"
#include "edasketch/random.hpp"

namespace edasketch {

void TwinConfig::validate() const {
  model.validate();
  covariance().validate();
  network().validate(model.n, model.n_steps);
  if (!(sigma_o > 0.0)) throw ConfigError("TwinConfig: sigma_o must be positive");
  if (members < 1) throw ConfigError("TwinConfig: need at least one perturbed member");
  if (spinup_steps < 0) throw ConfigError("TwinConfig: spinup_steps must be >= 0");
}

DiffusionCovarianceConfig TwinConfig::covariance() const {
  return {model.n, sigma_b, length_scale, diffusion_steps};
}

ObsNetwork TwinConfig::network() const {
  return ObsNetwork::uniform(model.n, obs_vars, model.n_steps, obs_times, obs_strided);
}

TwinConfig TwinConfig::headline() { return TwinConfig{}; }

TwinConfig TwinConfig::small() {
  TwinConfig cfg;
  cfg.model.n = 120;
  cfg.obs_vars = 10;
  return cfg;
}

StateVector make_truth(const TwinConfig& cfg) {
  cfg.model.validate();
  Substream rng(cfg.seed, Stream::TruthPerturbation);
  StateVector x0 = StateVector::Constant(cfg.model.n, cfg.model.forcing) +
                   cfg.spinup_perturbation * rng.normal_vector(cfg.model.n);
  if (cfg.spinup_steps == 0) return x0;
  return integrate(x0, cfg.model, cfg.spinup_steps).states.back();
}

std::shared_ptr<const Twin> make_twin(const TwinConfig& cfg) {
  cfg.validate();
  auto twin = std::make_shared<Twin>();
  twin->cfg = cfg;
  auto ctx = std::make_shared<AssimContext>(
      AssimContext{cfg.network(), build_ub(cfg.covariance()), cfg.sigma_o});
  twin->ctx = ctx;
  twin->truth = make_truth(cfg);

  const Index n = cfg.model.n;
  Substream bg(cfg.seed, Stream::ControlBackgroundNoise);
  Substream ob(cfg.seed, Stream::ControlObsNoise);
  twin->background = twin->truth + ctx->ub.apply(bg.normal_vector(n));
  twin->observations = gop_nonlinear(twin->truth, ctx->net, cfg.model) +
                       apply_ur(cfg.sigma_o, ob.normal_vector(ctx->net.p()));

  auto traj = std::make_shared<const Trajectory>(integrate(twin->background, cfg.model));
  ObsVector d = twin->observations - sample(traj->states, ctx->net);
  twin->control = make_member_problem(0, std::move(traj), std::move(d), *ctx);
  return twin;
}

EnsembleSetup make_members(std::shared_ptr<const Twin> twin, std::uint64_t ensemble_seed,
                           Linearization mode, int count) {
  const TwinConfig& cfg = twin->cfg;
  const AssimContext& ctx = *twin->ctx;
  const int L = count < 0 ? cfg.members : count;
  if (L < 1) throw ConfigError("make_members: need at least one member");
  const Index n = cfg.model.n;

  EnsembleSetup out;
  out.twin = twin;
  out.ensemble_seed = ensemble_seed;
  out.members.resize(L);
  out.backgrounds.resize(L);
  out.observations.resize(L);

  parallel_for(static_cast<std::size_t>(L), [&](std::size_t idx) {
    const int id = static_cast<int>(idx) + 1;
    Substream ob(ensemble_seed, Stream::MemberObsNoise, static_cast<std::uint64_t>(id));
    Substream bg(ensemble_seed, Stream::MemberBackgroundNoise, static_cast<std::uint64_t>(id));
    const ObsVector eta_o = ob.normal_vector(ctx.net.p());
    const Vector eta_b = bg.normal_vector(n);

    ObsVector y = twin->observations + cfg.member_obs_noise * apply_ur(cfg.sigma_o, eta_o);
    StateVector xb = twin->background + cfg.member_background_noise * ctx.ub.apply(eta_b);

    auto own = std::make_shared<const Trajectory>(integrate(xb, cfg.model));
    ObsVector d = y - sample(own->states, ctx.net);
    std::shared_ptr<const Trajectory> lin =
        mode == Linearization::SharedControl ? twin->control.traj : std::move(own);

    out.members[idx] = make_member_problem(id, std::move(lin), std::move(d), ctx);
    out.backgrounds[idx] = std::move(xb);
    out.observations[idx] = std::move(y);
  });

  std::vector<MemberProblem> all;
  all.reserve(L + 1);
  all.push_back(twin->control);
  all.insert(all.end(), out.members.begin(), out.members.end());
  out.gamma = sketch_gamma(all);
  out.gamma.seed = ensemble_seed;
  return out;
}

}  // namespace edasketch
