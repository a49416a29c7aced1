// eda-sketch: runs the sketching / LMP experiments and writes CSV results.

#include "edasketch/harness.hpp"
#include "edasketch/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace edasketch;

// List options left empty take the per-experiment defaults.
struct Options {
  ExperimentSpec spec;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> sketches;
  std::vector<std::string> theta_rules;
  std::vector<Index> ranks;
  std::string shift_mode = "none";
  std::size_t threads = 0;

  explicit Options(const std::string& experiment)
      : spec(ExperimentSpec::for_experiment(experiment)) {}

  void finish() {
    const ExperimentSpec defaults = ExperimentSpec::for_experiment(spec.experiment);
    spec.seeds = seeds.empty() ? defaults.seeds : seeds;
    spec.ranks = ranks.empty() ? defaults.ranks : ranks;
    spec.sketches = defaults.sketches;
    if (!sketches.empty()) {
      spec.sketches.clear();
      for (const auto& s : sketches) spec.sketches.push_back(parse_sketch_kind(s));
    }
    spec.theta_rules = defaults.theta_rules;
    if (!theta_rules.empty()) {
      spec.theta_rules.clear();
      for (const auto& r : theta_rules) spec.theta_rules.push_back(parse_theta_rule(r));
    }
    spec.shift_mode = parse_shift_mode(shift_mode);
    if (threads > 0) set_worker_count(threads);
  }
};

void add_options(CLI::App* app, Options& o) {
  ExperimentSpec& s = o.spec;
  TwinConfig& t = s.twin;
  app->set_config("--config", "", "key = value configuration file");
  app->add_option("--seed-list", o.seeds, "Experiment seeds (sketch and ensemble draws)")
      ->delimiter(',');
  app->add_option("--out", s.out_dir, "Output directory")->capture_default_str();
  app->add_option("--n", t.model.n, "State dimension")->capture_default_str();
  app->add_option("--members", t.members, "Perturbed ensemble members L")->capture_default_str();
  app->add_option("--forcing", t.model.forcing, "Lorenz-96 forcing F")->capture_default_str();
  app->add_option("--dt", t.model.dt, "RK4 time step")->capture_default_str();
  app->add_option("--window-steps", t.model.n_steps, "Steps in the assimilation window")
      ->capture_default_str();
  app->add_option("--obs-vars", t.obs_vars, "Observed grid points per time")->capture_default_str();
  app->add_option("--obs-times", t.obs_times, "Observation times in the window")
      ->capture_default_str();
  app->add_option("--obs-strided", t.obs_strided, "Spread observed points evenly")
      ->capture_default_str();
  app->add_option("--sigma-o", t.sigma_o, "Observation error std")->capture_default_str();
  app->add_option("--sigma-b", t.sigma_b, "Background error std")->capture_default_str();
  app->add_option("--length-scale", t.length_scale, "Correlation length scale D")
      ->capture_default_str();
  app->add_option("--diffusion-steps", t.diffusion_steps, "Diffusion steps M")
      ->capture_default_str();
  app->add_option("--spinup-steps", t.spinup_steps, "Truth spin-up steps")->capture_default_str();
  app->add_option("--twin-seed", t.seed, "Seed for truth, background and observations")
      ->capture_default_str();
  app->add_option("--sketches", o.sketches, "Sketch kinds: psi,a_psi,b_psi,ubt_psi,gamma")
      ->delimiter(',');
  app->add_option("--theta-rules", o.theta_rules, "Theta rules: half_sum,lambda_k,one")
      ->delimiter(',');
  app->add_option("--ranks", o.ranks, "Numbers of kept eigenpairs k")->delimiter(',');
  app->add_option("--sketch-width", s.sketch_width, "Sketch width l")->capture_default_str();
  app->add_option("--pcg-iterations", s.pcg_iterations, "PCG iterations")->capture_default_str();
  app->add_option("--shift-mode", o.shift_mode, "Nystrom shift: none,eps_trace,eps_frob_y")
      ->capture_default_str();
  app->add_option("--d-grid", s.length_scales, "Length scales for eig-sensitivity")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--m-grid", s.diffusion_steps, "Diffusion steps for eig-sensitivity")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--n-eigs", s.n_eigs, "Eigenvalues reported by eig-sensitivity")
      ->capture_default_str();
  app->add_option("--lanczos-steps", s.lanczos_steps, "Lanczos steps (0: n-eigs + 40)")
      ->capture_default_str();
  app->add_option("--dense-oracle-max-n", s.dense_oracle_max_n,
                  "Largest n for the dense eigenvalue oracle")
      ->capture_default_str();
  app->add_option("--threads", o.threads, "Worker threads (0: automatic)");
}

int execute(Options& o) {
  o.finish();
  const auto start = std::chrono::steady_clock::now();
  bool passed = true;
  ResultTable table;
  if (o.spec.experiment == "validate") {
    ValidationReport report = run_validate(o.spec);
    passed = report.passed;
    table = std::move(report.table);
    for (const auto& r : table.rows()) {
      if (r.metric == "value") std::cout << r.variant << " = " << format_double(r.value);
      if (r.metric == "pass") std::cout << (r.value > 0 ? "  PASS\n" : "  FAIL\n");
    }
  } else {
    table = run_experiment(o.spec);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string path = write_outputs(o.spec, table, wall);
  std::cout << path << ": " << table.size() << " rows, " << format_double(wall) << " s\n";
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Nystrom sketches and spectral LMPs for an ensemble of 4D-Var problems"};
  app.require_subcommand(1);

  // Options live on the top level so that config files use plain keys;
  // subcommands pass unmatched options up.
  Options opts("control-lmp");
  add_options(&app, opts);

  CLI::App* run = app.add_subcommand("run", "Run one experiment")->fallthrough();
  run->add_option("experiment", opts.spec.experiment, "Experiment id")
      ->required()
      ->check(CLI::IsMember(experiment_ids()));
  app.add_subcommand("validate", "Oracle and property checks on the small twin")->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (!run->parsed()) {
      opts.spec.experiment = "validate";
      const TwinConfig small = TwinConfig::small();
      if (app["--n"]->count() == 0) opts.spec.twin.model.n = small.model.n;
      if (app["--obs-vars"]->count() == 0) opts.spec.twin.obs_vars = small.obs_vars;
    }
    return execute(opts);
  } catch (const std::exception& e) {
    std::cerr << "eda-sketch: " << e.what() << '\n';
    return 2;
  }
}
