#include "edasketch/harness.hpp"
#include "edasketch/parallel.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace edasketch;

namespace {

ExperimentSpec small_spec(const std::string& id) {
  ExperimentSpec spec = ExperimentSpec::for_experiment(id);
  spec.twin = TwinConfig::small();
  spec.seeds = {1, 2, 3};
  spec.pcg_iterations = 8;
  return spec;
}

}  // namespace

TEST(ResultTable, CsvLayout) {
  ResultTable t;
  t.add({"control-lmp", 3, 0, "gamma", "half_sum", 20, 4, "cost", 0.1});
  t.add({"eig-error", -1, -1, "oracle", "", 20, 1, "eigenvalue", 2.5});
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv,
            "experiment,seed,member,variant,theta_rule,k,index,metric,value\n"
            "control-lmp,3,0,gamma,half_sum,20,4,cost,0.1\n"
            "eig-error,,,oracle,,20,1,eigenvalue,2.5\n");
  EXPECT_EQ(t.select("cost", "gamma").size(), 1u);
  EXPECT_EQ(t.select("cost", "psi").size(), 0u);
  EXPECT_EQ(t.select("eigenvalue", "", "", 20, 1, -1).size(), 1u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-2.5e-12), "-2.5e-12");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Summary, MedianMinMax) {
  const Summary odd = summarize({3.0, 1.0, 2.0});
  EXPECT_EQ(odd.median, 2.0);
  EXPECT_EQ(odd.min, 1.0);
  EXPECT_EQ(odd.max, 3.0);
  EXPECT_EQ(summarize({4.0, 1.0, 2.0, 3.0}).median, 2.5);
  EXPECT_THROW(summarize({}), ConfigError);
}

TEST(ExperimentSpec, ValidationErrors) {
  ExperimentSpec spec;
  EXPECT_NO_THROW(spec.validate());
  spec.experiment = "bogus";
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.ranks = {21};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.seeds.clear();
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.pcg_iterations = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.twin.obs_vars = 2000;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(ExperimentSpec, PerExperimentDefaults) {
  const ExperimentSpec theta = ExperimentSpec::for_experiment("theta-sensitivity");
  EXPECT_EQ(theta.theta_rules.size(), 3u);
  EXPECT_EQ(theta.ranks, (std::vector<Index>{20, 15}));
  EXPECT_EQ(ExperimentSpec::for_experiment("validate").twin.model.n, 120);
  EXPECT_EQ(ExperimentSpec::default_seeds().size(), 20u);
}

TEST(ControlLmp, MatvecAxisAndDeterminism) {
  const ExperimentSpec spec = small_spec("control-lmp");
  const ResultTable t = run_control_lmp(spec);
  EXPECT_EQ(t.select("matvecs", "none", "", -1, 0), (std::vector<double>{0.0}));
  EXPECT_EQ(t.select("median_matvecs", "a_psi", "", -1, 0), (std::vector<double>{2.0}));
  for (const char* v : {"psi", "b_psi", "ubt_psi", "gamma"}) {
    EXPECT_EQ(t.select("median_matvecs", v, "", -1, 0), (std::vector<double>{1.0})) << v;
    EXPECT_EQ(t.select("median_matvecs", v, "", -1, 8), (std::vector<double>{9.0})) << v;
    EXPECT_EQ(t.select("cost", v, "", -1, 0).size(), 3u);
  }
  // Every variant starts from dz = 0, so the initial cost is shared.
  const double j0 = t.select("cost", "none", "", -1, 0).front();
  for (double c : t.select("cost", "", "", -1, 0)) EXPECT_EQ(c, j0);
  EXPECT_EQ(run_control_lmp(spec).to_csv(), t.to_csv());
}

TEST(ControlLmp, ThreadCountDoesNotChangeOutput) {
  ExperimentSpec spec = small_spec("control-lmp");
  spec.sketches = {SketchKind::Gaussian, SketchKind::RhsGamma};
  const std::size_t saved = worker_count();
  set_worker_count(1);
  const std::string serial = run_control_lmp(spec).to_csv();
  set_worker_count(3);
  const std::string threaded = run_control_lmp(spec).to_csv();
  set_worker_count(saved);
  EXPECT_EQ(serial, threaded);
}

TEST(EnsembleLmp, RatioStartsAtOne) {
  ExperimentSpec spec = small_spec("ensemble-lmp");
  spec.seeds = {1};
  spec.twin.members = 6;
  spec.sketch_width = 6;
  spec.ranks = {6, 4};
  const ResultTable t = run_ensemble_lmp(spec);
  const auto r0 = t.select("ratio", "gamma", "", -1, 0);
  ASSERT_EQ(r0.size(), 6u * 2u * 2u);
  for (double r : r0) EXPECT_EQ(r, 1.0);
  EXPECT_EQ(t.select("median_ratio", "gamma", "half_sum", 4).size(), 9u);
  EXPECT_EQ(t.select("cost", "none", "", -1, 0).size(), 6u);
}

TEST(ThetaSensitivity, AllRulesAndRanks) {
  ExperimentSpec spec = small_spec("theta-sensitivity");
  const ResultTable t = run_theta_sensitivity(spec);
  for (const char* rule : {"half_sum", "lambda_k", "one"}) {
    for (long long k : {20, 15}) {
      EXPECT_EQ(t.select("median_cost", "gamma", rule, k).size(), 9u) << rule << k;
      EXPECT_EQ(t.select("matvecs", "gamma", rule, k, 0).size(), 3u);
    }
  }
}

TEST(EigSensitivity, UnobservedDirectionsStayAtOne) {
  ExperimentSpec spec = small_spec("eig-sensitivity");
  spec.seeds = {1};
  spec.length_scales = {4.0};
  spec.diffusion_steps = {6};
  spec.n_eigs = 40;
  const ResultTable t = run_eig_sensitivity(spec);
  for (const char* label : {"D4_M10", "D6_M6"}) {
    const auto ev = t.select("eigenvalue", label);
    ASSERT_EQ(ev.size(), 40u) << label;
    for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_LE(ev[i], ev[i - 1] * (1 + 1e-12));
    for (std::size_t i = 30; i < ev.size(); ++i) EXPECT_NEAR(ev[i], 1.0, 1e-8) << label << " " << i;
    EXPECT_GT(ev[29], 1.0 + 1e-6);
  }
}

TEST(EigError, ErrorsAreNonNegativeAndMedianed) {
  ExperimentSpec spec = small_spec("eig-error");
  const ResultTable t = run_eig_error(spec);
  EXPECT_EQ(t.select("eigenvalue", "oracle").size(), 20u);
  for (double e : t.select("rel_error")) EXPECT_GE(e, 0.0);
  EXPECT_EQ(t.select("median_rel_error", "gamma").size(), 20u);
  EXPECT_EQ(t.select("rel_error", "psi", "", -1, 1).size(), 3u);
}

TEST(Outputs, CsvAndManifest) {
  ExperimentSpec spec = small_spec("control-lmp");
  spec.sketches = {SketchKind::Gaussian};
  spec.seeds = {1};
  const auto dir = std::filesystem::temp_directory_path() / "edasketch_outputs_test";
  std::filesystem::remove_all(dir);
  spec.out_dir = dir.string();
  const ResultTable t = run_control_lmp(spec);
  const std::string path = write_outputs(spec, t, 1.25);
  EXPECT_EQ(std::filesystem::path(path), dir / "control-lmp.csv");
  std::ifstream csv(path);
  std::stringstream buf;
  buf << csv.rdbuf();
  EXPECT_EQ(buf.str(), t.to_csv());

  std::ifstream mf(dir / "control-lmp.manifest.json");
  ASSERT_TRUE(mf.good());
  const nlohmann::json j = nlohmann::json::parse(mf);
  EXPECT_EQ(j.at("wall_seconds").get<double>(), 1.25);
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("build"));
  EXPECT_TRUE(nlohmann::json::parse(spec_to_json(spec)).contains("twin"));
  std::filesystem::remove_all(dir);
}

TEST(Validate, SmallTwinPasses) {
  const ValidationReport rep = run_validate(ExperimentSpec::for_experiment("validate"));
  EXPECT_TRUE(rep.passed);
  EXPECT_GT(rep.table.size(), 0u);
}
