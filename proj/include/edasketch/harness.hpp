#pragma once

#include "edasketch/eda.hpp"
#include "edasketch/krylov.hpp"
#include "edasketch/lmp.hpp"
#include "edasketch/nystrom.hpp"
#include "edasketch/sketch.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace edasketch {

/// Experiment identifiers accepted by run_experiment().
inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"eig-sensitivity", "eig-error",   "control-lmp",
                                            "theta-sensitivity", "ensemble-lmp", "validate"};
  return ids;
}

struct ExperimentSpec {
  std::string experiment = "control-lmp";
  TwinConfig twin;
  std::vector<std::uint64_t> seeds = default_seeds();
  std::vector<SketchKind> sketches{SketchKind::Gaussian, SketchKind::PowerA, SketchKind::BPsi,
                                   SketchKind::UbtPsi, SketchKind::RhsGamma};
  std::vector<ThetaRule> theta_rules{ThetaRule::HalfSum};
  std::vector<Index> ranks{20};  // k values; each <= sketch_width
  Index sketch_width = 20;       // l
  int pcg_iterations = 40;
  ShiftMode shift_mode = ShiftMode::None;

  // eig-sensitivity grids: D varies at the configured M, M varies at the
  // configured D.
  std::vector<double> length_scales{2.0, 4.0, 6.0, 8.0};
  std::vector<int> diffusion_steps{2, 6, 10, 14};
  int n_eigs = 160;
  int lanczos_steps = 0;  // 0 picks n_eigs + 40

  // Dense eigensolver oracle at or below this size, Lanczos above.
  Index dense_oracle_max_n = 400;

  std::string out_dir = "results";

  void validate() const;
  static std::vector<std::uint64_t> default_seeds();
  /// Defaults for one experiment id: theta-sensitivity and ensemble-lmp use
  /// the gamma sketch with k in {20, 15}; validate uses the small twin.
  static ExperimentSpec for_experiment(const std::string& id);
};

/// Long-format result row. Integer fields set to -1 are written empty.
struct ResultRow {
  std::string experiment;
  long long seed = -1;
  int member = -1;
  std::string variant;
  std::string theta_rule;
  long long k = -1;
  long long index = -1;
  std::string metric;
  double value = 0.0;
};

class ResultTable {
 public:
  static constexpr const char* kHeader = "experiment,seed,member,variant,theta_rule,k,index,metric,value";

  void add(ResultRow row) { rows_.push_back(std::move(row)); }
  void append(const ResultTable& other);
  const std::vector<ResultRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Rows matching all given fields (empty / -1 arguments match anything).
  std::vector<double> select(const std::string& metric, const std::string& variant = "",
                             const std::string& theta_rule = "", long long k = -1,
                             long long index = -1, long long seed = -2, int member = -2) const;

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;

 private:
  std::vector<ResultRow> rows_;
};

/// Shortest round-trip decimal representation used in CSV output.
std::string format_double(double v);

struct Summary {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(std::vector<double> values);

/// Sketching matrix and pass count for one variant: psi, b_psi and ubt_psi
/// use q = 1 on a transformed Gaussian block; a_psi uses q = 2 on Psi; gamma
/// uses q = 1 on the first `width` rhs differences of an ensemble drawn with
/// `seed`.
struct PreparedSketch {
  Matrix phi;
  int passes = 1;
};
PreparedSketch prepare_sketch(SketchKind kind, const std::shared_ptr<const Twin>& twin,
                              Index width, std::uint64_t seed);

/// Leading eigenvalues of I + A for a member, by dense assembly at small n
/// and Lanczos otherwise.
Vector oracle_eigenvalues(const HessianOperator& a, int count, Index dense_max_n,
                          std::uint64_t seed);

ResultTable run_eig_sensitivity(const ExperimentSpec& spec);
ResultTable run_eig_error(const ExperimentSpec& spec);
ResultTable run_control_lmp(const ExperimentSpec& spec);
ResultTable run_theta_sensitivity(const ExperimentSpec& spec);
ResultTable run_ensemble_lmp(const ExperimentSpec& spec);

struct ValidationReport {
  ResultTable table;
  bool passed = true;
};
/// Property and oracle checks on the small twin (n = 120 by default).
ValidationReport run_validate(const ExperimentSpec& spec);

ResultTable run_experiment(const ExperimentSpec& spec);

/// Writes <out_dir>/<experiment>.csv and <experiment>.manifest.json.
/// Returns the CSV path.
std::string write_outputs(const ExperimentSpec& spec, const ResultTable& table,
                          double wall_seconds);

std::string spec_to_json(const ExperimentSpec& spec);

}  // namespace edasketch
