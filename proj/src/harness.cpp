#include "edasketch/harness.hpp"

#include "edasketch/parallel.hpp"
#include "edasketch/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#ifndef EDASKETCH_GIT_REVISION
#define EDASKETCH_GIT_REVISION "unknown"
#endif

namespace edasketch {

// ---------------------------------------------------------------------------
// Spec and result table
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> ExperimentSpec::default_seeds() {
  std::vector<std::uint64_t> s(20);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i + 1;
  return s;
}

ExperimentSpec ExperimentSpec::for_experiment(const std::string& id) {
  ExperimentSpec spec;
  spec.experiment = id;
  if (id == "theta-sensitivity") {
    spec.sketches = {SketchKind::RhsGamma};
    spec.theta_rules = {ThetaRule::HalfSum, ThetaRule::LambdaK, ThetaRule::One};
    spec.ranks = {20, 15};
  } else if (id == "ensemble-lmp") {
    spec.sketches = {SketchKind::RhsGamma};
    spec.theta_rules = {ThetaRule::HalfSum, ThetaRule::LambdaK};
    spec.ranks = {20, 15};
  } else if (id == "validate") {
    spec.twin = TwinConfig::small();
    spec.seeds = {1};
  }
  return spec;
}

void ExperimentSpec::validate() const {
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), experiment) == ids.end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (sketch_width < 1) throw ConfigError("sketch width must be >= 1");
  for (Index k : ranks) {
    if (k < 1 || k > sketch_width) throw ConfigError("each k must satisfy 1 <= k <= sketch width");
  }
  if (ranks.empty()) throw ConfigError("rank list is empty");
  if (pcg_iterations < 1) throw ConfigError("PCG iteration budget must be >= 1");
  if (theta_rules.empty()) throw ConfigError("theta rule list is empty");
  if (sketches.empty()) throw ConfigError("sketch list is empty");
  if (n_eigs < 1) throw ConfigError("n_eigs must be >= 1");
  twin.validate();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ResultTable::append(const ResultTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::vector<double> ResultTable::select(const std::string& metric, const std::string& variant,
                                        const std::string& theta_rule, long long k,
                                        long long index, long long seed, int member) const {
  std::vector<double> out;
  for (const auto& r : rows_) {
    if (r.metric != metric) continue;
    if (!variant.empty() && r.variant != variant) continue;
    if (!theta_rule.empty() && r.theta_rule != theta_rule) continue;
    if (k >= 0 && r.k != k) continue;
    if (index >= 0 && r.index != index) continue;
    if (seed != -2 && r.seed != seed) continue;
    if (member != -2 && r.member != member) continue;
    out.push_back(r.value);
  }
  return out;
}

void ResultTable::write_csv(std::ostream& os) const {
  const auto opt = [](long long v) { return v < 0 ? std::string() : std::to_string(v); };
  os << kHeader << '\n';
  for (const auto& r : rows_) {
    os << r.experiment << ',' << opt(r.seed) << ',' << opt(r.member) << ',' << r.variant << ','
       << r.theta_rule << ',' << opt(r.k) << ',' << opt(r.index) << ',' << r.metric << ','
       << format_double(r.value) << '\n';
  }
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw ConfigError("summarize: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  Summary s;
  s.min = values.front();
  s.max = values.back();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

// ---------------------------------------------------------------------------
// Shared building blocks
// ---------------------------------------------------------------------------

PreparedSketch prepare_sketch(SketchKind kind, const std::shared_ptr<const Twin>& twin,
                              Index width, std::uint64_t seed) {
  const Index n = twin->cfg.model.n;
  const CovarianceFactor& ub = twin->ctx->ub;
  switch (kind) {
    case SketchKind::Gaussian:
      return {sketch_gaussian(n, width, seed).columns, 1};
    case SketchKind::PowerA:
      return {sketch_gaussian(n, width, seed).columns, 2};
    case SketchKind::BPsi:
      return {sketch_b(ub, sketch_gaussian(n, width, seed)).columns, 1};
    case SketchKind::UbtPsi:
      return {sketch_ubt(ub, sketch_gaussian(n, width, seed)).columns, 1};
    case SketchKind::RhsGamma: {
      if (width > twin->cfg.members) {
        throw ConfigError("gamma sketch width exceeds the number of perturbed members");
      }
      const EnsembleSetup ens = make_members(twin, seed, Linearization::OwnBackground,
                                             static_cast<int>(width));
      return {ens.gamma.columns, 1};
    }
  }
  throw ConfigError("prepare_sketch: unknown kind");
}

Vector oracle_eigenvalues(const HessianOperator& a, int count, Index dense_max_n,
                          std::uint64_t seed) {
  const IdentityPlus system(a);
  if (a.size() <= dense_max_n) {
    Matrix m = assemble(system);
    m = 0.5 * (m + m.transpose());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
    return ev.reverse().head(std::min<Index>(count, ev.size()));
  }
  return lanczos_eigs(system, count + 40, count, seed).values;
}

namespace {

EigenApproximation truncate(const EigenApproximation& full, Index k) {
  EigenApproximation out = full;
  out.vectors = full.vectors.leftCols(k);
  out.values = full.values.head(k);
  return out;
}

struct CellTrace {
  std::vector<double> cost;
  std::vector<double> matvecs;
};

CellTrace run_pcg(const MemberProblem& member, const AssimContext& ctx, const SpectralLmp* lmp,
                  int iterations, std::size_t setup_matvecs) {
  const HessianOperator a(member, ctx);
  const IdentityPlus system(a);
  SolverConfig cfg;
  cfg.max_iters = iterations;
  std::optional<LmpPreconditioner> precond;
  if (lmp) precond.emplace(*lmp);
  const SolveResult res =
      pcg(system, member.rhs, precond ? &*precond : nullptr, cfg, member, ctx);
  CellTrace out;
  for (const auto& rec : res.trace.records) {
    out.cost.push_back(rec.cost);
    out.matvecs.push_back(static_cast<double>(rec.matvecs + setup_matvecs));
  }
  return out;
}

void add_trace_rows(ResultTable& table, const ResultRow& base, const CellTrace& trace) {
  for (std::size_t i = 0; i < trace.cost.size(); ++i) {
    ResultRow r = base;
    r.index = static_cast<long long>(i);
    r.metric = "cost";
    r.value = trace.cost[i];
    table.add(r);
    r.metric = "matvecs";
    r.value = trace.matvecs[i];
    table.add(std::move(r));
  }
}

// Median/min/max over a set of equal-length traces, one row per index.
void add_envelope_rows(ResultTable& table, const ResultRow& base, const std::string& prefix,
                       const std::vector<std::vector<double>>& traces) {
  if (traces.empty()) return;
  std::size_t len = traces.front().size();
  for (const auto& t : traces) len = std::min(len, t.size());
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<double> column;
    for (const auto& t : traces) column.push_back(t[i]);
    const Summary s = summarize(column);
    for (const auto& [name, value] :
         {std::pair{"median_", s.median}, std::pair{"min_", s.min}, std::pair{"max_", s.max}}) {
      ResultRow r = base;
      r.index = static_cast<long long>(i);
      r.metric = std::string(name) + prefix;
      r.value = value;
      table.add(std::move(r));
    }
  }
}

std::string grid_label(double d, int m) {
  return "D" + format_double(d) + "_M" + std::to_string(m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

ResultTable run_eig_sensitivity(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::pair<double, int>> grid;
  for (double d : spec.length_scales) grid.emplace_back(d, spec.twin.diffusion_steps);
  for (int m : spec.diffusion_steps) {
    const std::pair<double, int> cell{spec.twin.length_scale, m};
    if (std::find(grid.begin(), grid.end(), cell) == grid.end()) grid.push_back(cell);
  }

  std::vector<ResultTable> parts(grid.size());
  const int steps = spec.lanczos_steps > 0 ? spec.lanczos_steps : spec.n_eigs + 40;
  parallel_for(grid.size(), [&](std::size_t c) {
    TwinConfig cfg = spec.twin;
    cfg.length_scale = grid[c].first;
    cfg.diffusion_steps = grid[c].second;
    const auto twin = make_twin(cfg);
    const HessianOperator a(twin->control, *twin->ctx);
    const IdentityPlus system(a);
    const LanczosResult lz = lanczos_eigs(system, steps, spec.n_eigs, spec.seeds.front());

    ResultRow base{"eig-sensitivity", static_cast<long long>(cfg.seed), -1,
                   grid_label(cfg.length_scale, cfg.diffusion_steps)};
    for (Index i = 0; i < lz.values.size(); ++i) {
      ResultRow r = base;
      r.index = i + 1;
      r.metric = "eigenvalue";
      r.value = lz.values[i];
      parts[c].add(r);
      r.metric = "residual";
      r.value = lz.residuals[i];
      parts[c].add(std::move(r));
    }
    ResultRow r = base;
    r.metric = "lanczos_steps";
    r.value = lz.steps;
    parts[c].add(std::move(r));
  });

  ResultTable out;
  for (const auto& p : parts) out.append(p);
  return out;
}

ResultTable run_eig_error(const ExperimentSpec& spec) {
  spec.validate();
  const auto twin = make_twin(spec.twin);
  const AssimContext& ctx = *twin->ctx;
  const Index width = spec.sketch_width;
  const Index k = *std::max_element(spec.ranks.begin(), spec.ranks.end());

  const HessianOperator control(twin->control, ctx);
  const Vector oracle = oracle_eigenvalues(control, static_cast<int>(k), spec.dense_oracle_max_n,
                                           spec.seeds.front());

  const std::size_t nk = spec.sketches.size();
  const std::size_t cells = spec.seeds.size() * nk;
  std::vector<Vector> errors(cells);
  std::vector<Vector> approx(cells);
  parallel_for(cells, [&](std::size_t c) {
    const std::uint64_t seed = spec.seeds[c / nk];
    const SketchKind kind = spec.sketches[c % nk];
    const PreparedSketch sk = prepare_sketch(kind, twin, width, seed);
    NystromConfig ncfg;
    ncfg.rank = k;
    ncfg.passes = sk.passes;
    ncfg.shift_mode = spec.shift_mode;
    const HessianOperator a(twin->control, ctx);
    const EigenApproximation ev = nystrom_evd(a, sk.phi, ncfg);
    approx[c] = ev.values.array() + 1.0;
    errors[c] = ((oracle.array() - approx[c].array()).abs() / oracle.array()).matrix();
  });

  ResultTable out;
  for (Index i = 0; i < oracle.size(); ++i) {
    out.add({"eig-error", -1, -1, "oracle", "", k, i + 1, "eigenvalue", oracle[i]});
  }
  for (std::size_t c = 0; c < cells; ++c) {
    const auto seed = static_cast<long long>(spec.seeds[c / nk]);
    const std::string variant = to_string(spec.sketches[c % nk]);
    for (Index i = 0; i < errors[c].size(); ++i) {
      out.add({"eig-error", seed, -1, variant, "", k, i + 1, "eigenvalue", approx[c][i]});
      out.add({"eig-error", seed, -1, variant, "", k, i + 1, "rel_error", errors[c][i]});
    }
  }
  for (std::size_t j = 0; j < nk; ++j) {
    const std::string variant = to_string(spec.sketches[j]);
    for (Index i = 0; i < k; ++i) {
      std::vector<double> col;
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) col.push_back(errors[s * nk + j][i]);
      out.add({"eig-error", -1, -1, variant, "", k, i + 1, "median_rel_error",
               summarize(col).median});
    }
  }
  return out;
}

ResultTable run_control_lmp(const ExperimentSpec& spec) {
  spec.validate();
  const auto twin = make_twin(spec.twin);
  const AssimContext& ctx = *twin->ctx;
  const Index width = spec.sketch_width;
  const ThetaRule rule = spec.theta_rules.front();
  const Index k = spec.ranks.front();
  const std::string rule_name = to_string(rule);

  ResultTable out;
  const CellTrace baseline = run_pcg(twin->control, ctx, nullptr, spec.pcg_iterations, 0);
  add_trace_rows(out, {"control-lmp", -1, 0, "none", "", -1}, baseline);

  const std::size_t nk = spec.sketches.size();
  const std::size_t cells = spec.seeds.size() * nk;
  std::vector<CellTrace> traces(cells);
  std::vector<std::array<double, 3>> info(cells);  // theta, lambda_k(I+A), shift
  parallel_for(cells, [&](std::size_t c) {
    const std::uint64_t seed = spec.seeds[c / nk];
    const SketchKind kind = spec.sketches[c % nk];
    const PreparedSketch sk = prepare_sketch(kind, twin, width, seed);
    NystromConfig ncfg;
    ncfg.rank = k;
    ncfg.passes = sk.passes;
    ncfg.shift_mode = spec.shift_mode;
    const HessianOperator a(twin->control, ctx);
    const EigenApproximation ev = nystrom_evd(a, sk.phi, ncfg);
    const SpectralLmp lmp(ev, rule);
    // Each pass is one batched (parallel-column) product with A.
    traces[c] = run_pcg(twin->control, ctx, &lmp, spec.pcg_iterations,
                        static_cast<std::size_t>(sk.passes));
    info[c] = {lmp.theta(), 1.0 + ev.values[k - 1], ev.shift};
  });

  for (std::size_t c = 0; c < cells; ++c) {
    const auto seed = static_cast<long long>(spec.seeds[c / nk]);
    const std::string variant = to_string(spec.sketches[c % nk]);
    const ResultRow base{"control-lmp", seed, 0, variant, rule_name, k};
    add_trace_rows(out, base, traces[c]);
    for (const auto& [name, value] : {std::pair{"theta", info[c][0]},
                                      std::pair{"lambda_k", info[c][1]},
                                      std::pair{"shift", info[c][2]}}) {
      ResultRow r = base;
      r.metric = name;
      r.value = value;
      out.add(std::move(r));
    }
  }
  for (std::size_t j = 0; j < nk; ++j) {
    std::vector<std::vector<double>> cost;
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) cost.push_back(traces[s * nk + j].cost);
    add_envelope_rows(out, {"control-lmp", -1, 0, to_string(spec.sketches[j]), rule_name, k},
                      "cost", cost);
    // The matvec axis is seed-independent: setup passes plus iterations.
    const CellTrace& first = traces[j];
    for (std::size_t i = 0; i < first.matvecs.size(); ++i) {
      out.add({"control-lmp", -1, 0, to_string(spec.sketches[j]), rule_name, k,
               static_cast<long long>(i), "median_matvecs", first.matvecs[i]});
    }
  }
  return out;
}

ResultTable run_theta_sensitivity(const ExperimentSpec& spec) {
  spec.validate();
  const auto twin = make_twin(spec.twin);
  const AssimContext& ctx = *twin->ctx;
  const Index width = spec.sketch_width;

  ResultTable out;
  const CellTrace baseline = run_pcg(twin->control, ctx, nullptr, spec.pcg_iterations, 0);
  add_trace_rows(out, {"theta-sensitivity", -1, 0, "none", "", -1}, baseline);

  // One Nystrom run per seed; k < l variants drop trailing pairs.
  std::vector<EigenApproximation> approx(spec.seeds.size());
  parallel_for(spec.seeds.size(), [&](std::size_t s) {
    const PreparedSketch sk = prepare_sketch(SketchKind::RhsGamma, twin, width, spec.seeds[s]);
    NystromConfig ncfg;
    ncfg.rank = width;
    ncfg.passes = sk.passes;
    ncfg.shift_mode = spec.shift_mode;
    const HessianOperator a(twin->control, ctx);
    approx[s] = nystrom_evd(a, sk.phi, ncfg);
  });

  const std::size_t nr = spec.theta_rules.size(), nq = spec.ranks.size();
  const std::size_t per_seed = nr * nq;
  const std::size_t cells = spec.seeds.size() * per_seed;
  std::vector<CellTrace> traces(cells);
  parallel_for(cells, [&](std::size_t c) {
    const std::size_t s = c / per_seed;
    const ThetaRule rule = spec.theta_rules[(c % per_seed) / nq];
    const Index k = spec.ranks[c % nq];
    const SpectralLmp lmp(truncate(approx[s], k), rule);
    traces[c] = run_pcg(twin->control, ctx, &lmp, spec.pcg_iterations, 1);
  });

  for (std::size_t c = 0; c < cells; ++c) {
    const auto seed = static_cast<long long>(spec.seeds[c / (per_seed)]);
    const std::string rule = to_string(spec.theta_rules[(c % per_seed) / nq]);
    const Index k = spec.ranks[c % nq];
    add_trace_rows(out, {"theta-sensitivity", seed, 0, "gamma", rule, k}, traces[c]);
  }
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t q = 0; q < nq; ++q) {
      std::vector<std::vector<double>> cost;
      for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
        cost.push_back(traces[s * per_seed + r * nq + q].cost);
      }
      add_envelope_rows(out, {"theta-sensitivity", -1, 0, "gamma", to_string(spec.theta_rules[r]),
                              spec.ranks[q]},
                        "cost", cost);
    }
  }
  return out;
}

ResultTable run_ensemble_lmp(const ExperimentSpec& spec) {
  spec.validate();
  const auto twin = make_twin(spec.twin);
  const AssimContext& ctx = *twin->ctx;
  const Index width = spec.sketch_width;
  if (width > spec.twin.members) throw ConfigError("sketch width exceeds the number of members");

  ResultTable out;
  for (const std::uint64_t seed : spec.seeds) {
    // The ensemble supplies both the gamma sketch and the problems to solve.
    const EnsembleSetup ens = make_members(twin, seed);
    const Matrix phi = ens.gamma.columns.leftCols(width);
    NystromConfig ncfg;
    ncfg.rank = width;
    ncfg.shift_mode = spec.shift_mode;
    const HessianOperator control(twin->control, ctx);
    const EigenApproximation full = nystrom_evd(control, phi, ncfg);

    const std::size_t nm = ens.members.size();
    std::vector<CellTrace> plain(nm);
    parallel_for(nm, [&](std::size_t j) {
      plain[j] = run_pcg(ens.members[j], ctx, nullptr, spec.pcg_iterations, 0);
    });

    const std::size_t nr = spec.theta_rules.size(), nq = spec.ranks.size();
    const std::size_t variants = nr * nq;
    std::vector<CellTrace> pre(variants * nm);
    parallel_for(pre.size(), [&](std::size_t c) {
      const std::size_t v = c / nm, j = c % nm;
      const SpectralLmp lmp(truncate(full, spec.ranks[v % nq]), spec.theta_rules[v / nq]);
      pre[c] = run_pcg(ens.members[j], ctx, &lmp, spec.pcg_iterations, 1);
    });

    const auto sseed = static_cast<long long>(seed);
    for (std::size_t j = 0; j < nm; ++j) {
      const ResultRow base{"ensemble-lmp", sseed, ens.members[j].id, "none", "", -1};
      add_trace_rows(out, base, plain[j]);
    }
    for (std::size_t v = 0; v < variants; ++v) {
      const std::string rule = to_string(spec.theta_rules[v / nq]);
      const Index k = spec.ranks[v % nq];
      std::vector<std::vector<double>> ratios;
      for (std::size_t j = 0; j < nm; ++j) {
        const CellTrace& t = pre[v * nm + j];
        const ResultRow base{"ensemble-lmp", sseed, ens.members[j].id, "gamma", rule, k};
        add_trace_rows(out, base, t);
        std::vector<double> ratio(t.cost.size());
        for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = plain[j].cost[i] / t.cost[i];
        for (std::size_t i = 0; i < ratio.size(); ++i) {
          ResultRow r = base;
          r.index = static_cast<long long>(i);
          r.metric = "ratio";
          r.value = ratio[i];
          out.add(std::move(r));
        }
        ratios.push_back(std::move(ratio));
      }
      add_envelope_rows(out, {"ensemble-lmp", sseed, -1, "gamma", rule, k}, "ratio", ratios);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

namespace {

struct Check {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

Check check_adjoint(const Twin& twin) {
  const TwinConfig& cfg = twin.cfg;
  double worst = 0.0;
  for (int window = 1; window <= cfg.model.n_steps; ++window) {
    ModelConfig mc = cfg.model;
    mc.n_steps = window;
    const ObsNetwork net =
        ObsNetwork::uniform(mc.n, cfg.obs_vars, window, std::min(cfg.obs_times, window));
    const Trajectory traj = integrate(twin.background, mc);
    for (int pair = 0; pair < 100; ++pair) {
      Substream rng(cfg.seed, Stream::Probe, static_cast<std::uint64_t>(window * 1000 + pair));
      const Vector v = rng.normal_vector(mc.n);
      const Vector w = rng.normal_vector(net.p());
      const double lhs = gop_tlm(traj, v, net).dot(w);
      const double rhs = v.dot(gop_adjoint(traj, w, net));
      worst = std::max(worst, std::abs(lhs - rhs) / (v.norm() * w.norm()));
    }
  }
  return {"adjoint_identity", worst, 1e-10, worst <= 1e-10};
}

Check check_taylor(const Twin& twin) {
  const TwinConfig& cfg = twin.cfg;
  const ObsNetwork& net = twin.ctx->net;
  const Trajectory traj = integrate(twin.background, cfg.model);
  Substream rng(cfg.seed, Stream::Probe, 999999);
  const Vector v = rng.normal_vector(cfg.model.n);
  const ObsVector g0 = gop_nonlinear(twin.background, net, cfg.model);
  const ObsVector gv = gop_tlm(traj, v, net);
  std::vector<double> err;
  for (double eps = 1e-2; eps >= 0.99e-5; eps /= 2.0) {
    err.push_back((gop_nonlinear(twin.background + eps * v, net, cfg.model) - g0 - eps * gv).norm());
  }
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) {
    const double ratio = err[i] / err[i + 1];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  // Report the worst distance from the [3.5, 4.5] band's centre.
  const bool ok = lo >= 3.5 && hi <= 4.5;
  return {"taylor_ratio", std::abs(lo - 4.0) > std::abs(hi - 4.0) ? lo : hi, 4.0, ok};
}

Check check_nystrom_exact(std::uint64_t seed) {
  const Index n = 50, l = 10;
  double worst = 0.0;
  for (Index r : {Index{10}, Index{6}, Index{3}}) {
    Substream rng(seed, Stream::Probe, 5000 + static_cast<std::uint64_t>(r));
    const Matrix f = rng.normal_matrix(n, r);
    const Matrix a = f * f.transpose();
    const DenseOperator op(a);
    NystromConfig cfg;
    cfg.rank = l;
    cfg.shift_mode = r == l ? ShiftMode::None : ShiftMode::EpsFrobY;
    const Matrix phi = sketch_gaussian(n, l, seed + 17).columns;
    const EigenApproximation ev = nystrom_evd(op, phi, cfg);
    worst = std::max(worst, (ev.reconstruct() - a).norm() / a.norm());
  }
  return {"nystrom_exactness", worst, 1e-8, worst <= 1e-8};
}

Check check_spectrum_surgery(const Matrix& i_plus_a) {
  const Index n = i_plus_a.rows();
  const Index k = 10;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(i_plus_a);
  const Vector lam = eig.eigenvalues().reverse();
  const Matrix vecs = eig.eigenvectors().rowwise().reverse();
  const SpectralLmp lmp(vecs.leftCols(k), (lam.head(k).array() - 1.0).matrix(),
                        choose_theta(ThetaRule::HalfSum, lam[k - 1]));
  Matrix u(n, n);
  for (Index j = 0; j < n; ++j) u.col(j) = lmp.apply_u(Vector::Unit(n, j));
  Matrix pre = u * i_plus_a * u.transpose();
  pre = 0.5 * (pre + pre.transpose());
  Vector got = Eigen::SelfAdjointEigenSolver<Matrix>(pre, Eigen::EigenvaluesOnly).eigenvalues();
  Vector want(n);
  want.head(k).setConstant(lmp.theta());
  want.tail(n - k) = lam.tail(n - k);
  std::sort(want.data(), want.data() + n);
  const double err =
      ((got - want).array().abs() / want.array().abs().max(1.0)).maxCoeff();
  return {"lmp_spectrum_surgery", err, 1e-8, err <= 1e-8};
}

std::vector<Check> check_rank_structure(const Matrix& i_plus_a, Index p) {
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(i_plus_a, Eigen::EigenvaluesOnly).eigenvalues();
  const auto above = static_cast<double>((ev.array() > 1.0 + 1e-8).count());
  const double floor_err = std::abs(ev.minCoeff() - 1.0);
  return {{"eigenvalues_above_one", above, static_cast<double>(p), above <= static_cast<double>(p)},
          {"smallest_eigenvalue_offset", floor_err, 1e-10, floor_err <= 1e-10}};
}

Check check_gamma_covariance(const std::shared_ptr<const Twin>& twin, const Matrix& a_dense,
                             int draws, std::uint64_t seed) {
  const EnsembleSetup ens = shared_linearization_mode(twin, seed, draws);
  const Matrix& g = ens.gamma.columns;
  const Vector mean = g.rowwise().mean();
  const Matrix centred = g.colwise() - mean;
  const Matrix cov = centred * centred.transpose() / static_cast<double>(draws - 1);
  const Matrix target = a_dense + a_dense * a_dense;
  const auto spectral = [](const Matrix& m) {
    const Matrix s = 0.5 * (m + m.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .cwiseAbs()
        .maxCoeff();
  };
  const double err = spectral(cov - target) / spectral(target);
  return {"gamma_covariance", err, 0.2, err <= 0.2};
}

Check check_pcg_solution(const Twin& twin, const Matrix& i_plus_a) {
  const Index n = i_plus_a.rows();
  const HessianOperator a(twin.control, *twin.ctx);
  const IdentityPlus system(a);
  SolverConfig cfg;
  cfg.max_iters = static_cast<int>(n);
  cfg.residual_rtol = 1e-13;
  cfg.trace_cost = false;
  const SolveResult res = pcg(system, twin.control.rhs, nullptr, cfg);
  const Vector exact = i_plus_a.llt().solve(twin.control.rhs);
  const double err = (res.solution - exact).norm() / exact.norm();
  return {"pcg_dense_solution", err, 1e-8, err <= 1e-8};
}

}  // namespace

ValidationReport run_validate(const ExperimentSpec& spec) {
  spec.twin.validate();
  const auto twin = make_twin(spec.twin);
  const std::uint64_t seed = spec.seeds.front();

  const HessianOperator a(twin->control, *twin->ctx);
  Matrix a_dense = assemble(a);
  a_dense = 0.5 * (a_dense + a_dense.transpose());
  const Matrix i_plus_a = Matrix::Identity(a_dense.rows(), a_dense.cols()) + a_dense;

  std::vector<Check> checks;
  checks.push_back(check_adjoint(*twin));
  checks.push_back(check_taylor(*twin));
  checks.push_back(check_nystrom_exact(seed));
  checks.push_back(check_spectrum_surgery(i_plus_a));
  for (auto& c : check_rank_structure(i_plus_a, twin->ctx->net.p())) checks.push_back(c);
  checks.push_back(check_gamma_covariance(twin, a_dense, 2000, seed));
  checks.push_back(check_pcg_solution(*twin, i_plus_a));

  ValidationReport report;
  for (const auto& c : checks) {
    report.table.add({"validate", static_cast<long long>(seed), -1, c.name, "", -1, -1, "value", c.value});
    report.table.add({"validate", static_cast<long long>(seed), -1, c.name, "", -1, -1, "threshold", c.threshold});
    report.table.add({"validate", static_cast<long long>(seed), -1, c.name, "", -1, -1, "pass", c.passed ? 1.0 : 0.0});
    report.passed = report.passed && c.passed;
  }
  return report;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  if (spec.experiment == "eig-sensitivity") return run_eig_sensitivity(spec);
  if (spec.experiment == "eig-error") return run_eig_error(spec);
  if (spec.experiment == "control-lmp") return run_control_lmp(spec);
  if (spec.experiment == "theta-sensitivity") return run_theta_sensitivity(spec);
  if (spec.experiment == "ensemble-lmp") return run_ensemble_lmp(spec);
  if (spec.experiment == "validate") return run_validate(spec).table;
  throw ConfigError("unknown experiment '" + spec.experiment + "'");
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string spec_to_json(const ExperimentSpec& spec) {
  using nlohmann::json;
  const TwinConfig& t = spec.twin;
  json j;
  j["experiment"] = spec.experiment;
  j["twin"] = {{"n", t.model.n},
               {"forcing", t.model.forcing},
               {"dt", t.model.dt},
               {"window_steps", t.model.n_steps},
               {"obs_vars", t.obs_vars},
               {"obs_times", t.obs_times},
               {"obs_strided", t.obs_strided},
               {"sigma_o", t.sigma_o},
               {"sigma_b", t.sigma_b},
               {"length_scale", t.length_scale},
               {"diffusion_steps", t.diffusion_steps},
               {"members", t.members},
               {"spinup_steps", t.spinup_steps},
               {"spinup_perturbation", t.spinup_perturbation},
               {"seed", t.seed}};
  j["seeds"] = spec.seeds;
  std::vector<std::string> sketches, rules;
  for (auto s : spec.sketches) sketches.push_back(to_string(s));
  for (auto r : spec.theta_rules) rules.push_back(to_string(r));
  j["sketches"] = sketches;
  j["theta_rules"] = rules;
  j["ranks"] = spec.ranks;
  j["sketch_width"] = spec.sketch_width;
  j["pcg_iterations"] = spec.pcg_iterations;
  j["shift_mode"] = to_string(spec.shift_mode);
  j["length_scales"] = spec.length_scales;
  j["diffusion_steps_grid"] = spec.diffusion_steps;
  j["n_eigs"] = spec.n_eigs;
  j["lanczos_steps"] = spec.lanczos_steps;
  return j.dump(2);
}

std::string write_outputs(const ExperimentSpec& spec, const ResultTable& table,
                          double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  const fs::path csv = fs::path(spec.out_dir) / (spec.experiment + ".csv");
  {
    std::ofstream os(csv, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + csv.string());
    table.write_csv(os);
  }

  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(spec_to_json(spec));
  manifest["output"] = csv.filename().string();
  manifest["rows"] = table.size();
  manifest["build"] = {{"git_revision", EDASKETCH_GIT_REVISION},
                       {"compiler", __VERSION__},
#ifdef NDEBUG
                       {"assertions", false},
#else
                       {"assertions", true},
#endif
                       {"cxx_standard", __cplusplus}};
  manifest["threads"] = worker_count();
  manifest["wall_seconds"] = wall_seconds;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  manifest["timestamp"] = stamp;

  const fs::path man = fs::path(spec.out_dir) / (spec.experiment + ".manifest.json");
  std::ofstream ms(man);
  if (!ms) throw std::runtime_error("cannot write " + man.string());
  ms << manifest.dump(2) << '\n';
  return csv.string();
}

}  // namespace edasketch
