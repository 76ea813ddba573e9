#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxyprox/outer.hpp"
#include "proxyprox/problem.hpp"
#include "proxyprox/problems.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// High-accuracy deterministic first-order solve: momentum (heavy-ball style
/// with function-value restarts) plus adaptive step halving, run until
/// ||grad L(w)|| <= tol. Throws UnconvergedError past 1e7 gradient
/// evaluations, carrying the best point found.
ReferenceSolution solve_reference(const FunctionOracle& oracle, double mu,
                                  double tol);

/// Disk-cached wrapper keyed by `cache_key` (dataset hash + regularizer, by
/// convention). Cached certificates are re-verified against the oracle before
/// use, so a stale or foreign cache entry falls back to a fresh solve.
/// Cache directory: $PROXYPROX_CACHE_DIR, else .proxyprox_cache/ in the cwd.
ReferenceSolution solve_reference_cached(const FunctionOracle& oracle,
                                         double mu, double tol,
                                         const std::string& cache_key);

/// Everything a `proxyprox run` needs: problem descriptor, proxy kind,
/// algorithm, outer configuration, replicate count, output path. Parsed from
/// a JSON document or a flat key=value text file.
struct ExperimentSpec {
  std::string experiment_id = "experiment";

  // problem
  std::string problem_kind = "logistic";  // logistic | least_squares |
                                          // quadratic | nonconvex
  std::string dataset;                    // path, resolved via find_dataset
  std::string scaling = "unit_columns";
  double reg_mu = 0.0;
  double reg_mu_rel_H = -1.0;  // >= 0: reg_mu = rel * H of the unregularized loss
  long long synth_d = 20;
  double synth_mu = 1.0;
  double synth_cond = 1e3;
  double proxy_alpha = 0.0;     // quadratic testbed proxy (1-alpha) A
  double noise_sigma2 = 0.0;    // additive Gaussian noise (synthetic problems)
  double nc_amplitude = 0.5;
  double nc_frequency = 2.0;
  std::uint64_t problem_seed = 1;

  // proxy (dataset problems)
  std::string proxy = "random_label";  // zero | covariance | label_free |
                                       // random_label | subsample
  long long subsample_m = 0;

  // algorithm + outer loop
  std::string algorithm = "proxyprox";  // proxyprox | sgd
  std::string mode = "convex";          // strongly_convex | convex | nonconvex
  double eta = 0.0;
  std::vector<double> eta_grid;  // grid search, selection by loss after
  long long grid_steps = 250;    // `grid_steps` outer steps
  long long K = 1000;
  double G2 = 0.0;
  bool G2_auto = false;  // derive G2 (and eta when 0) from the schedules
  double epsilon = 0.0;
  long long batch_size = 1;
  std::string inner_solver = "gd";  // gd | sgd | exact
  long long inner_max_steps = 10000;
  long long inner_check_every = 10;
  double inner_step_size = 0.0;
  std::string policy = "warn";  // warn | abort
  bool certified = false;
  double regularize_mu = 0.0;  // > 0: run on regularize_pair(problem, mu, w0)
  std::string w0 = "zero";     // zero | gaussian:<scale>

  long long replicates = 1;
  std::uint64_t seed = 0;
  std::string output = "out";
  bool compute_reference = true;

  static ExperimentSpec parse_file(const std::string& path);
  static ExperimentSpec parse_text(const std::string& text);
};

struct BuiltProblem {
  ProblemInstance problem;
  Vector w0;
};

/// Instantiates the problem described by the spec (datasets resolved through
/// PROXYPROX_DATA_DIR, reference solution attached when requested).
BuiltProblem build_problem(const ExperimentSpec& spec);

struct ExperimentResult {
  std::vector<RunTrace> traces;
  ProblemInstance problem;
  double eta_used = 0.0;
  double G2_used = 0.0;
  std::filesystem::path trace_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path sidecar_json;
};

/// Executes R seeded replicates (grid-searching eta first when a grid is
/// given), writes the per-replicate trace CSV, the aggregate CSV keyed by
/// objective_grad_draws, and the JSON metadata sidecar.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct BoundRow {
  long long K;
  double empirical;
  double rhs;
  double stderr_mean;
  bool pass;  // empirical <= rhs + 2 stderr
};

struct BoundReport {
  int theorem = 0;
  std::vector<BoundRow> rows;
  bool all_pass = true;
};

/// Checks the stated guarantee against replicate traces.
///   theorem 1: suboptimality of the weighted average, every k = 1..K.
///   theorem 2: suboptimality of the uniform average at the final K
///              (traces may mix several K configurations).
///   theorem 3: average squared gradient norm, certified traces.
/// The problem instance supplies B^2, sigma^2, mu, delta and the reference.
/// Violated preconditions (eta > 1/(4 delta)) raise ConfigError instead of
/// producing a failed report.
BoundReport check_bound(const std::vector<RunTrace>& traces, int theorem,
                        const ProblemInstance& problem);

/// File-based variant for `proxyprox check-bound`: reads the sidecar JSON
/// written by run_experiment.
BoundReport check_bound_dir(const std::filesystem::path& traces_dir,
                            int theorem);

void print_bound_report(std::ostream& os, const BoundReport& report);

}  // namespace proxyprox
