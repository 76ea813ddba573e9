#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "proxyprox/inner_solvers.hpp"
#include "proxyprox/problem.hpp"
#include "proxyprox/subproblem.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

enum class InnerSolverKind { exact_quadratic, gd, sgd };

enum class FailurePolicy { abort, warn };

struct OuterConfig {
  double eta = 0.0;
  long long K = 0;
  Mode mode = Mode::strongly_convex;
  double G2 = 0.0;
  InnerConfig inner;
  InnerSolverKind solver = InnerSolverKind::gd;
  Vector w0;
  double epsilon = 0.0;     // target accuracy, consumed by the schedules
  std::uint64_t seed = 0;
  FailurePolicy policy = FailurePolicy::abort;
  bool certified = false;   // nonconvex: log full gradients, criterion uses them
  long long batch_size = 1; // samples per stochastic draw (budget-axis scale)
};

/// Per-iteration record backing every bound check. iterates holds w_0..w_K;
/// the per-step vectors are indexed by k = 1..K.
struct RunTrace {
  OuterConfig cfg;
  std::vector<Vector> iterates;
  std::vector<double> objective_values;  // L(w_k), k = 0..K, diagnostics
  std::vector<double> criterion_lhs;
  std::vector<double> criterion_rhs;
  std::vector<char> criterion_ok;
  std::vector<double> movement;  // ||w_{k+1} - w_k||^2
  std::vector<std::uint64_t> objective_grad_draws;  // cumulative draws
  std::vector<std::uint64_t> proxy_grads;           // cumulative
  std::vector<double> grad_sq_norms;  // ||grad L(w_k)||^2, certified runs
  Vector averaged_iterate;  // mode-dependent report point; empty for nonconvex
  double B2 = std::numeric_limits<double>::quiet_NaN();
};

/// An inner solve missed its criterion under FailurePolicy::abort.
struct CriterionFailure : Error {
  CriterionFailure(long long k, double lhs, double rhs, const std::string& what)
      : Error(what), k(k), lhs(lhs), rhs(rhs) {}
  long long k;
  double lhs, rhs;
};

/// The outer loop: draw g_k, build the subproblem at w_k, hand it to the
/// configured inner solver under the mode's criterion, record everything.
RunTrace proxyprox_run(const ProblemInstance& problem, const OuterConfig& cfg);

/// Plain SGD w_{k+1} = w_k - eta g_k with the same trace schema and
/// gradient-budget accounting.
RunTrace sgd_baseline(const ProblemInstance& problem, double eta, long long K,
                      Vector w0, std::uint64_t seed);

/// Adds (mu/2)||w - w0||^2 to both the objective and the proxy; their
/// difference, and hence delta, is unchanged. Stochastic draws gain the
/// mu (w - w0) shift. The reference solution is dropped (the regularized
/// problem has a different minimizer).
ProblemInstance regularize_pair(const ProblemInstance& problem, double mu,
                                Vector w0);

/// Geometrically weighted average over w_1..w_K with weights
/// alpha_k = (1 + 2 eta mu / 5)^{k-1}, computed with weights normalized by
/// alpha_K so large K cannot overflow. mu = 0 gives the arithmetic mean.
Vector weighted_average(std::span<const Vector> iterates, double eta, double mu);

struct ScheduleStronglyConvex {
  double eta;
  long long K;
  double G2;
};

struct ScheduleConvex {
  double eta;
  long long K;
  double G2;
  double mu_reg;  // regularization weight 1/(eta K)
};

/// Stepsize / iteration / inexactness-budget schedule for the strongly convex
/// guarantee; `c` is the universal constant (default 10, the one concrete
/// constant displayed in the analysis).
ScheduleStronglyConvex schedule_strongly_convex(const ProblemInstance& problem,
                                                double epsilon, double B2,
                                                double c = 10.0);

ScheduleConvex schedule_convex(const ProblemInstance& problem, double epsilon,
                               double B2, double c = 10.0);

struct NonconvexReport {
  double avg_sq_grad;  // (1/K) sum_k ||grad L(w_k)||^2
  double bound;        // 48 (L(w_0) - L*) / (eta K) + 8 sigma^2
};

/// Requires a certified nonconvex trace (full gradients logged).
NonconvexReport nonconvex_report(const RunTrace& trace,
                                 const ProblemInstance& problem);

}  // namespace proxyprox
