#include "proxyprox/inner_solvers.hpp"

#include <cmath>
#include <string>

namespace proxyprox {

namespace {

struct LoopState {
  Vector best_point;
  double best_lhs = std::numeric_limits<double>::infinity();
  double best_rhs = 0.0;
  long long proxy_grads = 0;
};

// One criterion check: an exact grad phi (one proxy gradient), plus a full
// objective gradient in certified nonconvex mode.
CriterionCheck check_candidate(const ProxSubproblem& sp,
                               const CriterionSpec& spec, const Vector& cand,
                               const FunctionOracle* objective,
                               LoopState& state) {
  ++state.proxy_grads;
  CriterionCheck check;
  if (spec.mode == Mode::nonconvex && spec.certified) {
    if (objective == nullptr)
      throw ContractViolation(
          "inner solver: certified nonconvex mode needs the objective oracle");
    const Vector grad_L = objective->gradient(cand);
    check = criterion_satisfied(spec, sp, cand, &grad_L);
  } else {
    check = criterion_satisfied(spec, sp, cand);
  }
  if (check.lhs < state.best_lhs) {
    state.best_lhs = check.lhs;
    state.best_rhs = check.rhs;
    state.best_point = cand;
  }
  return check;
}

InnerResult run_inner_loop(const ProxSubproblem& sp, const CriterionSpec& spec,
                           const InnerConfig& cfg,
                           StochasticGradientSource& proxy_grads,
                           const FunctionOracle* objective) {
  require(cfg.max_steps >= 0 && cfg.check_every >= 1,
          "inner solver: bad max_steps or check_every");
  require(cfg.step_size > 0.0,
          "inner solver: step_size must be resolved, see default_inner_step");

  const Vector& anchor = sp.anchor();
  const Vector& g = sp.g();
  const Vector& cached = sp.proxy_grad_at_anchor();
  const double eta = sp.eta();
  const double step = cfg.step_size;
  const bool stochastic = proxy_grads.is_stochastic();

  LoopState state;
  std::vector<double> lhs_history;

  // The anchor itself may already satisfy the criterion (grad phi(anchor) = g).
  {
    const CriterionCheck c0 = check_candidate(sp, spec, anchor, objective, state);
    lhs_history.push_back(c0.lhs);
    if (c0.ok)
      return {anchor, 0, true, c0.lhs, c0.rhs, state.proxy_grads,
              std::move(lhs_history)};
  }

  Vector v = anchor;
  Vector window_sum = Vector::Zero(v.size());
  long long window_n = 0;

  for (long long t = 1; t <= cfg.max_steps; ++t) {
    const Vector draw = proxy_grads.sample(v);
    ++state.proxy_grads;
    v = v - step * (g + (draw - cached) + (v - anchor) / eta);
    if (!v.allFinite())
      throw DivergenceError(t, step,
                            "inner solver diverged at step " + std::to_string(t) +
                                " with step_size " + std::to_string(step));
    if (stochastic) {
      window_sum += v;
      ++window_n;
    }

    if (t % cfg.check_every == 0 || t == cfg.max_steps) {
      if (stochastic && window_n > 0) {
        const Vector avg = window_sum / static_cast<double>(window_n);
        const CriterionCheck ca = check_candidate(sp, spec, avg, objective, state);
        if (ca.ok)
          return {avg, t, true, ca.lhs, ca.rhs, state.proxy_grads,
                  std::move(lhs_history)};
        window_sum.setZero();
        window_n = 0;
      }
      const CriterionCheck cr = check_candidate(sp, spec, v, objective, state);
      lhs_history.push_back(cr.lhs);
      if (!std::isfinite(cr.lhs))
        throw DivergenceError(t, step,
                              "inner solver diverged at step " +
                                  std::to_string(t) + " with step_size " +
                                  std::to_string(step));
      if (cr.ok)
        return {v, t, true, cr.lhs, cr.rhs, state.proxy_grads,
                std::move(lhs_history)};
    }
  }

  return {state.best_point, cfg.max_steps, false, state.best_lhs,
          state.best_rhs, state.proxy_grads, std::move(lhs_history)};
}

}  // namespace

InnerResult inner_sgd(const ProxSubproblem& sp, const CriterionSpec& spec,
                      const InnerConfig& cfg,
                      StochasticGradientSource& proxy_grads,
                      const FunctionOracle* objective) {
  return run_inner_loop(sp, spec, cfg, proxy_grads, objective);
}

InnerResult inner_gd(const ProxSubproblem& sp, const CriterionSpec& spec,
                     const InnerConfig& cfg, const FunctionOracle* objective) {
  // Non-owning shared_ptr: the subproblem outlives the solve.
  ExactGradientSource exact(
      std::shared_ptr<const FunctionOracle>(&sp.proxy(), [](auto*) {}));
  return run_inner_loop(sp, spec, cfg, exact, objective);
}

QuadraticProxSolver::QuadraticProxSolver(const Matrix& P, double eta)
    : eta_(eta) {
  require(P.rows() == P.cols(), "quadratic_exact: P must be square");
  require(eta > 0.0, "quadratic_exact: eta must be positive");
  system_ = Matrix::Identity(P.rows(), P.cols()) + eta * P;
  ldlt_.compute(system_);
  if (ldlt_.info() != Eigen::Success)
    throw LinAlgError("quadratic_exact: factorization of I + eta P failed");
}

Vector QuadraticProxSolver::solve(const Vector& anchor, const Vector& g) const {
  Vector x = ldlt_.solve(g);
  // One step of iterative refinement keeps the residual at machine precision
  // even for badly conditioned P.
  x += ldlt_.solve(g - system_ * x);
  if (!x.allFinite())
    throw LinAlgError("quadratic_exact: singular system I + eta P");
  return anchor - eta_ * x;
}

Vector quadratic_exact(const ProxSubproblem& sp, const Matrix& P) {
  require(P.rows() == sp.dim() && P.cols() == sp.dim(),
          "quadratic_exact: P dimension mismatch");
  QuadraticProxSolver solver(P, sp.eta());
  return solver.solve(sp.anchor(), sp.g());
}

}  // namespace proxyprox
