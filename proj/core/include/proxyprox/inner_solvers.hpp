#pragma once

#include <Eigen/Cholesky>

#include "proxyprox/gradient_source.hpp"
#include "proxyprox/subproblem.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

struct InnerConfig {
  long long max_steps = 10000;  // safety cap, plays the role of T
  double step_size = 0.0;       // <= 0 means 1/(H_proxy + 1/eta); see below
  long long batch_size = 1;     // minibatch size of the proxy gradient source
  double rho2 = 0.0;            // inner stochastic-gradient variance
  long long check_every = 10;   // criterion check period
};

/// Inverse smoothness of phi: F H-smooth makes phi (H + 1/eta)-smooth.
inline double default_inner_step(double H_proxy, double eta) {
  return 1.0 / (H_proxy + 1.0 / eta);
}

struct InnerResult {
  Vector w_next;
  long long steps_taken = 0;
  bool criterion_ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  long long proxy_grads_used = 0;
  std::vector<double> lhs_history;  // ||grad phi||^2 of the raw iterate per check
};

/// SGD on phi initialized at the anchor, v <- v - step * (stochastic grad of
/// phi). The criterion is checked with an exact grad phi every check_every
/// steps; when the inner gradients are stochastic, a window average of the
/// iterates since the previous check is tested as well (the averaged output
/// is what reaches below the constant-step noise floor). Returns the first
/// candidate that passes, otherwise the best-gradient-norm candidate seen,
/// with criterion_ok = false.
InnerResult inner_sgd(const ProxSubproblem& sp, const CriterionSpec& spec,
                      const InnerConfig& cfg,
                      StochasticGradientSource& proxy_grads,
                      const FunctionOracle* objective = nullptr);

/// Same loop with exact full gradients of phi; deterministic given inputs.
InnerResult inner_gd(const ProxSubproblem& sp, const CriterionSpec& spec,
                     const InnerConfig& cfg,
                     const FunctionOracle* objective = nullptr);

/// Closed-form minimizer of phi for a quadratic proxy (1/2) w'Pw + b'w:
/// anchor - eta (I + eta P)^{-1} g via a direct symmetric solve.
Vector quadratic_exact(const ProxSubproblem& sp, const Matrix& P);

/// Caches the LDLT factorization of (I + eta P) so outer loops pay one
/// factorization for arbitrarily many exact subproblem solves.
class QuadraticProxSolver {
 public:
  QuadraticProxSolver(const Matrix& P, double eta);
  Vector solve(const Vector& anchor, const Vector& g) const;
  double eta() const { return eta_; }

 private:
  Matrix system_;  // I + eta P, kept for iterative refinement
  Eigen::LDLT<Matrix> ldlt_;
  double eta_;
};

}  // namespace proxyprox
