#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "proxyprox/gradient_source.hpp"
#include "proxyprox/oracle.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// Certified high-accuracy minimizer used to evaluate suboptimality.
struct ReferenceSolution {
  Vector w_star;
  double f_star = 0.0;
  double grad_norm_at_w_star = 0.0;
};

using GradSourceFactory =
    std::function<std::unique_ptr<StochasticGradientSource>(std::uint64_t)>;

/// Bundle of objective L, proxy F-hat, and the known constants. Oracles are
/// immutable; gradient sources are created per run through the factories so
/// replicate runs never share mutable state.
struct ProblemInstance {
  std::shared_ptr<const FunctionOracle> objective;  // L
  std::shared_ptr<const FunctionOracle> proxy;      // F-hat

  GradSourceFactory grad_factory;        // stochastic gradients of L
  GradSourceFactory proxy_grad_factory;  // optional, inner stochastic solves

  double delta = 0.0;    // Lipschitz constant of grad(L - F-hat)
  double mu = 0.0;       // strong convexity of L (0 = merely convex)
  double H_proxy = 1.0;  // smoothness of F-hat
  double sigma2 = 0.0;   // declared variance bound of grad_factory draws

  std::optional<ReferenceSolution> reference;
  std::optional<double> f_lower_bound;  // valid lower bound on min L

  // run metadata
  std::uint64_t dataset_hash = 0;
  std::string scaling_mode = "none";
  std::string tag;

  Index dim() const { return objective ? objective->dim() : 0; }

  /// Throws ContractViolation when the declared constants are inconsistent.
  void validate() const;
};

}  // namespace proxyprox
