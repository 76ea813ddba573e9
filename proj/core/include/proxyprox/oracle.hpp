#pragma once

#include <functional>
#include <memory>
#include <random>

#include "proxyprox/types.hpp"

namespace proxyprox {

/// Deterministic value/gradient access to a differentiable function on R^d.
/// Implementations are immutable after construction and safe to share across
/// concurrently executing runs.
class FunctionOracle {
 public:
  virtual ~FunctionOracle() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& w) const = 0;
  virtual Vector gradient(const Vector& w) const = 0;

  /// Hessian-vector products are an optional capability.
  virtual bool has_hvp() const { return false; }
  virtual Vector hvp(const Vector& w, const Vector& v) const;
};

/// Finite-sum objective (1/n) sum_i f_i(w); exposes per-term gradients so a
/// minibatch sampler can draw unbiased stochastic gradients.
class FiniteSumOracle : public FunctionOracle {
 public:
  virtual Index num_terms() const = 0;

  /// Gradient of the i-th term, regularizer included, so that the uniform
  /// average over terms equals gradient(w).
  virtual Vector term_gradient(Index i, const Vector& w) const = 0;
};

/// Central finite differences, entry i = (f(w+h e_i) - f(w-h e_i)) / 2h.
/// Test oracle for every piece of gradient code in this repository.
Vector finite_diff_gradient(const FunctionOracle& oracle, const Vector& w,
                            double step);

/// Squared Euclidean distance sum_i (u_i - v_i)^2.
double squared_distance(const Vector& u, const Vector& v);

/// Largest |eigenvalue| of a symmetric operator given through its matvec,
/// estimated by power iteration with a Rayleigh-quotient stopping rule.
double spectral_norm_power(const std::function<Vector(const Vector&)>& apply,
                           Index d, int iters, double tol,
                           std::mt19937_64& rng);

}  // namespace proxyprox
