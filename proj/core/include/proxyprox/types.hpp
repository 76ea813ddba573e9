#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace proxyprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (dimension mismatch, bad mode, ...).
struct ContractViolation : Error {
  using Error::Error;
};

/// An oracle produced a non-finite value where a finite one was required.
struct EvalError : Error {
  using Error::Error;
};

/// Bad run configuration (stepsize precondition, unknown mode, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// Requested capability (e.g. Hessian-vector products) is not available.
struct CapabilityError : Error {
  using Error::Error;
};

struct LinAlgError : Error {
  using Error::Error;
};

/// An iterative solver produced a non-finite iterate.
struct DivergenceError : Error {
  DivergenceError(long long step, double step_size, const std::string& what)
      : Error(what), step(step), step_size(step_size) {}
  long long step;
  double step_size;
};

/// Reference solve hit its gradient-evaluation cap; carries the best point.
struct UnconvergedError : Error {
  UnconvergedError(Vector best, double grad_norm, const std::string& what)
      : Error(what), best(std::move(best)), grad_norm(grad_norm) {}
  Vector best;
  double grad_norm;
};

struct ParseError : Error {
  ParseError(long long line, long long column, const std::string& what)
      : Error(what), line(line), column(column) {}
  long long line;
  long long column;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace proxyprox
