#pragma once

#include <cstdint>
#include <memory>

#include "proxyprox/dataset.hpp"
#include "proxyprox/oracle.hpp"
#include "proxyprox/problem.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// Numerically stable logistic function 1 / (1 + exp(-z)).
double sigmoid_stable(double z);

/// Numerically stable log(1 + exp(z)); the per-sample logistic loss is
/// softplus(z) - y z.
double softplus_stable(double z);

/// F(w) = (1/2) w'Pw + b'w + c0. Exposes P so exact subproblem solves can
/// factor I + eta P directly.
class QuadraticOracle final : public FunctionOracle {
 public:
  QuadraticOracle(Matrix P, Vector b, double c0 = 0.0);
  static QuadraticOracle zero(Index d) {
    return {Matrix::Zero(d, d), Vector::Zero(d), 0.0};
  }

  Index dim() const override { return b_.size(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector&, const Vector& v) const override { return P_ * v; }

  const Matrix& P() const { return P_; }
  const Vector& b() const { return b_; }

 private:
  Matrix P_;
  Vector b_;
  double c0_;
};

/// L(w) = (1/2n) ||Xw - y||^2 + (reg/2) ||w||^2.
class LeastSquaresOracle final : public FiniteSumOracle {
 public:
  LeastSquaresOracle(std::shared_ptr<const Dataset> data, double reg);

  Index dim() const override { return data_->d(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& w, const Vector& v) const override;

  Index num_terms() const override { return data_->n(); }
  Vector term_gradient(Index i, const Vector& w) const override;

  const Dataset& data() const { return *data_; }
  double reg() const { return reg_; }

 private:
  std::shared_ptr<const Dataset> data_;
  double reg_;
};

/// L(w) = (1/n) sum_i [softplus(x_i'w) - y_i x_i'w] + (reg/2) ||w||^2 with
/// labels given separately so the label-free / random-label proxies can share
/// the feature matrix.
class LogisticOracle final : public FiniteSumOracle {
 public:
  LogisticOracle(std::shared_ptr<const Dataset> data, Vector labels, double reg);

  Index dim() const override { return data_->d(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& w, const Vector& v) const override;

  Index num_terms() const override { return data_->n(); }
  Vector term_gradient(Index i, const Vector& w) const override;

  const Vector& labels() const { return labels_; }
  double reg() const { return reg_; }

 private:
  std::shared_ptr<const Dataset> data_;
  Vector labels_;
  double reg_;
};

/// Logistic loss restricted to a row subset (the subsampled proxy).
class SubsetLogisticOracle final : public FiniteSumOracle {
 public:
  SubsetLogisticOracle(std::shared_ptr<const Dataset> data,
                       std::vector<Index> rows, double reg);

  Index dim() const override;
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& w, const Vector& v) const override;
  Index num_terms() const override;
  Vector term_gradient(Index i, const Vector& w) const override;

 private:
  std::shared_ptr<const Dataset> data_;
  std::vector<Index> rows_;
  double reg_;
};

/// L(w) = (1/2n) ||Aw - y||^2 + a sum_i cos(b w_i): the desk-scale
/// non-convex testbed. The quadratic part is the natural proxy, making the
/// similarity constant exactly a b^2.
class CosineQuadraticOracle final : public FunctionOracle {
 public:
  CosineQuadraticOracle(RowMajorMatrix A, Vector y, double amplitude,
                        double frequency);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& w, const Vector& v) const override;

 private:
  RowMajorMatrix A_;
  Vector y_;
  double a_, b_;
};

struct ProxyKind {
  enum class Tag {
    zero,
    covariance,
    label_free_logistic,
    random_label_logistic,
    subsample,
    quadratic
  };
  Tag tag = Tag::zero;
  Index m = 0;             // subsample size
  std::uint64_t seed = 0;  // random labels / subsample draw
  Matrix P;                // quadratic
  Vector b;

  static ProxyKind zero() { return {}; }
  static ProxyKind covariance() { return {Tag::covariance, 0, 0, {}, {}}; }
  static ProxyKind label_free() {
    return {Tag::label_free_logistic, 0, 0, {}, {}};
  }
  static ProxyKind random_label(std::uint64_t seed) {
    return {Tag::random_label_logistic, 0, seed, {}, {}};
  }
  static ProxyKind subsample(Index m, std::uint64_t seed) {
    return {Tag::subsample, m, seed, {}, {}};
  }
  static ProxyKind quadratic(Matrix P, Vector b) {
    return {Tag::quadratic, 0, 0, std::move(P), std::move(b)};
  }
};

/// Exact single-draw variance of the minibatch estimator at w, divided by the
/// batch size: (1/b) (1/n) sum_i ||g_i(w) - grad(w)||^2. No sampling needed.
double minibatch_sigma2(const FiniteSumOracle& oracle, const Vector& w,
                        Index batch_size);

/// lambda_max(X'X) / (4n), the smoothness of the unregularized logistic loss
/// on this data, by power iteration.
double logistic_smoothness(const Dataset& data);

/// Synthetic regression data whose covariance X'X/n has a log-spaced spectrum
/// in [1, cond]; targets are X w for a planted w (noiseless, so the least
/// squares minimum is exactly attained).
Dataset make_spectrum_regression(Index d, double cond, std::uint64_t seed);

/// Least squares with the covariance proxy F(w) = (1/2) w'(X'X/n)w plus the
/// shared l2 term; delta = 0 because the Hessians agree exactly.
ProblemInstance least_squares_pair(const Dataset& data, double reg_mu,
                                   Index batch_size = 1);

/// Logistic regression with a label-free, random-label, subsampled or zero
/// proxy. delta = 0 for the label-free and random-label proxies (the Hessian
/// does not depend on labels); estimated via estimate_delta for subsample.
ProblemInstance logistic_pair(const Dataset& data, double reg_mu,
                              const ProxyKind& kind, Index batch_size = 1);

/// Seeded (A, y) with y in the range of A; proxy = quadratic part, so
/// delta = amplitude * frequency^2 exactly and min L >= -amplitude * d.
ProblemInstance nonconvex_testfn(Index d, double amplitude, double frequency,
                                 double sigma2, std::uint64_t seed);

/// Strongly convex quadratic testbed: L(w) = (1/2)(w - w*)'A(w - w*) + f0
/// with a log-spaced spectrum in [mu, mu * cond], proxy (1/2) w'[(1-alpha)A]w
/// (alpha = 0 gives the exact-curvature proxy, delta = alpha * H), additive
/// Gaussian noise. Carries an analytic reference solution.
ProblemInstance quadratic_testbed(Index d, double mu, double cond,
                                  double proxy_alpha, double sigma2,
                                  std::uint64_t seed);

/// Max over probe points of the operator norm of the Hessian difference,
/// each estimated by power iteration on v -> hvp_L(w,v) - hvp_F(w,v)
/// (30 iterations, tolerance 1e-6). An under-estimate by construction.
double estimate_delta(const FunctionOracle& L, const FunctionOracle& F,
                      int probes, std::uint64_t seed);

}  // namespace proxyprox
