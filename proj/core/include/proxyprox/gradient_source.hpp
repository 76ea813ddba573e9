#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "proxyprox/oracle.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// Seeded sampler of unbiased stochastic gradients with declared variance
/// bound sigma2. Single-owner mutable state: one instance per run. Every
/// sample() call increments the gradient budget by exactly one draw.
class StochasticGradientSource {
 public:
  virtual ~StochasticGradientSource() = default;

  Vector sample(const Vector& w) {
    ++draws_used_;
    return draw(w);
  }

  std::uint64_t draws_used() const { return draws_used_; }
  double sigma2() const { return sigma2_; }
  virtual bool is_stochastic() const = 0;

 protected:
  explicit StochasticGradientSource(double sigma2) : sigma2_(sigma2) {}
  virtual Vector draw(const Vector& w) = 0;

 private:
  double sigma2_;
  std::uint64_t draws_used_ = 0;
};

/// noise_model = exact: returns gradient(w), sigma2 = 0.
class ExactGradientSource final : public StochasticGradientSource {
 public:
  explicit ExactGradientSource(std::shared_ptr<const FunctionOracle> oracle)
      : StochasticGradientSource(0.0), oracle_(std::move(oracle)) {}
  bool is_stochastic() const override { return false; }

 protected:
  Vector draw(const Vector& w) override { return oracle_->gradient(w); }

 private:
  std::shared_ptr<const FunctionOracle> oracle_;
};

/// noise_model = additive-gaussian(sigma2): gradient(w) plus isotropic
/// Gaussian noise with total variance E||noise||^2 = sigma2.
class GaussianGradientSource final : public StochasticGradientSource {
 public:
  GaussianGradientSource(std::shared_ptr<const FunctionOracle> oracle,
                         double sigma2, std::uint64_t seed)
      : StochasticGradientSource(sigma2),
        oracle_(std::move(oracle)),
        coord_sd_(std::sqrt(sigma2 / static_cast<double>(oracle_->dim()))),
        rng_(seed) {}
  bool is_stochastic() const override { return true; }

 protected:
  Vector draw(const Vector& w) override;

 private:
  std::shared_ptr<const FunctionOracle> oracle_;
  double coord_sd_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// noise_model = minibatch(batch_size): mean of term gradients over indices
/// drawn uniformly with replacement. sigma2 is the declared bound for this
/// batch size (single-term variance / batch_size, estimated by the caller).
class MinibatchGradientSource final : public StochasticGradientSource {
 public:
  MinibatchGradientSource(std::shared_ptr<const FiniteSumOracle> oracle,
                          Index batch_size, double sigma2, std::uint64_t seed);
  bool is_stochastic() const override { return true; }
  Index batch_size() const { return batch_size_; }

 protected:
  Vector draw(const Vector& w) override;

 private:
  std::shared_ptr<const FiniteSumOracle> oracle_;
  Index batch_size_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<Index> pick_;
};

/// Wraps a source so each draw gains mu (w - w0): the stochastic gradients of
/// an objective regularized by (mu/2)||w - w0||^2. Variance is unchanged.
class ShiftedGradientSource final : public StochasticGradientSource {
 public:
  ShiftedGradientSource(std::unique_ptr<StochasticGradientSource> inner,
                        double mu, Vector w0)
      : StochasticGradientSource(inner->sigma2()),
        inner_(std::move(inner)),
        mu_(mu),
        w0_(std::move(w0)) {}
  bool is_stochastic() const override { return inner_->is_stochastic(); }

 protected:
  Vector draw(const Vector& w) override {
    return inner_->sample(w) + mu_ * (w - w0_);
  }

 private:
  std::unique_ptr<StochasticGradientSource> inner_;
  double mu_;
  Vector w0_;
};

}  // namespace proxyprox
