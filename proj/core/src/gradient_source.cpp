#include "proxyprox/gradient_source.hpp"

namespace proxyprox {

Vector GaussianGradientSource::draw(const Vector& w) {
  Vector g = oracle_->gradient(w);
  for (Index i = 0; i < g.size(); ++i) g[i] += coord_sd_ * normal_(rng_);
  return g;
}

MinibatchGradientSource::MinibatchGradientSource(
    std::shared_ptr<const FiniteSumOracle> oracle, Index batch_size,
    double sigma2, std::uint64_t seed)
    : StochasticGradientSource(sigma2),
      oracle_(std::move(oracle)),
      batch_size_(batch_size),
      rng_(seed),
      pick_(0, oracle_->num_terms() - 1) {
  require(batch_size_ >= 1, "minibatch: batch_size must be positive");
}

Vector MinibatchGradientSource::draw(const Vector& w) {
  Vector g = Vector::Zero(oracle_->dim());
  for (Index b = 0; b < batch_size_; ++b)
    g += oracle_->term_gradient(pick_(rng_), w);
  return g / static_cast<double>(batch_size_);
}

}  // namespace proxyprox
