#include "proxyprox/oracle.hpp"

#include <cmath>
#include <string>

namespace proxyprox {

Vector FunctionOracle::hvp(const Vector&, const Vector&) const {
  throw CapabilityError("oracle does not support Hessian-vector products");
}

Vector finite_diff_gradient(const FunctionOracle& oracle, const Vector& w,
                            double step) {
  require(step > 0.0, "finite_diff_gradient: step must be positive");
  require(all_finite(w), "finite_diff_gradient: w must be finite");
  require(w.size() == oracle.dim(), "finite_diff_gradient: dimension mismatch");

  Vector grad(w.size());
  Vector probe = w;
  for (Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + step;
    const double fp = oracle.value(probe);
    probe[i] = w[i] - step;
    const double fm = oracle.value(probe);
    probe[i] = w[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw EvalError("finite_diff_gradient: non-finite value at coordinate " +
                      std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

double squared_distance(const Vector& u, const Vector& v) {
  require(u.size() == v.size(), "squared_distance: dimension mismatch");
  return (u - v).squaredNorm();
}

double spectral_norm_power(const std::function<Vector(const Vector&)>& apply,
                           Index d, int iters, double tol,
                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = normal(rng);
  double vn = v.norm();
  if (vn == 0.0) return 0.0;
  v /= vn;

  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector av = apply(v);
    const double rayleigh = std::abs(v.dot(av));
    const double an = av.norm();
    if (an <= 1e-300) return 0.0;  // operator annihilates the iterate
    if (it > 0 && std::abs(rayleigh - estimate) <= tol * std::max(1.0, rayleigh))
      return rayleigh;
    estimate = rayleigh;
    v = av / an;
  }
  return estimate;
}

}  // namespace proxyprox
