#include "proxyprox/problem.hpp"

#include <cmath>

namespace proxyprox {

void ProblemInstance::validate() const {
  require(objective && proxy, "problem: objective and proxy are required");
  require(objective->dim() == proxy->dim(),
          "problem: objective and proxy dimensions differ");
  require(std::isfinite(delta) && delta >= 0.0, "problem: delta must be >= 0");
  require(std::isfinite(mu) && mu >= 0.0, "problem: mu must be >= 0");
  // H_proxy = 0 is the zero proxy; phi stays (1/eta)-smooth through the
  // quadratic term.
  require(std::isfinite(H_proxy) && H_proxy >= 0.0,
          "problem: H_proxy must be >= 0");
  require(std::isfinite(sigma2) && sigma2 >= 0.0, "problem: sigma2 must be >= 0");
  // L is (H + delta)-smooth, so mu cannot exceed H + delta.
  require(mu <= H_proxy + delta + 1e-9 * (1.0 + mu),
          "problem: mu exceeds H_proxy + delta");
  if (reference) {
    require(reference->w_star.size() == objective->dim(),
            "problem: reference dimension mismatch");
  }
}

}  // namespace proxyprox
