#include "proxyprox/subproblem.hpp"

#include <cmath>

namespace proxyprox {

double bregman(const FunctionOracle& psi, const Vector& u, const Vector& v) {
  require(u.size() == v.size() && u.size() == psi.dim(),
          "bregman: dimension mismatch");
  return psi.value(u) - psi.value(v) - psi.gradient(v).dot(u - v);
}

double three_point_residual(const FunctionOracle& psi, const Vector& u,
                            const Vector& v, const Vector& w) {
  const double lhs = bregman(psi, u, v) - bregman(psi, u, w) - bregman(psi, w, v);
  const double rhs = (psi.gradient(v) - psi.gradient(w)).dot(w - u);
  return std::abs(lhs - rhs);
}

ProxSubproblem::ProxSubproblem(Vector anchor, Vector g, double eta,
                               std::shared_ptr<const FunctionOracle> proxy)
    : anchor_(std::move(anchor)),
      g_(std::move(g)),
      eta_(eta),
      proxy_(std::move(proxy)) {
  require(eta_ > 0.0, "subproblem: eta must be positive");
  require(proxy_ != nullptr, "subproblem: proxy is required");
  require(anchor_.size() == proxy_->dim() && g_.size() == proxy_->dim(),
          "subproblem: dimension mismatch");
  proxy_grad_anchor_ = proxy_->gradient(anchor_);
  proxy_value_anchor_ = proxy_->value(anchor_);
}

double ProxSubproblem::value(const Vector& w) const {
  require(w.size() == anchor_.size(), "phi_value: dimension mismatch");
  const Vector d = w - anchor_;
  const double breg =
      proxy_->value(w) - proxy_value_anchor_ - proxy_grad_anchor_.dot(d);
  return g_.dot(w) + breg + d.squaredNorm() / (2.0 * eta_);
}

Vector ProxSubproblem::gradient(const Vector& w) const {
  require(w.size() == anchor_.size(), "phi_gradient: dimension mismatch");
  return g_ + (proxy_->gradient(w) - proxy_grad_anchor_) +
         (w - anchor_) / eta_;
}

CriterionSpec CriterionSpec::strongly_convex_spec(double mu, double G2,
                                                  double eta) {
  // mu = 0 degenerates to a plain ||grad phi||^2 <= G2 tolerance, handy for
  // driving gradient descent to a fixed accuracy.
  require(mu >= 0.0, "criterion: strongly_convex requires mu >= 0");
  require(eta > 0.0 && G2 >= 0.0, "criterion: bad eta or G2");
  CriterionSpec s;
  s.mode = Mode::strongly_convex;
  s.mu = mu;
  s.G2 = G2;
  s.eta = eta;
  return s;
}

CriterionSpec CriterionSpec::convex_spec(long long K, double G2, double eta) {
  require(K >= 1, "criterion: convex requires K >= 1");
  require(eta > 0.0 && G2 >= 0.0, "criterion: bad eta or G2");
  CriterionSpec s;
  s.mode = Mode::convex;
  s.K = K;
  s.G2 = G2;
  s.eta = eta;
  return s;
}

CriterionSpec CriterionSpec::nonconvex_spec(double eta, bool certified) {
  require(eta > 0.0, "criterion: bad eta");
  CriterionSpec s;
  s.mode = Mode::nonconvex;
  s.eta = eta;
  s.certified = certified;
  return s;
}

CriterionCheck criterion_satisfied(const CriterionSpec& spec,
                                   const ProxSubproblem& sp,
                                   const Vector& w_next,
                                   const Vector* grad_L_at_w_next) {
  const double movement = squared_distance(w_next, sp.anchor());
  const double eta = spec.eta;

  CriterionCheck check;
  check.lhs = sp.gradient(w_next).squaredNorm();
  switch (spec.mode) {
    case Mode::strongly_convex:
      check.rhs = spec.mu / (4.0 * eta) * movement + spec.G2;
      break;
    case Mode::convex:
      check.rhs = movement / (4.0 * eta * eta * static_cast<double>(spec.K)) +
                  spec.G2;
      break;
    case Mode::nonconvex: {
      check.rhs = 7.0 / (16.0 * eta * eta) * movement;
      if (spec.certified) {
        if (grad_L_at_w_next == nullptr)
          throw ContractViolation(
              "criterion: certified nonconvex mode requires grad L(w_next)");
        check.rhs += grad_L_at_w_next->squaredNorm() / 8.0;
      }
      const double at_next = sp.value(w_next);
      const double at_anchor = sp.value_at_anchor();
      check.descent_ok =
          at_next <= at_anchor + 1e-12 * (1.0 + std::abs(at_anchor));
      break;
    }
  }
  // A non-finite side means the candidate is useless regardless of formulas.
  check.ok = std::isfinite(check.lhs) && !std::isnan(check.rhs) &&
             check.lhs <= check.rhs && check.descent_ok;
  return check;
}

}  // namespace proxyprox
