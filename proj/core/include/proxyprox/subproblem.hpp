#pragma once

#include <memory>

#include "proxyprox/oracle.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// Bregman divergence D_psi(u; v) = psi(u) - psi(v) - <grad psi(v), u - v>.
/// The potential may be any differentiable function, convex or not, so the
/// result may be negative.
double bregman(const FunctionOracle& psi, const Vector& u, const Vector& v);

/// |D(u;v) - D(u;w) - D(w;v) - <grad psi(v) - grad psi(w), w - u>|.
/// The identity holds exactly in exact arithmetic for any potential; the
/// returned residual is pure floating-point error.
double three_point_residual(const FunctionOracle& psi, const Vector& u,
                            const Vector& v, const Vector& w);

/// Per-iteration proximal subproblem
///   phi(w) = <g, w> + D_F(w; anchor) + ||w - anchor||^2 / (2 eta).
/// grad F(anchor) is computed once at construction and cached; the bias
/// correction term it appears in is constant in w. Immutable afterwards.
class ProxSubproblem {
 public:
  ProxSubproblem(Vector anchor, Vector g, double eta,
                 std::shared_ptr<const FunctionOracle> proxy);

  double value(const Vector& w) const;
  /// g + grad F(w) - grad F(anchor) + (w - anchor)/eta. Equals g bitwise at
  /// the anchor: both correction terms cancel algebraically.
  Vector gradient(const Vector& w) const;

  const Vector& anchor() const { return anchor_; }
  const Vector& g() const { return g_; }
  double eta() const { return eta_; }
  const FunctionOracle& proxy() const { return *proxy_; }
  const Vector& proxy_grad_at_anchor() const { return proxy_grad_anchor_; }
  double value_at_anchor() const { return g_.dot(anchor_); }
  Index dim() const { return anchor_.size(); }

 private:
  Vector anchor_;
  Vector g_;
  double eta_;
  std::shared_ptr<const FunctionOracle> proxy_;
  Vector proxy_grad_anchor_;
  double proxy_value_anchor_;
};

enum class Mode { strongly_convex, convex, nonconvex };

/// Execution-time inexactness criterion on ||grad phi(w+)||^2.
///   strongly_convex:  (mu / 4 eta) ||w+ - w_k||^2 + G2
///   convex:           (1 / 4 eta^2 K) ||w+ - w_k||^2 + G2
///   nonconvex:        (7 / 16 eta^2) ||w+ - w_k||^2 + (1/8)||grad L(w+)||^2
///                     plus the descent requirement phi(w+) <= phi(w_k).
/// In nonconvex mode, certified=true evaluates the grad-L term with a full
/// objective gradient; certified=false drops it, which only shrinks the
/// threshold, so satisfying the criterion without it is conservative.
struct CriterionSpec {
  Mode mode = Mode::strongly_convex;
  double eta = 0.0;
  double mu = 0.0;     // strongly_convex
  long long K = 0;     // convex
  double G2 = 0.0;
  bool certified = true;  // nonconvex only

  static CriterionSpec strongly_convex_spec(double mu, double G2, double eta);
  static CriterionSpec convex_spec(long long K, double G2, double eta);
  static CriterionSpec nonconvex_spec(double eta, bool certified);
};

struct CriterionCheck {
  bool ok = false;
  double lhs = 0.0;  // ||grad phi(w+)||^2
  double rhs = 0.0;  // threshold
  bool descent_ok = true;  // nonconvex descent requirement
};

/// grad_L_at_w_next is required in certified nonconvex mode and ignored
/// otherwise.
CriterionCheck criterion_satisfied(const CriterionSpec& spec,
                                   const ProxSubproblem& sp,
                                   const Vector& w_next,
                                   const Vector* grad_L_at_w_next = nullptr);

}  // namespace proxyprox
