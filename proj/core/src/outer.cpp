#include "proxyprox/outer.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "proxyprox/data_io.hpp"
#include "proxyprox/problems.hpp"

namespace proxyprox {

namespace {

// Objective or proxy plus (mu/2)||w - w0||^2.
class ProximallyRegularizedOracle final : public FunctionOracle {
 public:
  ProximallyRegularizedOracle(std::shared_ptr<const FunctionOracle> inner,
                              double mu, Vector w0)
      : inner_(std::move(inner)), mu_(mu), w0_(std::move(w0)) {}

  Index dim() const override { return inner_->dim(); }
  double value(const Vector& w) const override {
    return inner_->value(w) + 0.5 * mu_ * (w - w0_).squaredNorm();
  }
  Vector gradient(const Vector& w) const override {
    return inner_->gradient(w) + mu_ * (w - w0_);
  }
  bool has_hvp() const override { return inner_->has_hvp(); }
  Vector hvp(const Vector& w, const Vector& v) const override {
    return inner_->hvp(w, v) + mu_ * v;
  }

 private:
  std::shared_ptr<const FunctionOracle> inner_;
  double mu_;
  Vector w0_;
};

CriterionSpec make_spec(const ProblemInstance& problem, const OuterConfig& cfg) {
  switch (cfg.mode) {
    case Mode::strongly_convex:
      return CriterionSpec::strongly_convex_spec(problem.mu, cfg.G2, cfg.eta);
    case Mode::convex:
      return CriterionSpec::convex_spec(cfg.K, cfg.G2, cfg.eta);
    case Mode::nonconvex:
      return CriterionSpec::nonconvex_spec(cfg.eta, cfg.certified);
  }
  throw ConfigError("unknown mode");
}

void validate_outer(const ProblemInstance& problem, const OuterConfig& cfg) {
  problem.validate();
  require(cfg.eta > 0.0 && cfg.K >= 1, "outer: eta > 0 and K >= 1 required");
  require(cfg.w0.size() == problem.dim(), "outer: w0 dimension mismatch");
  require(all_finite(cfg.w0), "outer: w0 must be finite");
  if (problem.delta > 0.0 && cfg.eta > 1.0 / (4.0 * problem.delta) * (1.0 + 1e-12))
    throw ConfigError("outer: eta exceeds 1/(4 delta) = " +
                      std::to_string(1.0 / (4.0 * problem.delta)));
  if (cfg.mode == Mode::strongly_convex)
    require(problem.mu > 0.0, "outer: strongly_convex mode needs mu > 0");
}

}  // namespace

RunTrace proxyprox_run(const ProblemInstance& problem, const OuterConfig& cfg) {
  validate_outer(problem, cfg);
  const CriterionSpec spec = make_spec(problem, cfg);

  OuterConfig resolved = cfg;
  if (resolved.inner.step_size <= 0.0)
    resolved.inner.step_size = default_inner_step(problem.H_proxy, cfg.eta);
  require(resolved.inner.step_size <=
              default_inner_step(problem.H_proxy, cfg.eta) + 1e-12,
          "outer: inner step_size exceeds 1/(H_proxy + 1/eta)");

  auto grad_source = problem.grad_factory(rng_fork(cfg.seed, "outer-noise"));
  std::unique_ptr<StochasticGradientSource> proxy_source;
  if (cfg.solver == InnerSolverKind::sgd) {
    require(static_cast<bool>(problem.proxy_grad_factory),
            "outer: sgd inner solver needs a proxy gradient source");
    proxy_source = problem.proxy_grad_factory(rng_fork(cfg.seed, "inner-noise"));
  }
  std::unique_ptr<QuadraticProxSolver> qsolver;
  if (cfg.solver == InnerSolverKind::exact_quadratic) {
    const auto* quad = dynamic_cast<const QuadraticOracle*>(problem.proxy.get());
    if (quad == nullptr)
      throw ConfigError("outer: exact_quadratic solver needs a quadratic proxy");
    qsolver = std::make_unique<QuadraticProxSolver>(quad->P(), cfg.eta);
  }
  const FunctionOracle* objective_for_criterion =
      (cfg.mode == Mode::nonconvex && cfg.certified) ? problem.objective.get()
                                                     : nullptr;

  RunTrace trace;
  trace.cfg = resolved;
  trace.iterates.reserve(cfg.K + 1);
  trace.iterates.push_back(cfg.w0);
  trace.objective_values.push_back(problem.objective->value(cfg.w0));

  std::uint64_t proxy_grads_total = 0;
  Vector w = cfg.w0;
  for (long long k = 0; k < cfg.K; ++k) {
    const Vector g = grad_source->sample(w);
    ProxSubproblem sp(w, g, cfg.eta, problem.proxy);
    ++proxy_grads_total;  // cached grad F(anchor)

    Vector w_next;
    double lhs = 0.0, rhs = 0.0;
    bool ok = false;
    if (cfg.solver == InnerSolverKind::exact_quadratic) {
      w_next = qsolver->solve(sp.anchor(), sp.g());
      CriterionCheck check;
      if (objective_for_criterion != nullptr) {
        const Vector grad_L = objective_for_criterion->gradient(w_next);
        check = criterion_satisfied(spec, sp, w_next, &grad_L);
      } else {
        check = criterion_satisfied(spec, sp, w_next);
      }
      ++proxy_grads_total;
      lhs = check.lhs;
      rhs = check.rhs;
      ok = check.ok;
    } else {
      InnerResult res =
          cfg.solver == InnerSolverKind::gd
              ? inner_gd(sp, spec, resolved.inner, objective_for_criterion)
              : inner_sgd(sp, spec, resolved.inner, *proxy_source,
                          objective_for_criterion);
      proxy_grads_total += res.proxy_grads_used;
      w_next = std::move(res.w_next);
      lhs = res.lhs;
      rhs = res.rhs;
      ok = res.criterion_ok;
    }

    if (!ok) {
      if (cfg.policy == FailurePolicy::abort)
        throw CriterionFailure(k, lhs, rhs,
                               "inner criterion failed at outer step " +
                                   std::to_string(k) + " (lhs " +
                                   std::to_string(lhs) + " > rhs " +
                                   std::to_string(rhs) + ")");
      std::cerr << "warning: inner criterion failed at outer step " << k
                << " (lhs " << lhs << " > rhs " << rhs << ")\n";
    }

    trace.movement.push_back(squared_distance(w_next, w));
    trace.criterion_lhs.push_back(lhs);
    trace.criterion_rhs.push_back(rhs);
    trace.criterion_ok.push_back(ok ? 1 : 0);
    trace.objective_grad_draws.push_back(grad_source->draws_used());
    trace.proxy_grads.push_back(proxy_grads_total);
    if (cfg.mode == Mode::nonconvex && cfg.certified)
      trace.grad_sq_norms.push_back(
          problem.objective->gradient(w_next).squaredNorm());

    w = std::move(w_next);
    trace.iterates.push_back(w);
    trace.objective_values.push_back(problem.objective->value(w));
  }

  const std::span<const Vector> tail(trace.iterates.data() + 1,
                                     static_cast<std::size_t>(cfg.K));
  switch (cfg.mode) {
    case Mode::strongly_convex:
      trace.averaged_iterate = weighted_average(tail, cfg.eta, problem.mu);
      break;
    case Mode::convex:
      trace.averaged_iterate = weighted_average(tail, cfg.eta, 0.0);
      break;
    case Mode::nonconvex:
      break;  // report gradient-norm statistics instead
  }
  if (problem.reference)
    trace.B2 = squared_distance(cfg.w0, problem.reference->w_star);
  return trace;
}

RunTrace sgd_baseline(const ProblemInstance& problem, double eta, long long K,
                      Vector w0, std::uint64_t seed) {
  problem.validate();
  require(eta > 0.0 && K >= 1, "sgd_baseline: eta > 0 and K >= 1 required");
  require(w0.size() == problem.dim(), "sgd_baseline: w0 dimension mismatch");

  auto grad_source = problem.grad_factory(rng_fork(seed, "outer-noise"));

  RunTrace trace;
  trace.cfg.eta = eta;
  trace.cfg.K = K;
  trace.cfg.mode = Mode::convex;
  trace.cfg.seed = seed;
  trace.cfg.w0 = w0;
  trace.iterates.reserve(K + 1);
  trace.iterates.push_back(w0);
  trace.objective_values.push_back(problem.objective->value(w0));

  Vector w = std::move(w0);
  for (long long k = 0; k < K; ++k) {
    const Vector g = grad_source->sample(w);
    Vector w_next = w - eta * g;
    if (!w_next.allFinite())
      throw DivergenceError(k, eta,
                            "sgd_baseline diverged at step " + std::to_string(k));
    trace.movement.push_back(squared_distance(w_next, w));
    trace.criterion_lhs.push_back(0.0);
    trace.criterion_rhs.push_back(0.0);
    trace.criterion_ok.push_back(1);
    trace.objective_grad_draws.push_back(grad_source->draws_used());
    trace.proxy_grads.push_back(0);
    w = std::move(w_next);
    trace.iterates.push_back(w);
    trace.objective_values.push_back(problem.objective->value(w));
  }
  const std::span<const Vector> tail(trace.iterates.data() + 1,
                                     static_cast<std::size_t>(K));
  trace.averaged_iterate = weighted_average(tail, eta, 0.0);
  if (problem.reference)
    trace.B2 = squared_distance(trace.iterates.front(),
                                problem.reference->w_star);
  return trace;
}

ProblemInstance regularize_pair(const ProblemInstance& problem, double mu,
                                Vector w0) {
  problem.validate();
  require(mu > 0.0, "regularize_pair: mu must be positive");
  require(w0.size() == problem.dim(), "regularize_pair: w0 dimension mismatch");

  ProblemInstance reg = problem;
  reg.objective = std::make_shared<ProximallyRegularizedOracle>(
      problem.objective, mu, w0);
  reg.proxy =
      std::make_shared<ProximallyRegularizedOracle>(problem.proxy, mu, w0);
  reg.mu = problem.mu + mu;
  reg.H_proxy = problem.H_proxy + mu;
  // delta unchanged: the added terms cancel in L - F.
  const GradSourceFactory base = problem.grad_factory;
  reg.grad_factory = [base, mu, w0](std::uint64_t seed) {
    return std::make_unique<ShiftedGradientSource>(base(seed), mu, w0);
  };
  if (problem.proxy_grad_factory) {
    const GradSourceFactory pbase = problem.proxy_grad_factory;
    reg.proxy_grad_factory = [pbase, mu, w0](std::uint64_t seed) {
      return std::make_unique<ShiftedGradientSource>(pbase(seed), mu, w0);
    };
  }
  reg.reference.reset();
  // f^(mu) >= f pointwise, so an existing lower bound stays valid.
  reg.tag = problem.tag + "+reg";
  return reg;
}

Vector weighted_average(std::span<const Vector> iterates, double eta,
                        double mu) {
  require(!iterates.empty(), "weighted_average: no iterates");
  require(eta > 0.0 && mu >= 0.0, "weighted_average: bad eta or mu");
  const double q = 2.0 * eta * mu / 5.0;
  // beta_k = alpha_k / alpha_K = (1+q)^{k-K} <= 1, accumulated from k = K down.
  Vector sum = Vector::Zero(iterates.front().size());
  double total = 0.0;
  double beta = 1.0;
  const double shrink = 1.0 / (1.0 + q);
  for (std::size_t k = iterates.size(); k-- > 0;) {
    sum += beta * iterates[k];
    total += beta;
    beta *= shrink;
  }
  return sum / total;
}

ScheduleStronglyConvex schedule_strongly_convex(const ProblemInstance& problem,
                                                double epsilon, double B2,
                                                double c) {
  require(problem.mu > 0.0, "schedule: mu must be positive");
  require(epsilon > 0.0 && B2 > 0.0 && c > 0.0, "schedule: bad inputs");
  const double mu = problem.mu;
  const double delta = problem.delta;
  const double sigma2 = problem.sigma2;

  const double factor = 1.0 + delta / mu + sigma2 / (mu * epsilon);
  const double log_arg =
      std::exp(1.0) + (mu + delta) * B2 / epsilon +
      sigma2 * B2 / (epsilon * epsilon);
  long long K = static_cast<long long>(std::ceil(c * factor * std::log(log_arg)));
  K = std::max<long long>(K, 2);

  const double Km1 = static_cast<double>(K - 1);
  double log_term = std::log(5.0 * B2 * mu * Km1 / epsilon);
  double eta = 5.0 / (mu * Km1) * std::max(1.0, 1.0 + log_term);
  eta = std::min(eta, 5.0 / (2.0 * mu));
  if (delta > 0.0) eta = std::min(eta, 1.0 / (4.0 * delta));

  return {eta, K, 0.5 * mu * epsilon};
}

ScheduleConvex schedule_convex(const ProblemInstance& problem, double epsilon,
                               double B2, double c) {
  require(epsilon > 0.0 && B2 > 0.0 && c > 0.0, "schedule: bad inputs");
  const double delta = problem.delta;
  const double sigma2 = problem.sigma2;
  const double B = std::sqrt(B2);

  long long K = static_cast<long long>(
      std::ceil(c * (delta * B2 / epsilon + sigma2 * B2 / (epsilon * epsilon))));
  K = std::max<long long>(K, static_cast<long long>(std::ceil(c)));

  double eta;
  if (sigma2 > 0.0) {
    eta = B / (std::sqrt(sigma2) * std::sqrt(static_cast<double>(K)));
    if (delta > 0.0) eta = std::min(eta, 1.0 / (4.0 * delta));
  } else if (delta > 0.0) {
    eta = 1.0 / (4.0 * delta);
  } else {
    // Degenerate noiseless similar-proxy case: any eta with
    // 9 B^2 / (8 eta K) <= epsilon works; K stays at its floor c.
    eta = 2.0 * B2 / (epsilon * static_cast<double>(K));
  }

  const double Kd = static_cast<double>(K);
  const double G2 = sigma2 / Kd + delta * delta * B2 / (Kd * Kd);
  return {eta, K, G2, 1.0 / (eta * Kd)};
}

NonconvexReport nonconvex_report(const RunTrace& trace,
                                 const ProblemInstance& problem) {
  require(trace.cfg.mode == Mode::nonconvex && trace.cfg.certified,
          "nonconvex_report: trace must come from a certified nonconvex run");
  require(!trace.grad_sq_norms.empty() &&
              trace.grad_sq_norms.size() ==
                  static_cast<std::size_t>(trace.cfg.K),
          "nonconvex_report: missing gradient logs");
  double f_low;
  if (problem.f_lower_bound)
    f_low = *problem.f_lower_bound;
  else if (problem.reference)
    f_low = problem.reference->f_star;
  else
    throw ContractViolation("nonconvex_report: no lower bound on L available");

  double avg = 0.0;
  for (double v : trace.grad_sq_norms) avg += v;
  avg /= static_cast<double>(trace.grad_sq_norms.size());

  const double K = static_cast<double>(trace.cfg.K);
  const double bound =
      48.0 * (trace.objective_values.front() - f_low) / (trace.cfg.eta * K) +
      8.0 * problem.sigma2;
  return {avg, bound};
}

}  // namespace proxyprox
