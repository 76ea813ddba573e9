#include <doctest.h>

#include <memory>
#include <random>

#include "proxyprox/inner_solvers.hpp"
#include "proxyprox/problems.hpp"
#include "proxyprox/subproblem.hpp"
#include "test_util.hpp"

using namespace proxyprox;
using testutil::random_point;

namespace {

std::shared_ptr<const QuadraticOracle> diag_quadratic(
    std::initializer_list<double> diag) {
  Vector d(static_cast<Index>(diag.size()));
  Index i = 0;
  for (double v : diag) d[i++] = v;
  return std::make_shared<QuadraticOracle>(Matrix(d.asDiagonal()),
                                           Vector::Zero(d.size()), 0.0);
}

std::shared_ptr<const QuadraticOracle> zero_oracle(Index d) {
  return std::make_shared<QuadraticOracle>(QuadraticOracle::zero(d));
}

// Potentials exercised by the identity tests: quadratic, logistic (shipped
// pair members), and the non-convex cosine-perturbed quadratic.
std::vector<std::shared_ptr<const FunctionOracle>> shipped_potentials() {
  std::vector<std::shared_ptr<const FunctionOracle>> out;
  out.push_back(diag_quadratic({2.0, 3.0, 0.5, 1.0, 4.0}));
  auto tiny = std::make_shared<Dataset>(testutil::tiny_logistic());
  out.push_back(std::make_shared<LogisticOracle>(tiny, tiny->y, 1e-3));
  out.push_back(std::make_shared<LogisticOracle>(tiny, Vector::Ones(5), 0.0));
  {
    std::mt19937_64 rng(77);
    RowMajorMatrix A(8, 3);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 3; ++j)
        A(i, j) = std::normal_distribution<double>()(rng);
    out.push_back(std::make_shared<CosineQuadraticOracle>(
        A, Vector(A * random_point(rng, 3)), 0.5, 2.0));
  }
  return out;
}

}  // namespace

TEST_CASE("bregman: D(u;u) = 0 for any potential") {
  std::mt19937_64 rng(1);
  for (const auto& psi : shipped_potentials()) {
    const Vector u = random_point(rng, psi->dim());
    CHECK(bregman(*psi, u, u) == 0.0);
  }
}

TEST_CASE("bregman of the half squared norm is half the squared distance") {
  auto psi = diag_quadratic({1.0, 1.0});
  Vector u(2), v(2);
  u << 1, 0;
  v << 0, 0;
  CHECK(bregman(*psi, u, v) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bregman matches an independent term-by-term evaluation") {
  auto tiny = std::make_shared<Dataset>(testutil::tiny_logistic());
  LogisticOracle psi(tiny, tiny->y, 0.0);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 25; ++t) {
    const Vector u = random_point(rng, 2);
    const Vector v = random_point(rng, 2);
    // direct evaluation of the three defining terms
    double expected = psi.value(u) - psi.value(v);
    const Vector gv = psi.gradient(v);
    for (Index i = 0; i < 2; ++i) expected -= gv[i] * (u[i] - v[i]);
    CHECK(bregman(psi, u, v) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("three-point identity holds to rounding for all potentials") {
  std::mt19937_64 rng(3);
  for (const auto& psi : shipped_potentials()) {
    SUBCASE("degenerate triple") {
      const Vector u = random_point(rng, psi->dim());
      CHECK(three_point_residual(*psi, u, u, u) == 0.0);
    }
    for (int t = 0; t < 100; ++t) {
      const Vector u = random_point(rng, psi->dim(), 2.0);
      const Vector v = random_point(rng, psi->dim(), 2.0);
      const Vector w = random_point(rng, psi->dim(), 2.0);
      const double scale = 1.0 + std::abs(bregman(*psi, u, v));
      CHECK(three_point_residual(*psi, u, v, w) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("phi value: anchor evaluation keeps only the inner product") {
  std::mt19937_64 rng(4);
  auto proxy = diag_quadratic({2.0, 3.0});
  const Vector anchor = random_point(rng, 2);
  const Vector g = random_point(rng, 2);
  ProxSubproblem sp(anchor, g, 0.3, proxy);
  CHECK(sp.value(anchor) == g.dot(anchor));
}

TEST_CASE("phi value: zero proxy, hand-computed") {
  Vector anchor = Vector::Zero(2);
  Vector g(2), w(2);
  g << 1, 1;
  w << 1, 0;
  ProxSubproblem sp(anchor, g, 0.1, zero_oracle(2));
  // <g,w> + 0 + ||w||^2 / 0.2 = 1 + 5 = 6
  CHECK(sp.value(w) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("phi value matches independent recomputation for quadratic proxies") {
  auto proxy = diag_quadratic({2.0, 3.0});
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const Vector anchor = random_point(rng, 2);
    const Vector g = random_point(rng, 2);
    const double eta = 0.05 + 0.5 * t / 30.0;
    ProxSubproblem sp(anchor, g, eta, proxy);
    const Vector w = random_point(rng, 2);
    const double expected = g.dot(w) + bregman(*proxy, w, anchor) +
                            (w - anchor).squaredNorm() / (2.0 * eta);
    CHECK(sp.value(w) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("phi gradient at the anchor is g, bitwise") {
  std::mt19937_64 rng(6);
  for (const auto& proxy : shipped_potentials()) {
    for (int t = 0; t < 10; ++t) {
      const Vector anchor = random_point(rng, proxy->dim());
      const Vector g = random_point(rng, proxy->dim());
      ProxSubproblem sp(anchor, g, 0.17, proxy);
      const Vector at_anchor = sp.gradient(anchor);
      CHECK(at_anchor == g);
    }
  }
}

TEST_CASE("phi gradient: zero proxy reduces to the SGD form") {
  std::mt19937_64 rng(7);
  const Vector anchor = random_point(rng, 3);
  const Vector g = random_point(rng, 3);
  const double eta = 0.25;
  ProxSubproblem sp(anchor, g, eta, zero_oracle(3));
  const Vector w = random_point(rng, 3);
  CHECK((sp.gradient(w) - (g + (w - anchor) / eta)).norm() <= 1e-15);
}

TEST_CASE("phi gradient matches finite differences of phi value") {
  std::mt19937_64 rng(8);
  for (const auto& proxy : shipped_potentials()) {
    for (int t = 0; t < 20; ++t) {
      const Vector anchor = random_point(rng, proxy->dim());
      const Vector g = random_point(rng, proxy->dim());
      ProxSubproblem sp(anchor, g, 0.2, proxy);
      const Vector w = random_point(rng, proxy->dim());

      struct PhiOracle final : FunctionOracle {
        const ProxSubproblem* sp;
        Index dim() const override { return sp->dim(); }
        double value(const Vector& x) const override { return sp->value(x); }
        Vector gradient(const Vector& x) const override {
          return sp->gradient(x);
        }
      } phi;
      phi.sp = &sp;
      const Vector fd = finite_diff_gradient(phi, w, 1e-5);
      const Vector an = sp.gradient(w);
      CHECK((fd - an).norm() <= 1e-5 * std::max(1.0, an.norm()));
    }
  }
}

TEST_CASE("strong-convexity lower bound of phi for convex proxies") {
  auto proxy = diag_quadratic({2.0, 3.0});
  std::mt19937_64 rng(9);
  const double eta = 0.2;
  for (int t = 0; t < 20; ++t) {
    const Vector anchor = random_point(rng, 2);
    const Vector g = random_point(rng, 2);
    ProxSubproblem sp(anchor, g, eta, proxy);
    const Vector argmin = quadratic_exact(sp, proxy->P());
    const Vector w = random_point(rng, 2, 2.0);
    CHECK(sp.value(w) >= sp.value(argmin) +
                             (w - argmin).squaredNorm() / (2.0 * eta) - 1e-8);
  }
}

TEST_CASE("criterion: exact minimizer always passes") {
  auto proxy = diag_quadratic({2.0, 3.0});
  std::mt19937_64 rng(10);
  const Vector anchor = random_point(rng, 2);
  const Vector g = random_point(rng, 2);
  ProxSubproblem sp(anchor, g, 0.1, proxy);
  const Vector w_next = quadratic_exact(sp, proxy->P());
  const auto check = criterion_satisfied(
      CriterionSpec::strongly_convex_spec(1.0, 0.0, 0.1), sp, w_next);
  CHECK(check.ok);
  CHECK(check.lhs <= 1e-18);
}

TEST_CASE("criterion: no movement with zero allowance fails") {
  auto proxy = diag_quadratic({2.0, 3.0});
  Vector anchor = Vector::Zero(2);
  Vector g(2);
  g << 1, -2;
  ProxSubproblem sp(anchor, g, 0.1, proxy);
  const auto check = criterion_satisfied(
      CriterionSpec::strongly_convex_spec(1.0, 0.0, 0.1), sp, anchor);
  CHECK_FALSE(check.ok);
  CHECK(check.lhs == g.squaredNorm());
  CHECK(check.rhs == 0.0);
}

TEST_CASE("criterion thresholds follow the stated formulas") {
  auto proxy = diag_quadratic({2.0, 3.0});
  std::mt19937_64 rng(11);
  const Vector anchor = random_point(rng, 2);
  const Vector g = random_point(rng, 2);
  const double eta = 0.2;
  ProxSubproblem sp(anchor, g, eta, proxy);
  const Vector w_next = random_point(rng, 2);
  const double movement = (w_next - anchor).squaredNorm();

  const auto sc = criterion_satisfied(
      CriterionSpec::strongly_convex_spec(0.7, 0.01, eta), sp, w_next);
  CHECK(sc.rhs ==
        doctest::Approx(0.7 / (4.0 * eta) * movement + 0.01).epsilon(1e-14));

  const auto cv = criterion_satisfied(CriterionSpec::convex_spec(50, 0.02, eta),
                                      sp, w_next);
  CHECK(cv.rhs == doctest::Approx(movement / (4.0 * eta * eta * 50.0) + 0.02)
                      .epsilon(1e-14));

  const Vector grad_L = random_point(rng, 2);
  const auto nc = criterion_satisfied(CriterionSpec::nonconvex_spec(eta, true),
                                      sp, w_next, &grad_L);
  CHECK(nc.rhs == doctest::Approx(7.0 / (16.0 * eta * eta) * movement +
                                  grad_L.squaredNorm() / 8.0)
                      .epsilon(1e-14));
}

TEST_CASE("certified nonconvex criterion requires grad L") {
  auto proxy = diag_quadratic({1.0, 1.0});
  std::mt19937_64 rng(12);
  const Vector anchor = random_point(rng, 2);
  ProxSubproblem sp(anchor, random_point(rng, 2), 0.1, proxy);
  CHECK_THROWS_AS(criterion_satisfied(CriterionSpec::nonconvex_spec(0.1, true),
                                      sp, anchor),
                  ContractViolation);
  // the movement-only surrogate does not
  CHECK_NOTHROW(criterion_satisfied(CriterionSpec::nonconvex_spec(0.1, false),
                                    sp, anchor));
}

TEST_CASE("nonconvex criterion enforces descent") {
  auto proxy = diag_quadratic({1.0, 1.0});
  Vector anchor = Vector::Zero(2);
  Vector g(2);
  g << 1, 0;
  ProxSubproblem sp(anchor, g, 0.5, proxy);
  // moving against the gradient increases phi: descent must fail
  Vector uphill(2);
  uphill << 2.0, 0.0;
  Vector grad_L = Vector::Zero(2);
  const auto check = criterion_satisfied(CriterionSpec::nonconvex_spec(0.5, true),
                                         sp, uphill, &grad_L);
  CHECK_FALSE(check.descent_ok);
  CHECK_FALSE(check.ok);
}

TEST_CASE("similarity: |D_h| <= (delta/2)||u-v||^2 for shipped pairs") {
  struct DifferenceOracle final : FunctionOracle {
    const FunctionOracle* L;
    const FunctionOracle* F;
    Index dim() const override { return L->dim(); }
    double value(const Vector& w) const override {
      return L->value(w) - F->value(w);
    }
    Vector gradient(const Vector& w) const override {
      return L->gradient(w) - F->gradient(w);
    }
  };

  std::mt19937_64 rng(13);
  std::vector<ProblemInstance> pairs;
  pairs.push_back(least_squares_pair(make_spectrum_regression(6, 50.0, 1), 0.1));
  const Dataset small = testutil::small_logistic(60, 5, 2);
  pairs.push_back(logistic_pair(small, 1e-3, ProxyKind::label_free()));
  pairs.push_back(logistic_pair(small, 1e-3, ProxyKind::random_label(5)));
  pairs.push_back(logistic_pair(small, 1e-3, ProxyKind::subsample(20, 6)));
  pairs.push_back(nonconvex_testfn(5, 0.5, 2.0, 0.0, 3));

  for (const auto& inst : pairs) {
    DifferenceOracle h;
    h.L = inst.objective.get();
    h.F = inst.proxy.get();
    for (int t = 0; t < 100; ++t) {
      const Vector u = random_point(rng, h.dim(), 2.0);
      Vector v = random_point(rng, h.dim(), 2.0);
      if ((u - v).norm() > 10.0)
        v = u + 10.0 * (v - u).normalized();
      const double lhs = std::abs(bregman(h, u, v));
      CHECK(lhs <= inst.delta / 2.0 * (u - v).squaredNorm() + 1e-9);
    }
  }
}
