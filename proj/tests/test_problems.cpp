#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "proxyprox/problems.hpp"
#include "test_util.hpp"

using namespace proxyprox;
using testutil::random_point;

namespace {

double hvp_diff_norm(const ProblemInstance& inst, const Vector& w,
                     const Vector& v) {
  return (inst.objective->hvp(w, v) - inst.proxy->hvp(w, v)).norm();
}

}  // namespace

TEST_CASE("sigmoid_stable") {
  CHECK(sigmoid_stable(0.0) == 0.5);
  CHECK(sigmoid_stable(30.0) + sigmoid_stable(-30.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // deep tail: ln s(z) = -softplus(-z) stays finite and ~ z
  CHECK(-softplus_stable(745.0) == doctest::Approx(-745.0).epsilon(1e-12));
  CHECK(sigmoid_stable(-745.0) >= 0.0);
  CHECK(std::isfinite(softplus_stable(745.0)));
  CHECK(softplus_stable(-745.0) > 0.0);  // no underflow to exactly zero
}

TEST_CASE("least squares: one-sample hand computation") {
  Dataset data;
  data.X = RowMajorMatrix(1, 1);
  data.X << 2.0;
  data.y = Vector(1);
  data.y << 4.0;
  ProblemInstance inst = least_squares_pair(data, 0.0);

  Vector w(1);
  w << 3.0;
  // L(w) = (1/2)(2w-4)^2, F(w) = 2 w^2
  CHECK(inst.objective->value(w) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(inst.proxy->value(w) == doctest::Approx(18.0).epsilon(1e-14));
  Vector e1 = Vector::Ones(1);
  CHECK(inst.objective->hvp(w, e1)[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(inst.proxy->hvp(w, e1)[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(inst.delta == 0.0);
}

TEST_CASE("least squares synthetic: identical Hessians, exact reference") {
  const Dataset data = make_spectrum_regression(20, 1e4, 7);
  ProblemInstance inst = least_squares_pair(data, 0.0);
  CHECK(inst.mu == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(inst.H_proxy == doctest::Approx(1e4).epsilon(1e-6));

  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Vector w = random_point(rng, 20);
    const Vector v = random_point(rng, 20);
    CHECK(hvp_diff_norm(inst, w, v) <= 1e-10 * std::max(1.0, v.norm() * 1e4));
  }
  REQUIRE(inst.reference.has_value());
  CHECK(inst.reference->grad_norm_at_w_star <= 1e-9);

  // single-sample stochastic gradients average to the full gradient
  const auto* fs = dynamic_cast<const FiniteSumOracle*>(inst.objective.get());
  REQUIRE(fs != nullptr);
  const Vector w = random_point(rng, 20);
  Vector mean = Vector::Zero(20);
  for (Index i = 0; i < fs->num_terms(); ++i) mean += fs->term_gradient(i, w);
  mean /= static_cast<double>(fs->num_terms());
  CHECK((mean - inst.objective->gradient(w)).norm() <=
        1e-12 * std::max(1.0, inst.objective->gradient(w).norm()));
}

TEST_CASE("logistic label-free proxy: Hessians agree on a d=1 toy") {
  Dataset data;
  data.X = RowMajorMatrix(2, 1);
  data.X << 1.0, -1.0;
  data.y = Vector(2);
  data.y << 1.0, 0.0;
  ProblemInstance inst = logistic_pair(data, 0.0, ProxyKind::label_free());
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Vector w = random_point(rng, 1);
    const Vector v = random_point(rng, 1);
    CHECK(hvp_diff_norm(inst, w, v) <= 1e-12);
  }
  CHECK(inst.delta == 0.0);
}

TEST_CASE("mushrooms-scale random-label proxy: Hessian identity at scale") {
  const ProblemInstance& inst = testutil::mushrooms_random_label_instance();
  std::mt19937_64 rng(10);
  const double H = inst.H_proxy;
  for (int t = 0; t < 20; ++t) {
    const Vector w = random_point(rng, inst.dim());
    const Vector v = random_point(rng, inst.dim());
    CHECK(hvp_diff_norm(inst, w, v) <= 1e-8 * H * v.norm());
  }
}

TEST_CASE("subsampled proxy: delta estimate shrinks as m grows") {
  const Dataset data = testutil::small_logistic(1000, 12, 31);
  std::vector<Index> sizes = {100, 250, 500, 1000};
  std::vector<double> avg_delta(sizes.size(), 0.0);
  const int n_seeds = 10;
  for (int seed = 0; seed < n_seeds; ++seed) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      ProblemInstance inst = logistic_pair(
          data, 1e-4, ProxyKind::subsample(sizes[i], 100 + seed));
      CHECK(inst.delta >= 0.0);
      avg_delta[i] += inst.delta / n_seeds;
    }
  }
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    CHECK(avg_delta[i + 1] <= avg_delta[i] * 1.05 + 1e-12);
  // the full "subsample" is the loss itself
  CHECK(avg_delta.back() <= 1e-8);
  CHECK(avg_delta.front() > 0.0);
}

TEST_CASE("strong convexity inequality for regularized instances") {
  std::mt19937_64 rng(11);
  std::vector<ProblemInstance> insts;
  insts.push_back(least_squares_pair(make_spectrum_regression(8, 100.0, 3), 0.5));
  insts.push_back(
      logistic_pair(testutil::small_logistic(80, 6, 5), 0.2, ProxyKind::label_free()));
  for (const auto& inst : insts) {
    for (int t = 0; t < 100; ++t) {
      const Vector u = random_point(rng, inst.dim(), 2.0);
      const Vector v = random_point(rng, inst.dim(), 2.0);
      const double lhs = inst.objective->value(v);
      const double rhs = inst.objective->value(u) +
                         inst.objective->gradient(u).dot(v - u) +
                         0.5 * inst.mu * (u - v).squaredNorm();
      CHECK(lhs >= rhs - 1e-9 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("nonconvex test function") {
  SUBCASE("amplitude zero is the convex quadratic") {
    ProblemInstance inst = nonconvex_testfn(6, 0.0, 2.0, 0.0, 13);
    CHECK(inst.delta == 0.0);
    std::mt19937_64 rng(14);
    for (int t = 0; t < 10; ++t) {
      const Vector w = random_point(rng, 6);
      const Vector v = random_point(rng, 6);
      CHECK(hvp_diff_norm(inst, w, v) <= 1e-10);
    }
  }
  SUBCASE("declared delta is amplitude * frequency^2") {
    ProblemInstance inst = nonconvex_testfn(10, 0.5, 2.0, 0.0, 13);
    CHECK(inst.delta == doctest::Approx(2.0).epsilon(1e-15));

    // Hessian of the perturbation is diag(-a b^2 cos(b w_i)): operator norm
    // bounded by a b^2 at every point.
    std::mt19937_64 rng(15);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Vector w = random_point(rng, 10, 2.0);
      const double norm = spectral_norm_power(
          [&](const Vector& v) {
            return Vector(inst.objective->hvp(w, v) - inst.proxy->hvp(w, v));
          },
          10, 40, 1e-9, rng);
      worst = std::max(worst, norm);
    }
    CHECK(worst <= 2.0 + 1e-9);
  }
  SUBCASE("estimate_delta recovers at least 90% of the declared value") {
    ProblemInstance inst = nonconvex_testfn(10, 0.5, 2.0, 0.0, 13);
    const double est = estimate_delta(*inst.objective, *inst.proxy, 50, 99);
    CHECK(est >= 0.9 * inst.delta);
    CHECK(est <= inst.delta + 1e-9);
  }
  SUBCASE("lower bound really bounds sampled values") {
    ProblemInstance inst = nonconvex_testfn(10, 0.5, 2.0, 0.0, 13);
    REQUIRE(inst.f_lower_bound.has_value());
    std::mt19937_64 rng(16);
    for (int t = 0; t < 200; ++t)
      CHECK(inst.objective->value(random_point(rng, 10, 3.0)) >=
            *inst.f_lower_bound);
  }
}

TEST_CASE("estimate_delta") {
  SUBCASE("identical oracles give zero") {
    const Dataset data = testutil::small_logistic(60, 5, 6);
    auto shared = std::make_shared<Dataset>(data);
    LogisticOracle a(shared, shared->y, 1e-3), b(shared, shared->y, 1e-3);
    CHECK(estimate_delta(a, b, 5, 1) <= 1e-9);
  }
  SUBCASE("constant diagonal difference is recovered") {
    std::mt19937_64 rng(17);
    Matrix G(6, 6);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j)
        G(i, j) = std::normal_distribution<double>()(rng);
    Matrix P = G * G.transpose() + 6.0 * Matrix::Identity(6, 6);
    Matrix Pd = P;
    Pd(0, 0) -= 0.3;
    QuadraticOracle L(P, Vector::Zero(6), 0.0);
    QuadraticOracle F(Pd, Vector::Zero(6), 0.0);
    CHECK(estimate_delta(L, F, 5, 2) == doctest::Approx(0.3).epsilon(1e-6));
  }
  SUBCASE("label-free pair on the mushrooms-scale data") {
    const Dataset& data = testutil::mushrooms();
    ProblemInstance inst = logistic_pair(data, 0.0, ProxyKind::label_free());
    const double est = estimate_delta(*inst.objective, *inst.proxy, 10, 3);
    CHECK(est <= 1e-8 * inst.H_proxy);
  }
  SUBCASE("oracles without hvp are rejected") {
    struct NoHvp final : FunctionOracle {
      Index dim() const override { return 2; }
      double value(const Vector&) const override { return 0.0; }
      Vector gradient(const Vector& w) const override {
        return Vector::Zero(w.size());
      }
    } a, b;
    CHECK_THROWS_AS(estimate_delta(a, b, 3, 1), CapabilityError);
  }
}

TEST_CASE("quadratic testbed carries an exact reference and constants") {
  ProblemInstance inst = quadratic_testbed(20, 1.0, 1e3, 0.0, 1.0, 5);
  REQUIRE(inst.reference.has_value());
  CHECK(inst.objective->gradient(inst.reference->w_star).norm() <= 1e-9);
  CHECK(inst.objective->value(inst.reference->w_star) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inst.delta == 0.0);
  CHECK(inst.mu == 1.0);
  CHECK(inst.H_proxy == doctest::Approx(1e3).epsilon(1e-12));

  // alpha > 0 degrades similarity proportionally
  ProblemInstance half = quadratic_testbed(20, 1.0, 1e3, 0.5, 1.0, 5);
  CHECK(half.delta == doctest::Approx(500.0).epsilon(1e-12));
  const double est = estimate_delta(*half.objective, *half.proxy, 3, 4);
  CHECK(est == doctest::Approx(500.0).epsilon(1e-3));
}

TEST_CASE("logistic smoothness by power iteration matches the eigensolver") {
  const Dataset data = testutil::small_logistic(100, 7, 19);
  const double H_pi = logistic_smoothness(data);
  const Matrix C = data.X.transpose() * data.X / static_cast<double>(data.n());
  const double H_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues().maxCoeff() / 4.0;
  CHECK(H_pi == doctest::Approx(H_eig).epsilon(1e-8));
}

TEST_CASE("logistic_pair validates inputs") {
  Dataset bad = testutil::small_logistic(10, 3, 1);
  bad.y[0] = 0.5;
  CHECK_THROWS_AS(logistic_pair(bad, 0.0, ProxyKind::label_free()),
                  ContractViolation);
  CHECK_THROWS_AS(
      logistic_pair(testutil::small_logistic(10, 3, 1), 0.0,
                    ProxyKind::covariance()),
      ContractViolation);
  CHECK_THROWS_AS(
      logistic_pair(testutil::small_logistic(10, 3, 1), 0.0,
                    ProxyKind::subsample(99, 1)),
      ContractViolation);
}
