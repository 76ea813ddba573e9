#include <doctest.h>

#include <memory>
#include <random>

#include "proxyprox/gradient_source.hpp"
#include "proxyprox/oracle.hpp"
#include "proxyprox/problems.hpp"
#include "test_util.hpp"

using namespace proxyprox;
using testutil::random_point;

namespace {

struct HalfSqNorm final : FunctionOracle {
  Index d;
  explicit HalfSqNorm(Index d) : d(d) {}
  Index dim() const override { return d; }
  double value(const Vector& w) const override { return 0.5 * w.squaredNorm(); }
  Vector gradient(const Vector& w) const override { return w; }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector&, const Vector& v) const override { return v; }
};

struct ConstantZero final : FunctionOracle {
  Index d;
  explicit ConstantZero(Index d) : d(d) {}
  Index dim() const override { return d; }
  double value(const Vector&) const override { return 0.0; }
  Vector gradient(const Vector& w) const override {
    return Vector::Zero(w.size());
  }
};

// Every oracle family shipped in the repo, small enough for repeated
// finite-difference sweeps.
std::vector<std::shared_ptr<const FunctionOracle>> shipped_oracles() {
  std::vector<std::shared_ptr<const FunctionOracle>> out;
  auto tiny = std::make_shared<Dataset>(testutil::tiny_logistic());
  out.push_back(std::make_shared<LogisticOracle>(tiny, tiny->y, 0.0));
  out.push_back(std::make_shared<LogisticOracle>(tiny, Vector::Ones(5), 1e-3));
  out.push_back(std::make_shared<SubsetLogisticOracle>(
      tiny, std::vector<Index>{0, 2, 4}, 1e-3));
  out.push_back(std::make_shared<LeastSquaresOracle>(
      std::make_shared<Dataset>(make_spectrum_regression(6, 100.0, 3)), 0.1));
  {
    std::mt19937_64 rng(5);
    Matrix G(4, 4);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 4; ++j)
        G(i, j) = std::normal_distribution<double>()(rng);
    Matrix P = G * G.transpose();
    out.push_back(std::make_shared<QuadraticOracle>(P, random_point(rng, 4), 0.7));
  }
  {
    std::mt19937_64 rng(6);
    RowMajorMatrix A(10, 4);
    for (Index i = 0; i < 10; ++i)
      for (Index j = 0; j < 4; ++j)
        A(i, j) = std::normal_distribution<double>()(rng);
    out.push_back(std::make_shared<CosineQuadraticOracle>(
        A, Vector(A * random_point(rng, 4)), 0.5, 2.0));
  }
  return out;
}

}  // namespace

TEST_CASE("finite_diff_gradient on the half squared norm") {
  HalfSqNorm f(2);
  Vector w(2);
  w << 1.0, 2.0;
  const Vector g = finite_diff_gradient(f, w, 1e-5);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("finite_diff_gradient of a constant function is zero") {
  ConstantZero f(4);
  std::mt19937_64 rng(1);
  const Vector g = finite_diff_gradient(f, random_point(rng, 4), 1e-4);
  CHECK(g.norm() == 0.0);
}

TEST_CASE("finite_diff_gradient matches the analytic logistic gradient") {
  auto tiny = std::make_shared<Dataset>(testutil::tiny_logistic());
  // 3-sample d=2 slice
  auto data3 = std::make_shared<Dataset>();
  data3->X = tiny->X.topRows(3);
  data3->y = tiny->y.head(3);
  LogisticOracle f(data3, data3->y, 0.0);
  Vector w(2);
  w << 0.1, -0.2;
  const Vector fd = finite_diff_gradient(f, w, 1e-5);
  const Vector an = f.gradient(w);
  CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
}

TEST_CASE("finite_diff_gradient reports the offending coordinate") {
  struct Bad final : FunctionOracle {
    Index dim() const override { return 2; }
    double value(const Vector& w) const override {
      return w[1] > 0.5 ? std::numeric_limits<double>::infinity() : w.sum();
    }
    Vector gradient(const Vector& w) const override {
      return Vector::Ones(w.size());
    }
  } f;
  Vector w(2);
  w << 0.0, 0.5;
  CHECK_THROWS_WITH_AS(finite_diff_gradient(f, w, 1e-3),
                       doctest::Contains("coordinate 1"), EvalError);
}

TEST_CASE("squared_distance") {
  Vector u(2), v(2);
  u << 1, 0;
  v << 0, 1;
  CHECK(squared_distance(u, u) == 0.0);
  CHECK(squared_distance(u, v) == 2.0);
  Vector a(2), b(2);
  a << 3, 4;
  b << 0, 0;
  CHECK(squared_distance(a, b) == 25.0);
  Vector w3(3);
  CHECK_THROWS_AS(squared_distance(u, w3), ContractViolation);
}

TEST_CASE("every shipped oracle passes the finite-difference check") {
  std::mt19937_64 rng(42);
  for (const auto& oracle : shipped_oracles()) {
    for (int t = 0; t < 20; ++t) {
      const Vector w = random_point(rng, oracle->dim());
      const Vector fd = finite_diff_gradient(*oracle, w, 1e-5);
      const Vector an = oracle->gradient(w);
      CHECK((fd - an).norm() <= 1e-5 * std::max(1.0, an.norm()));
    }
  }
}

TEST_CASE("hvp agrees with finite differences of the gradient") {
  std::mt19937_64 rng(43);
  for (const auto& oracle : shipped_oracles()) {
    if (!oracle->has_hvp()) continue;
    for (int t = 0; t < 5; ++t) {
      const Vector w = random_point(rng, oracle->dim());
      const Vector v = random_point(rng, oracle->dim());
      const double h = 1e-5;
      const Vector fd =
          (oracle->gradient(w + h * v) - oracle->gradient(w - h * v)) /
          (2.0 * h);
      const Vector an = oracle->hvp(w, v);
      CHECK((fd - an).norm() <= 1e-4 * std::max(1.0, an.norm()));
    }
  }
}

TEST_CASE("exact gradient source returns the gradient with sigma2 = 0") {
  auto f = std::make_shared<HalfSqNorm>(3);
  ExactGradientSource source(f);
  std::mt19937_64 rng(7);
  const Vector w = random_point(rng, 3);
  CHECK(source.sample(w) == f->gradient(w));
  CHECK(source.sigma2() == 0.0);
  CHECK(source.draws_used() == 1);
  CHECK_FALSE(source.is_stochastic());
}

TEST_CASE("gaussian source: unbiased, variance at the declared level") {
  auto f = std::make_shared<HalfSqNorm>(5);
  const double sigma2 = 0.8;
  GaussianGradientSource source(f, sigma2, 99);
  std::mt19937_64 rng(8);
  const Vector w = random_point(rng, 5);
  const Vector g = f->gradient(w);

  const int n = 20000;
  Vector mean = Vector::Zero(5);
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector s = source.sample(w);
    mean += s;
    var += (s - g).squaredNorm();
  }
  mean /= n;
  var /= n;
  // O(sigma / sqrt(n)) mean error, three sigma of slack
  CHECK((mean - g).norm() <= 3.0 * std::sqrt(sigma2 / n) + 1e-12);
  CHECK(var <= sigma2 * 1.1);
  CHECK(var >= sigma2 * 0.9);
  CHECK(source.draws_used() == n);
}

TEST_CASE("minibatch source: unbiased with exact finite-sum mean") {
  auto data = std::make_shared<Dataset>(testutil::tiny_logistic());
  auto f = std::make_shared<LogisticOracle>(data, data->y, 1e-2);
  std::mt19937_64 rng(9);
  const Vector w = random_point(rng, 2);
  const Vector full = f->gradient(w);

  // finite-sum identity: the average of all per-term gradients is exact
  Vector avg = Vector::Zero(2);
  for (Index i = 0; i < f->num_terms(); ++i) avg += f->term_gradient(i, w);
  avg /= static_cast<double>(f->num_terms());
  CHECK((avg - full).norm() <= 1e-12);

  const double sigma2 = minibatch_sigma2(*f, w, 2);
  MinibatchGradientSource source(f, 2, sigma2, 1234);
  const int n = 20000;
  Vector mean = Vector::Zero(2);
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector s = source.sample(w);
    mean += s;
    var += (s - full).squaredNorm();
  }
  mean /= n;
  var /= n;
  CHECK((mean - full).norm() <= 3.0 * std::sqrt(sigma2 / n) + 1e-12);
  CHECK(var <= sigma2 * 1.1);
}

TEST_CASE("equal seeds give bit-identical draw sequences") {
  auto f = std::make_shared<HalfSqNorm>(4);
  GaussianGradientSource a(f, 1.0, 321), b(f, 1.0, 321);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const Vector w = random_point(rng, 4);
    const Vector ga = a.sample(w);
    const Vector gb = b.sample(w);
    CHECK(ga == gb);
  }
}

TEST_CASE("problem instance validation") {
  auto f = std::make_shared<HalfSqNorm>(3);
  ProblemInstance p;
  p.objective = f;
  p.proxy = f;
  p.grad_factory = [f](std::uint64_t) {
    return std::make_unique<ExactGradientSource>(f);
  };
  p.delta = 0.0;
  p.mu = 1.0;
  p.H_proxy = 1.0;
  CHECK_NOTHROW(p.validate());
  p.mu = 5.0;  // exceeds H + delta
  CHECK_THROWS_AS(p.validate(), ContractViolation);
  p.mu = 1.0;
  p.delta = -1.0;
  CHECK_THROWS_AS(p.validate(), ContractViolation);
}

TEST_CASE("spectral_norm_power finds the top eigenvalue") {
  std::mt19937_64 rng(11);
  Matrix D = Vector::LinSpaced(6, 1.0, 6.0).asDiagonal();
  const double est = spectral_norm_power(
      [&](const Vector& v) { return Vector(D * v); }, 6, 200, 1e-12, rng);
  CHECK(est == doctest::Approx(6.0).epsilon(1e-6));
}
