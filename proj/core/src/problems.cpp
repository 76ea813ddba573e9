#include "proxyprox/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "proxyprox/data_io.hpp"

namespace proxyprox {

double sigmoid_stable(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus_stable(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// ---------------------------------------------------------------------------
// oracles

QuadraticOracle::QuadraticOracle(Matrix P, Vector b, double c0)
    : P_(std::move(P)), b_(std::move(b)), c0_(c0) {
  require(P_.rows() == P_.cols() && P_.rows() == b_.size(),
          "quadratic oracle: shape mismatch");
}

double QuadraticOracle::value(const Vector& w) const {
  return 0.5 * w.dot(P_ * w) + b_.dot(w) + c0_;
}

Vector QuadraticOracle::gradient(const Vector& w) const { return P_ * w + b_; }

LeastSquaresOracle::LeastSquaresOracle(std::shared_ptr<const Dataset> data,
                                       double reg)
    : data_(std::move(data)), reg_(reg) {
  data_->validate();
  require(reg_ >= 0.0, "least squares: reg must be >= 0");
}

double LeastSquaresOracle::value(const Vector& w) const {
  const Vector r = data_->X * w - data_->y;
  return 0.5 * r.squaredNorm() / static_cast<double>(data_->n()) +
         0.5 * reg_ * w.squaredNorm();
}

Vector LeastSquaresOracle::gradient(const Vector& w) const {
  const Vector r = data_->X * w - data_->y;
  return data_->X.transpose() * r / static_cast<double>(data_->n()) + reg_ * w;
}

Vector LeastSquaresOracle::hvp(const Vector&, const Vector& v) const {
  return data_->X.transpose() * (data_->X * v) /
             static_cast<double>(data_->n()) +
         reg_ * v;
}

Vector LeastSquaresOracle::term_gradient(Index i, const Vector& w) const {
  const double r = data_->X.row(i).dot(w) - data_->y[i];
  return r * data_->X.row(i).transpose() + reg_ * w;
}

LogisticOracle::LogisticOracle(std::shared_ptr<const Dataset> data,
                               Vector labels, double reg)
    : data_(std::move(data)), labels_(std::move(labels)), reg_(reg) {
  data_->validate();
  require(labels_.size() == data_->n(), "logistic: label count mismatch");
  require(reg_ >= 0.0, "logistic: reg must be >= 0");
  for (Index i = 0; i < labels_.size(); ++i)
    require(labels_[i] == 0.0 || labels_[i] == 1.0,
            "logistic: labels must be binary");
}

double LogisticOracle::value(const Vector& w) const {
  const Vector z = data_->X * w;
  double loss = 0.0;
  for (Index i = 0; i < z.size(); ++i)
    loss += softplus_stable(z[i]) - labels_[i] * z[i];
  return loss / static_cast<double>(data_->n()) + 0.5 * reg_ * w.squaredNorm();
}

Vector LogisticOracle::gradient(const Vector& w) const {
  Vector z = data_->X * w;
  for (Index i = 0; i < z.size(); ++i) z[i] = sigmoid_stable(z[i]) - labels_[i];
  return data_->X.transpose() * z / static_cast<double>(data_->n()) + reg_ * w;
}

Vector LogisticOracle::hvp(const Vector& w, const Vector& v) const {
  const Vector z = data_->X * w;
  Vector xv = data_->X * v;
  for (Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid_stable(z[i]);
    xv[i] *= s * (1.0 - s);
  }
  return data_->X.transpose() * xv / static_cast<double>(data_->n()) + reg_ * v;
}

Vector LogisticOracle::term_gradient(Index i, const Vector& w) const {
  const double s = sigmoid_stable(data_->X.row(i).dot(w));
  return (s - labels_[i]) * data_->X.row(i).transpose() + reg_ * w;
}

SubsetLogisticOracle::SubsetLogisticOracle(std::shared_ptr<const Dataset> data,
                                           std::vector<Index> rows, double reg)
    : data_(std::move(data)), rows_(std::move(rows)), reg_(reg) {
  require(!rows_.empty(), "subset logistic: empty subset");
  for (Index r : rows_)
    require(r >= 0 && r < data_->n(), "subset logistic: row out of range");
}

Index SubsetLogisticOracle::dim() const { return data_->d(); }
Index SubsetLogisticOracle::num_terms() const {
  return static_cast<Index>(rows_.size());
}

double SubsetLogisticOracle::value(const Vector& w) const {
  double loss = 0.0;
  for (Index r : rows_) {
    const double z = data_->X.row(r).dot(w);
    loss += softplus_stable(z) - data_->y[r] * z;
  }
  return loss / static_cast<double>(rows_.size()) +
         0.5 * reg_ * w.squaredNorm();
}

Vector SubsetLogisticOracle::gradient(const Vector& w) const {
  Vector g = Vector::Zero(dim());
  for (Index r : rows_) {
    const double s = sigmoid_stable(data_->X.row(r).dot(w));
    g += (s - data_->y[r]) * data_->X.row(r).transpose();
  }
  return g / static_cast<double>(rows_.size()) + reg_ * w;
}

Vector SubsetLogisticOracle::hvp(const Vector& w, const Vector& v) const {
  Vector g = Vector::Zero(dim());
  for (Index r : rows_) {
    const double s = sigmoid_stable(data_->X.row(r).dot(w));
    g += (s * (1.0 - s) * data_->X.row(r).dot(v)) *
         data_->X.row(r).transpose();
  }
  return g / static_cast<double>(rows_.size()) + reg_ * v;
}

Vector SubsetLogisticOracle::term_gradient(Index i, const Vector& w) const {
  const Index r = rows_[static_cast<std::size_t>(i)];
  const double s = sigmoid_stable(data_->X.row(r).dot(w));
  return (s - data_->y[r]) * data_->X.row(r).transpose() + reg_ * w;
}

CosineQuadraticOracle::CosineQuadraticOracle(RowMajorMatrix A, Vector y,
                                             double amplitude, double frequency)
    : A_(std::move(A)), y_(std::move(y)), a_(amplitude), b_(frequency) {
  require(A_.rows() == y_.size(), "cosine quadratic: shape mismatch");
  require(a_ >= 0.0 && b_ > 0.0, "cosine quadratic: bad amplitude/frequency");
}

double CosineQuadraticOracle::value(const Vector& w) const {
  const Vector r = A_ * w - y_;
  double c = 0.0;
  for (Index i = 0; i < w.size(); ++i) c += std::cos(b_ * w[i]);
  return 0.5 * r.squaredNorm() / static_cast<double>(A_.rows()) + a_ * c;
}

Vector CosineQuadraticOracle::gradient(const Vector& w) const {
  const Vector r = A_ * w - y_;
  Vector g = A_.transpose() * r / static_cast<double>(A_.rows());
  for (Index i = 0; i < w.size(); ++i) g[i] -= a_ * b_ * std::sin(b_ * w[i]);
  return g;
}

Vector CosineQuadraticOracle::hvp(const Vector& w, const Vector& v) const {
  Vector g = A_.transpose() * (A_ * v) / static_cast<double>(A_.rows());
  for (Index i = 0; i < w.size(); ++i)
    g[i] -= a_ * b_ * b_ * std::cos(b_ * w[i]) * v[i];
  return g;
}

// ---------------------------------------------------------------------------
// instance builders

double minibatch_sigma2(const FiniteSumOracle& oracle, const Vector& w,
                        Index batch_size) {
  require(batch_size >= 1, "minibatch_sigma2: batch_size must be positive");
  const Vector full = oracle.gradient(w);
  double acc = 0.0;
  for (Index i = 0; i < oracle.num_terms(); ++i)
    acc += (oracle.term_gradient(i, w) - full).squaredNorm();
  return acc / static_cast<double>(oracle.num_terms()) /
         static_cast<double>(batch_size);
}

namespace {

// Declared variance bound: exact single-draw variance at the origin and a few
// seeded probe points, with 5% headroom.
double declared_sigma2(const FiniteSumOracle& oracle, Index batch_size,
                       std::uint64_t seed) {
  std::mt19937_64 rng(rng_fork(seed, "sigma2-probes"));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = minibatch_sigma2(oracle, Vector::Zero(oracle.dim()), batch_size);
  for (int p = 0; p < 3; ++p) {
    Vector w(oracle.dim());
    for (Index i = 0; i < w.size(); ++i) w[i] = 0.5 * normal(rng);
    worst = std::max(worst, minibatch_sigma2(oracle, w, batch_size));
  }
  return 1.05 * worst;
}

GradSourceFactory finite_sum_factory(std::shared_ptr<const FiniteSumOracle> o,
                                     Index batch_size, double sigma2) {
  if (batch_size <= 0) {
    return [o](std::uint64_t) {
      return std::make_unique<ExactGradientSource>(o);
    };
  }
  return [o, batch_size, sigma2](std::uint64_t seed) {
    return std::make_unique<MinibatchGradientSource>(o, batch_size, sigma2,
                                                     seed);
  };
}

double lambda_max_power(const RowMajorMatrix& X, int iters = 200,
                        double tol = 1e-12) {
  std::mt19937_64 rng(0x5eedULL);
  const double n = static_cast<double>(X.rows());
  return spectral_norm_power(
      [&](const Vector& v) { return Vector(X.transpose() * (X * v) / n); },
      X.cols(), iters, tol, rng);
}

}  // namespace

double logistic_smoothness(const Dataset& data) {
  return lambda_max_power(data.X) / 4.0;
}

Dataset make_spectrum_regression(Index d, double cond, std::uint64_t seed) {
  require(d >= 1 && cond >= 1.0, "make_spectrum_regression: bad shape");
  std::mt19937_64 rng(rng_fork(seed, "spectrum-regression"));
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector lambda(d);
  for (Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / (d - 1);
    lambda[i] = std::pow(cond, t);
  }
  auto random_orthogonal = [&]() {
    Matrix G(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) G(i, j) = normal(rng);
    return Matrix(Eigen::HouseholderQR<Matrix>(G).householderQ());
  };
  const Matrix U = random_orthogonal();
  const Matrix V = random_orthogonal();
  const double n = static_cast<double>(d);

  Dataset data;
  data.X = U * (n * lambda).cwiseSqrt().asDiagonal() * V.transpose();
  Vector w_plant(d);
  for (Index i = 0; i < d; ++i) w_plant[i] = normal(rng);
  data.y = data.X * w_plant;
  return data;
}

ProblemInstance least_squares_pair(const Dataset& data, double reg_mu,
                                   Index batch_size) {
  data.validate();
  require(reg_mu >= 0.0, "least_squares_pair: reg_mu must be >= 0");
  auto shared = std::make_shared<Dataset>(data);
  auto objective = std::make_shared<LeastSquaresOracle>(shared, reg_mu);

  const double n = static_cast<double>(shared->n());
  const Matrix C = shared->X.transpose() * shared->X / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
  if (eig.info() != Eigen::Success)
    throw LinAlgError("least_squares_pair: eigendecomposition failed");
  const double lam_min = std::max(0.0, eig.eigenvalues().minCoeff());
  const double lam_max = eig.eigenvalues().maxCoeff();

  Matrix P = C;
  P.diagonal().array() += reg_mu;
  auto proxy =
      std::make_shared<QuadraticOracle>(P, Vector::Zero(shared->d()), 0.0);

  ProblemInstance inst;
  inst.objective = objective;
  inst.proxy = proxy;
  inst.delta = 0.0;
  inst.mu = reg_mu + lam_min;
  inst.H_proxy = lam_max + reg_mu;
  inst.sigma2 = batch_size > 0 ? declared_sigma2(*objective, batch_size, 17) : 0.0;
  inst.grad_factory = finite_sum_factory(objective, batch_size, inst.sigma2);
  inst.dataset_hash = dataset_hash(data);
  inst.scaling_mode = data.scaling;
  inst.tag = "least_squares";

  // Analytic reference through the normal equations, kept only when the
  // certificate actually holds (X may be rank-deficient with reg_mu = 0).
  {
    const Vector rhs = shared->X.transpose() * shared->y / n;
    Eigen::LDLT<Matrix> ldlt(P);
    if (ldlt.info() == Eigen::Success) {
      Vector w_star = ldlt.solve(rhs);
      w_star += ldlt.solve(rhs - P * w_star);
      const double gn = objective->gradient(w_star).norm();
      const double f_star = objective->value(w_star);
      if (w_star.allFinite() && gn <= 1e-9 * std::max(1.0, std::abs(f_star)))
        inst.reference = ReferenceSolution{w_star, f_star, gn};
    }
  }
  if (inst.reference) inst.f_lower_bound = inst.reference->f_star;
  inst.validate();
  return inst;
}

ProblemInstance logistic_pair(const Dataset& data, double reg_mu,
                              const ProxyKind& kind, Index batch_size) {
  data.validate_classification();
  require(reg_mu >= 0.0, "logistic_pair: reg_mu must be >= 0");
  auto shared = std::make_shared<Dataset>(data);
  auto objective =
      std::make_shared<LogisticOracle>(shared, shared->y, reg_mu);

  const double n = static_cast<double>(shared->n());
  const double H = lambda_max_power(shared->X) / 4.0 + reg_mu;

  ProblemInstance inst;
  inst.objective = objective;
  inst.mu = reg_mu;
  inst.tag = "logistic";

  std::shared_ptr<const FiniteSumOracle> proxy_fs;
  switch (kind.tag) {
    case ProxyKind::Tag::zero: {
      inst.proxy = std::make_shared<QuadraticOracle>(
          QuadraticOracle::zero(shared->d()));
      inst.delta = H;  // h = L itself
      inst.H_proxy = 0.0;
      break;
    }
    case ProxyKind::Tag::label_free_logistic: {
      auto p = std::make_shared<LogisticOracle>(
          shared, Vector::Ones(shared->n()), reg_mu);
      proxy_fs = p;
      inst.proxy = p;
      inst.delta = 0.0;  // Hessian is label-free
      inst.H_proxy = H;
      break;
    }
    case ProxyKind::Tag::random_label_logistic: {
      std::mt19937_64 rng(rng_fork(kind.seed, "random-labels"));
      std::uniform_int_distribution<int> coin(0, 1);
      Vector labels(shared->n());
      for (Index i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<double>(coin(rng));
      auto p = std::make_shared<LogisticOracle>(shared, labels, reg_mu);
      proxy_fs = p;
      inst.proxy = p;
      inst.delta = 0.0;  // Hessian is label-free
      inst.H_proxy = H;
      break;
    }
    case ProxyKind::Tag::subsample: {
      require(kind.m >= 1 && kind.m <= shared->n(),
              "logistic_pair: subsample size out of range");
      std::vector<Index> all(shared->n());
      std::iota(all.begin(), all.end(), Index{0});
      std::vector<Index> rows;
      std::mt19937_64 rng(rng_fork(kind.seed, "subsample"));
      std::sample(all.begin(), all.end(), std::back_inserter(rows),
                  static_cast<std::size_t>(kind.m), rng);
      auto p = std::make_shared<SubsetLogisticOracle>(shared, rows, reg_mu);
      proxy_fs = p;
      inst.proxy = p;
      inst.H_proxy = H;  // same smoothness bound family
      inst.delta = estimate_delta(*objective, *p, 20,
                                  rng_fork(kind.seed, "delta-estimate"));
      break;
    }
    default:
      throw ContractViolation("logistic_pair: unsupported proxy kind");
  }

  inst.sigma2 =
      batch_size > 0 ? declared_sigma2(*objective, batch_size, 17) : 0.0;
  inst.grad_factory = finite_sum_factory(objective, batch_size, inst.sigma2);
  if (proxy_fs) {
    const double rho2 =
        batch_size > 0 ? declared_sigma2(*proxy_fs, batch_size, 18) : 0.0;
    inst.proxy_grad_factory = finite_sum_factory(proxy_fs, batch_size, rho2);
  }
  inst.dataset_hash = dataset_hash(data);
  inst.scaling_mode = data.scaling;
  (void)n;
  inst.validate();
  return inst;
}

ProblemInstance nonconvex_testfn(Index d, double amplitude, double frequency,
                                 double sigma2, std::uint64_t seed) {
  require(d >= 1, "nonconvex_testfn: d must be >= 1");
  require(amplitude >= 0.0 && frequency > 0.0,
          "nonconvex_testfn: bad amplitude/frequency");

  const Index n = 5 * d;
  std::mt19937_64 rng(rng_fork(seed, "nonconvex-testfn"));
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMajorMatrix A(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) A(i, j) = normal(rng);
  Vector w_plant(d);
  for (Index j = 0; j < d; ++j) w_plant[j] = normal(rng);
  const Vector y = A * w_plant;

  auto objective =
      std::make_shared<CosineQuadraticOracle>(A, y, amplitude, frequency);

  const double nn = static_cast<double>(n);
  const Matrix P = A.transpose() * A / nn;
  const Vector b = -A.transpose() * y / nn;
  const double c0 = 0.5 * y.squaredNorm() / nn;
  auto proxy = std::make_shared<QuadraticOracle>(P, b, c0);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(P);

  ProblemInstance inst;
  inst.objective = objective;
  inst.proxy = proxy;
  inst.delta = amplitude * frequency * frequency;
  inst.mu = 0.0;
  inst.H_proxy = eig.eigenvalues().maxCoeff();
  inst.sigma2 = sigma2;
  inst.grad_factory = [objective, sigma2](std::uint64_t s) {
    return std::make_unique<GaussianGradientSource>(objective, sigma2, s);
  };
  // Quadratic part is minimized at w_plant with value 0; the cosine sum is
  // bounded below by -amplitude * d.
  inst.f_lower_bound = proxy->value(w_plant) - amplitude * static_cast<double>(d);
  inst.tag = "nonconvex_testfn";
  inst.validate();
  return inst;
}

ProblemInstance quadratic_testbed(Index d, double mu, double cond,
                                  double proxy_alpha, double sigma2,
                                  std::uint64_t seed) {
  require(d >= 1 && mu > 0.0 && cond >= 1.0, "quadratic_testbed: bad shape");
  require(proxy_alpha >= 0.0 && proxy_alpha <= 1.0,
          "quadratic_testbed: alpha in [0,1]");

  std::mt19937_64 rng(rng_fork(seed, "quadratic-testbed"));
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector lambda(d);
  for (Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / (d - 1);
    lambda[i] = mu * std::pow(cond, t);
  }
  Matrix G(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) G(i, j) = normal(rng);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  const Matrix A = Q * lambda.asDiagonal() * Q.transpose();

  Vector w_star(d);
  for (Index i = 0; i < d; ++i) w_star[i] = normal(rng);

  auto objective = std::make_shared<QuadraticOracle>(
      A, Vector(-A * w_star), 0.5 * w_star.dot(A * w_star));
  auto proxy = std::make_shared<QuadraticOracle>(
      Matrix((1.0 - proxy_alpha) * A), Vector::Zero(d), 0.0);

  const double H = mu * cond;
  ProblemInstance inst;
  inst.objective = objective;
  inst.proxy = proxy;
  inst.delta = proxy_alpha * H;
  inst.mu = mu;
  inst.H_proxy = (1.0 - proxy_alpha) * H;
  inst.sigma2 = sigma2;
  if (sigma2 > 0.0) {
    inst.grad_factory = [objective, sigma2](std::uint64_t s) {
      return std::make_unique<GaussianGradientSource>(objective, sigma2, s);
    };
  } else {
    inst.grad_factory = [objective](std::uint64_t) {
      return std::make_unique<ExactGradientSource>(objective);
    };
  }
  inst.reference = ReferenceSolution{w_star, 0.0, 0.0};
  inst.f_lower_bound = 0.0;
  inst.tag = "quadratic_testbed";
  inst.validate();
  return inst;
}

double estimate_delta(const FunctionOracle& L, const FunctionOracle& F,
                      int probes, std::uint64_t seed) {
  require(probes >= 1, "estimate_delta: probes must be >= 1");
  if (!L.has_hvp() || !F.has_hvp())
    throw CapabilityError("estimate_delta: both oracles need hvp support");
  require(L.dim() == F.dim(), "estimate_delta: dimension mismatch");

  std::mt19937_64 rng(rng_fork(seed, "delta-probes"));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vector w(L.dim());
    for (Index i = 0; i < w.size(); ++i) w[i] = 2.0 * normal(rng);
    const double norm = spectral_norm_power(
        [&](const Vector& v) { return Vector(L.hvp(w, v) - F.hvp(w, v)); },
        L.dim(), 30, 1e-6, rng);
    worst = std::max(worst, norm);
  }
  return worst;
}

}  // namespace proxyprox
