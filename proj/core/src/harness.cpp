#include "proxyprox/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "proxyprox/data_io.hpp"

namespace proxyprox {

using nlohmann::json;

// ---------------------------------------------------------------------------
// reference solve

ReferenceSolution solve_reference(const FunctionOracle& oracle, double mu,
                                  double tol) {
  require(mu >= 0.0, "solve_reference: mu must be >= 0");
  require(tol > 0.0, "solve_reference: tol must be positive");
  const Index d = oracle.dim();
  const long long eval_cap = 10'000'000;
  long long evals = 0;

  Vector w = Vector::Zero(d);
  double f = oracle.value(w);
  Vector g = oracle.gradient(w);
  ++evals;
  double gn = g.norm();
  if (gn <= tol) return {w, f, gn};

  double H = std::max(mu, 1e-12);
  if (oracle.has_hvp()) {
    std::mt19937_64 rng(0xc0ffeeULL);
    const Vector w0 = w;
    H = std::max(H, spectral_norm_power(
                        [&](const Vector& v) { return oracle.hvp(w0, v); }, d,
                        60, 1e-9, rng));
  } else {
    // secant estimate of the curvature along the gradient direction
    const double h = 1e-4 / std::max(1.0, gn);
    const Vector g2 = oracle.gradient(w - h * g);
    ++evals;
    H = std::max(H, (g - g2).norm() / (h * gn));
  }

  Vector w_prev = w;
  Vector best_w = w;
  double best_f = f, best_gn = gn;
  double fista_t = 1.0;

  auto certify = [&](const Vector& point) -> std::optional<ReferenceSolution> {
    const Vector gw = oracle.gradient(point);
    ++evals;
    const double n2 = gw.norm();
    if (n2 < best_gn) {
      best_gn = n2;
      best_w = point;
      best_f = oracle.value(point);
    }
    if (n2 <= tol)
      return ReferenceSolution{point, oracle.value(point), n2};
    return std::nullopt;
  };

  long long it = 0;
  while (evals < eval_cap) {
    ++it;
    double beta;
    if (mu > 0.0) {
      const double theta = std::sqrt(std::min(1.0, mu / H));
      beta = (1.0 - theta) / (1.0 + theta);
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * fista_t * fista_t));
      beta = (fista_t - 1.0) / t_next;
      fista_t = t_next;
    }

    const Vector y = w + beta * (w - w_prev);
    const Vector gy = oracle.gradient(y);
    ++evals;
    const double fy = oracle.value(y);
    Vector w_next = y - gy / H;
    const double f_next = oracle.value(w_next);

    // Step halving: H too small for the local curvature.
    if (!std::isfinite(f_next) ||
        f_next > fy - 0.5 / H * gy.squaredNorm() + 1e-12 * (1.0 + std::abs(fy))) {
      H *= 2.0;
      w_prev = w;
      fista_t = 1.0;
      continue;
    }

    // Momentum restart when the step fights the gradient direction.
    if (gy.dot(w_next - w) > 0.0) {
      w_prev = w_next;
      fista_t = 1.0;
    } else {
      w_prev = w;
    }
    w = std::move(w_next);
    f = f_next;

    if (gy.norm() <= tol || it % 64 == 0) {
      if (auto done = certify(w)) return *done;
    }
  }
  throw UnconvergedError(best_w, best_gn,
                         "solve_reference: gradient-evaluation cap reached, "
                         "best ||grad|| = " +
                             std::to_string(best_gn));
}

namespace {

std::filesystem::path cache_dir() {
  if (const char* dir = std::getenv("PROXYPROX_CACHE_DIR"))
    return std::filesystem::path(dir);
  return std::filesystem::path(".proxyprox_cache");
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

ReferenceSolution solve_reference_cached(const FunctionOracle& oracle,
                                         double mu, double tol,
                                         const std::string& cache_key) {
  const auto path = cache_dir() / ("ref_" + cache_key + ".json");
  if (std::filesystem::exists(path)) {
    try {
      std::ifstream in(path);
      json j;
      in >> j;
      Vector w_star = vector_from_json(j.at("w_star"));
      if (w_star.size() == oracle.dim()) {
        const double gn = oracle.gradient(w_star).norm();
        if (gn <= tol) return {w_star, oracle.value(w_star), gn};
      }
    } catch (const std::exception&) {
      // fall through to a fresh solve
    }
  }
  ReferenceSolution ref = solve_reference(oracle, mu, tol);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir(), ec);
  if (!ec) {
    std::ofstream out(path);
    if (out) {
      json j;
      j["w_star"] = vector_to_json(ref.w_star);
      j["f_star"] = ref.f_star;
      j["grad_norm"] = ref.grad_norm_at_w_star;
      out << j.dump();
    }
  }
  return ref;
}

// ---------------------------------------------------------------------------
// experiment spec parsing

namespace {

void apply_key(ExperimentSpec& s, const std::string& key, const json& v) {
  auto str = [&] { return v.get<std::string>(); };
  auto num = [&] { return v.get<double>(); };
  auto integer = [&] { return v.get<long long>(); };
  auto boolean = [&] { return v.get<bool>(); };

  if (key == "experiment_id") s.experiment_id = str();
  else if (key == "problem_kind") s.problem_kind = str();
  else if (key == "dataset") s.dataset = str();
  else if (key == "scaling") s.scaling = str();
  else if (key == "reg_mu") s.reg_mu = num();
  else if (key == "reg_mu_rel_H") s.reg_mu_rel_H = num();
  else if (key == "synth_d") s.synth_d = integer();
  else if (key == "synth_mu") s.synth_mu = num();
  else if (key == "synth_cond") s.synth_cond = num();
  else if (key == "proxy_alpha") s.proxy_alpha = num();
  else if (key == "noise_sigma2") s.noise_sigma2 = num();
  else if (key == "nc_amplitude") s.nc_amplitude = num();
  else if (key == "nc_frequency") s.nc_frequency = num();
  else if (key == "problem_seed") s.problem_seed = v.get<std::uint64_t>();
  else if (key == "proxy") s.proxy = str();
  else if (key == "subsample_m") s.subsample_m = integer();
  else if (key == "algorithm") s.algorithm = str();
  else if (key == "mode") s.mode = str();
  else if (key == "eta") s.eta = num();
  else if (key == "eta_grid") s.eta_grid = v.get<std::vector<double>>();
  else if (key == "grid_steps") s.grid_steps = integer();
  else if (key == "K") s.K = integer();
  else if (key == "G2") s.G2 = num();
  else if (key == "G2_auto") s.G2_auto = boolean();
  else if (key == "epsilon") s.epsilon = num();
  else if (key == "batch_size") s.batch_size = integer();
  else if (key == "inner_solver") s.inner_solver = str();
  else if (key == "inner_max_steps") s.inner_max_steps = integer();
  else if (key == "inner_check_every") s.inner_check_every = integer();
  else if (key == "inner_step_size") s.inner_step_size = num();
  else if (key == "policy") s.policy = str();
  else if (key == "certified") s.certified = boolean();
  else if (key == "w0") s.w0 = str();
  else if (key == "replicates") s.replicates = integer();
  else if (key == "seed") s.seed = v.get<std::uint64_t>();
  else if (key == "output") s.output = str();
  else if (key == "compute_reference") s.compute_reference = boolean();
  else if (key == "regularize_mu") s.regularize_mu = num();
  else throw ConfigError("unknown spec key: " + key);
}

json kv_value_to_json(const std::string& raw) {
  // booleans, numbers, comma lists, otherwise strings
  if (raw == "true") return json(true);
  if (raw == "false") return json(false);
  if (raw.find(',') != std::string::npos) {
    json arr = json::array();
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ','))
      arr.push_back(std::stod(item));
    return arr;
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(raw, &used);
    if (used == raw.size()) return json(d);
  } catch (const std::exception&) {
  }
  return json(raw);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentSpec ExperimentSpec::parse_text(const std::string& text) {
  ExperimentSpec spec;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json doc = json::parse(text);
    for (auto it = doc.begin(); it != doc.end(); ++it)
      apply_key(spec, it.key(), it.value());
    return spec;
  }
  // flat key = value lines
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("spec line is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_key(spec, key, kv_value_to_json(value));
  }
  return spec;
}

ExperimentSpec ExperimentSpec::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

// ---------------------------------------------------------------------------
// problem construction

namespace {

ProxyKind proxy_from_spec(const ExperimentSpec& spec) {
  const std::uint64_t pseed = rng_fork(spec.problem_seed, "proxy");
  if (spec.proxy == "zero") return ProxyKind::zero();
  if (spec.proxy == "covariance") return ProxyKind::covariance();
  if (spec.proxy == "label_free") return ProxyKind::label_free();
  if (spec.proxy == "random_label") return ProxyKind::random_label(pseed);
  if (spec.proxy == "subsample")
    return ProxyKind::subsample(spec.subsample_m, pseed);
  throw ConfigError("unknown proxy kind: " + spec.proxy);
}

Vector initial_point(const ExperimentSpec& spec, Index d) {
  if (spec.w0 == "zero") return Vector::Zero(d);
  if (spec.w0.rfind("gaussian:", 0) == 0) {
    const double scale = std::stod(spec.w0.substr(9));
    std::mt19937_64 rng(rng_fork(spec.seed, "w0"));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector w(d);
    for (Index i = 0; i < d; ++i) w[i] = scale * normal(rng);
    return w;
  }
  throw ConfigError("unknown w0 spec: " + spec.w0);
}

std::string reference_cache_key(const ProblemInstance& problem) {
  std::ostringstream key;
  key << std::hex << problem.dataset_hash << "_" << problem.tag << "_";
  key.precision(17);
  key << problem.mu;
  return key.str();
}

}  // namespace

BuiltProblem build_problem(const ExperimentSpec& spec) {
  ProblemInstance problem;

  if (spec.problem_kind == "logistic" || spec.problem_kind == "least_squares") {
    Dataset data;
    if (!spec.dataset.empty()) {
      const std::string path = find_dataset(spec.dataset);
      if (path.empty())
        throw Error("dataset not found (searched cwd and PROXYPROX_DATA_DIR): " +
                    spec.dataset);
      data = parse_sparse_classification(path);
    } else if (spec.problem_kind == "least_squares") {
      data = make_spectrum_regression(spec.synth_d, spec.synth_cond,
                                      spec.problem_seed);
    } else {
      throw ConfigError("logistic problems need a dataset path");
    }
    data = scale_features(data, scaling_mode_from_string(spec.scaling));

    if (spec.problem_kind == "logistic") {
      double reg = spec.reg_mu;
      if (spec.reg_mu_rel_H >= 0.0)
        reg = spec.reg_mu_rel_H * logistic_smoothness(data);
      problem = logistic_pair(data, reg, proxy_from_spec(spec), spec.batch_size);
    } else {
      problem = least_squares_pair(data, spec.reg_mu, spec.batch_size);
    }
  } else if (spec.problem_kind == "quadratic") {
    problem = quadratic_testbed(spec.synth_d, spec.synth_mu, spec.synth_cond,
                                spec.proxy_alpha, spec.noise_sigma2,
                                spec.problem_seed);
  } else if (spec.problem_kind == "nonconvex") {
    problem = nonconvex_testfn(spec.synth_d, spec.nc_amplitude,
                               spec.nc_frequency, spec.noise_sigma2,
                               spec.problem_seed);
  } else {
    throw ConfigError("unknown problem_kind: " + spec.problem_kind);
  }

  if (spec.compute_reference && !problem.reference &&
      spec.problem_kind != "nonconvex") {
    problem.reference = solve_reference_cached(*problem.objective, problem.mu,
                                               1e-10,
                                               reference_cache_key(problem));
    problem.f_lower_bound = problem.reference->f_star;
  }

  Vector w0 = initial_point(spec, problem.dim());
  return {std::move(problem), std::move(w0)};
}

// ---------------------------------------------------------------------------
// running experiments

namespace {

Mode mode_from_string(const std::string& s) {
  if (s == "strongly_convex") return Mode::strongly_convex;
  if (s == "convex") return Mode::convex;
  if (s == "nonconvex") return Mode::nonconvex;
  throw ConfigError("unknown mode: " + s);
}

InnerSolverKind solver_from_string(const std::string& s) {
  if (s == "gd") return InnerSolverKind::gd;
  if (s == "sgd") return InnerSolverKind::sgd;
  if (s == "exact") return InnerSolverKind::exact_quadratic;
  throw ConfigError("unknown inner solver: " + s);
}

/// Running report points: the suboptimality series the bound checks consume.
/// strongly_convex -> weighted average, convex -> uniform average,
/// nonconvex -> the iterate against the lower bound, sgd runs -> the iterate.
std::vector<double> report_suboptimality(const RunTrace& trace,
                                         const ProblemInstance& problem,
                                         bool iterate_report) {
  const long long K = trace.cfg.K;
  std::vector<double> out(static_cast<std::size_t>(K),
                          std::numeric_limits<double>::quiet_NaN());
  if (trace.cfg.mode == Mode::nonconvex) {
    if (!problem.f_lower_bound) return out;
    for (long long k = 1; k <= K; ++k)
      out[k - 1] = trace.objective_values[static_cast<std::size_t>(k)] -
                   *problem.f_lower_bound;
    return out;
  }
  if (!problem.reference) return out;
  const double f_star = problem.reference->f_star;

  if (iterate_report) {
    for (long long k = 1; k <= K; ++k)
      out[k - 1] =
          trace.objective_values[static_cast<std::size_t>(k)] - f_star;
    return out;
  }

  // Stable running weighted mean: keep sums normalized by the newest weight,
  // S_k = S_{k-1}/(1+q) + w_k, A_k = A_{k-1}/(1+q) + 1.
  const double q = trace.cfg.mode == Mode::strongly_convex
                       ? 2.0 * trace.cfg.eta * problem.mu / 5.0
                       : 0.0;
  Vector S = Vector::Zero(problem.dim());
  double A = 0.0;
  for (long long k = 1; k <= K; ++k) {
    S = S / (1.0 + q) + trace.iterates[static_cast<std::size_t>(k)];
    A = A / (1.0 + q) + 1.0;
    out[k - 1] = problem.objective->value(S / A) - f_star;
  }
  return out;
}

double sample_stderr(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

void write_csv_value(std::ostream& os, double v) {
  os.precision(17);
  os << v;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  require(spec.replicates >= 1, "run_experiment: replicates must be >= 1");
  BuiltProblem built = build_problem(spec);
  ProblemInstance& problem = built.problem;
  const Vector w0 = built.w0;

  const Mode mode = mode_from_string(spec.mode);
  const bool is_sgd = spec.algorithm == "sgd";
  require(is_sgd || spec.algorithm == "proxyprox",
          "run_experiment: algorithm must be proxyprox or sgd");

  double eta = spec.eta;
  double G2 = spec.G2;
  long long K = spec.K;
  double mu_reg = spec.regularize_mu;

  if (spec.G2_auto) {
    require(problem.reference.has_value(),
            "run_experiment: G2_auto needs a reference solution for B^2");
    const double B2 = squared_distance(w0, problem.reference->w_star);
    if (mode == Mode::strongly_convex) {
      const auto sched = schedule_strongly_convex(problem, spec.epsilon, B2);
      if (K <= 0) K = sched.K;
      if (eta <= 0.0) eta = sched.eta;
      G2 = sched.G2;
    } else if (mode == Mode::convex) {
      auto sched = schedule_convex(problem, spec.epsilon, B2);
      if (K <= 0) K = sched.K;
      if (eta <= 0.0) {
        // recompute the min formula at the pinned K
        const double B = std::sqrt(B2);
        if (problem.sigma2 > 0.0) {
          eta = B / (std::sqrt(problem.sigma2) *
                     std::sqrt(static_cast<double>(K)));
          if (problem.delta > 0.0)
            eta = std::min(eta, 1.0 / (4.0 * problem.delta));
        } else {
          eta = sched.eta;
        }
      }
      const double Kd = static_cast<double>(K);
      G2 = problem.sigma2 / Kd +
           problem.delta * problem.delta * B2 / (Kd * Kd);
      mu_reg = 1.0 / (eta * Kd);
    }
  }
  require(K >= 1, "run_experiment: K must be resolved to >= 1");

  // Theorem-2 pipeline: run on the regularized pair, evaluate on the original.
  ProblemInstance run_problem = problem;
  if (!is_sgd && mu_reg > 0.0) run_problem = regularize_pair(problem, mu_reg, w0);

  auto make_cfg = [&](double eta_value, long long steps,
                      std::uint64_t seed) {
    OuterConfig cfg;
    cfg.eta = eta_value;
    cfg.K = steps;
    cfg.mode = mode;
    cfg.G2 = G2;
    cfg.solver = solver_from_string(spec.inner_solver);
    cfg.inner.max_steps = spec.inner_max_steps;
    cfg.inner.check_every = spec.inner_check_every;
    cfg.inner.step_size = spec.inner_step_size;
    cfg.inner.batch_size = spec.batch_size;
    cfg.w0 = w0;
    cfg.epsilon = spec.epsilon;
    cfg.seed = seed;
    cfg.policy =
        spec.policy == "abort" ? FailurePolicy::abort : FailurePolicy::warn;
    cfg.certified = spec.certified;
    cfg.batch_size = std::max<long long>(1, spec.batch_size);
    return cfg;
  };

  // Grid search: short runs, selection by loss after grid_steps outer steps.
  json grid_log = json::array();
  if (!spec.eta_grid.empty()) {
    double best_eta = spec.eta_grid.front();
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < spec.eta_grid.size(); ++gi) {
      const double cand = spec.eta_grid[gi];
      const std::uint64_t gseed = rng_fork(spec.seed, "grid");
      double loss = std::numeric_limits<double>::infinity();
      try {
        RunTrace t =
            is_sgd ? sgd_baseline(run_problem, cand, spec.grid_steps, w0, gseed)
                   : proxyprox_run(run_problem,
                                   make_cfg(cand, spec.grid_steps, gseed));
        loss = t.objective_values.back();
      } catch (const Error&) {
        // divergent candidate: keep +inf
      }
      grid_log.push_back({{"eta", cand}, {"loss_at_grid_steps", loss}});
      if (loss < best_loss) {
        best_loss = loss;
        best_eta = cand;
      }
    }
    eta = best_eta;
    if (mu_reg > 0.0) {
      // keep mu_reg = 1/(eta K) consistent with the tuned eta
      mu_reg = 1.0 / (eta * static_cast<double>(K));
      run_problem = regularize_pair(problem, mu_reg, w0);
    }
  }
  require(eta > 0.0, "run_experiment: eta must be resolved to > 0");

  ExperimentResult result;
  result.eta_used = eta;
  result.G2_used = G2;
  for (long long r = 0; r < spec.replicates; ++r) {
    const std::uint64_t rseed =
        rng_fork(spec.seed, "replicate-" + std::to_string(r));
    RunTrace trace =
        is_sgd ? sgd_baseline(run_problem, eta, K, w0, rseed)
               : proxyprox_run(run_problem, make_cfg(eta, K, rseed));
    result.traces.push_back(std::move(trace));
  }

  // ------------------------------------------------------------------ output
  std::filesystem::create_directories(spec.output);
  const std::filesystem::path base =
      std::filesystem::path(spec.output) / spec.experiment_id;
  result.trace_csv = base.string() + ".csv";
  result.aggregate_csv = base.string() + "_aggregate.csv";
  result.sidecar_json = base.string() + ".json";

  const long long budget_scale = std::max<long long>(1, spec.batch_size);
  std::vector<std::vector<double>> subopt;
  for (const RunTrace& t : result.traces)
    subopt.push_back(report_suboptimality(t, problem, is_sgd));

  {
    std::ofstream csv(result.trace_csv);
    csv << "experiment_id,replicate,k,objective_grad_draws,proxy_grads,loss,"
           "subopt,crit_lhs,crit_rhs,movement\n";
    csv.precision(17);
    for (std::size_t r = 0; r < result.traces.size(); ++r) {
      const RunTrace& t = result.traces[r];
      for (long long k = 1; k <= t.cfg.K; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        csv << spec.experiment_id << ',' << r << ',' << k << ','
            << t.objective_grad_draws[i] * budget_scale << ','
            << t.proxy_grads[i] << ',' << t.objective_values[i + 1] << ','
            << subopt[r][i] << ',' << t.criterion_lhs[i] << ','
            << t.criterion_rhs[i] << ',' << t.movement[i] << '\n';
      }
    }
  }

  {
    std::ofstream csv(result.aggregate_csv);
    csv << "k,objective_grad_draws,subopt_mean,subopt_stderr,loss_mean\n";
    csv.precision(17);
    for (long long k = 1; k <= K; ++k) {
      const auto i = static_cast<std::size_t>(k - 1);
      std::vector<double> s, l;
      for (std::size_t r = 0; r < result.traces.size(); ++r) {
        s.push_back(subopt[r][i]);
        l.push_back(result.traces[r].objective_values[i + 1]);
      }
      double s_mean = 0.0, l_mean = 0.0;
      for (double x : s) s_mean += x;
      for (double x : l) l_mean += x;
      s_mean /= static_cast<double>(s.size());
      l_mean /= static_cast<double>(l.size());
      csv << k << ','
          << result.traces[0].objective_grad_draws[i] * budget_scale << ',';
      write_csv_value(csv, s_mean);
      csv << ',';
      write_csv_value(csv, sample_stderr(s));
      csv << ',';
      write_csv_value(csv, l_mean);
      csv << '\n';
    }
  }

  {
    json meta;
    meta["experiment_id"] = spec.experiment_id;
    meta["algorithm"] = spec.algorithm;
    meta["mode"] = spec.mode;
    meta["eta"] = eta;
    meta["K"] = K;
    meta["G2"] = G2;
    meta["batch_size"] = spec.batch_size;
    meta["delta"] = problem.delta;
    meta["mu"] = problem.mu;
    meta["mu_reg"] = mu_reg;
    meta["H_proxy"] = problem.H_proxy;
    meta["sigma2"] = problem.sigma2;
    meta["certified"] = spec.certified;
    meta["dataset_hash"] = problem.dataset_hash;
    meta["scaling_mode"] = problem.scaling_mode;
    meta["master_seed"] = spec.seed;
    meta["problem_seed"] = spec.problem_seed;
    meta["f_at_w0"] = result.traces[0].objective_values.front();
    if (problem.reference) {
      meta["L_star"] = problem.reference->f_star;
      meta["B2"] = squared_distance(w0, problem.reference->w_star);
    }
    if (problem.f_lower_bound) meta["f_lower_bound"] = *problem.f_lower_bound;
    if (!spec.eta_grid.empty()) meta["grid"] = grid_log;
    json seeds = json::array();
    for (long long r = 0; r < spec.replicates; ++r)
      seeds.push_back(rng_fork(spec.seed, "replicate-" + std::to_string(r)));
    meta["replicate_seeds"] = seeds;
    json per_rep = json::array();
    for (std::size_t r = 0; r < result.traces.size(); ++r) {
      json jr;
      jr["subopt_report"] = subopt[r];
      if (!result.traces[r].grad_sq_norms.empty())
        jr["grad_sq_norms"] = result.traces[r].grad_sq_norms;
      long long failures = 0;
      for (char ok : result.traces[r].criterion_ok)
        if (!ok) ++failures;
      jr["criterion_failures"] = failures;
      per_rep.push_back(std::move(jr));
    }
    meta["replicates"] = per_rep;
    std::ofstream out(result.sidecar_json);
    out << meta.dump(2) << '\n';
  }

  result.problem = std::move(problem);
  return result;
}

// ---------------------------------------------------------------------------
// bound checking

namespace {

BoundRow make_row(long long K, std::vector<double> samples, double rhs) {
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  const double se = sample_stderr(samples);
  return {K, mean, rhs, se, mean <= rhs + 2.0 * se};
}

}  // namespace

BoundReport check_bound(const std::vector<RunTrace>& traces, int theorem,
                        const ProblemInstance& problem) {
  require(!traces.empty(), "check_bound: no traces");
  require(theorem >= 1 && theorem <= 3, "check_bound: theorem must be 1, 2, 3");

  BoundReport report;
  report.theorem = theorem;

  const double eta = traces.front().cfg.eta;
  for (const RunTrace& t : traces)
    require(t.cfg.eta == eta, "check_bound: traces mix stepsizes");
  if (problem.delta > 0.0 && eta > 1.0 / (4.0 * problem.delta) * (1.0 + 1e-12))
    throw ConfigError("check_bound: eta violates the eta <= 1/(4 delta) "
                      "precondition; the bound does not apply");

  if (theorem == 1) {
    require(problem.reference.has_value(), "check_bound: reference required");
    require(problem.mu > 0.0, "check_bound: theorem 1 needs mu > 0");
    const long long K = traces.front().cfg.K;
    for (const RunTrace& t : traces)
      require(t.cfg.K == K, "check_bound: theorem 1 traces must share K");
    const double G2 = traces.front().cfg.G2;
    const double B2 =
        squared_distance(traces.front().cfg.w0, problem.reference->w_star);

    std::vector<std::vector<double>> subopt;
    for (const RunTrace& t : traces)
      subopt.push_back(report_suboptimality(t, problem, false));

    const double q = 2.0 * eta * problem.mu / 5.0;
    for (long long k = 1; k <= K; ++k) {
      std::vector<double> samples;
      for (const auto& s : subopt) samples.push_back(s[k - 1]);
      const double rhs = 5.0 * B2 / (8.0 * eta) *
                             std::pow(1.0 + q, static_cast<double>(1 - k)) +
                         2.0 * eta * problem.sigma2 + G2 / problem.mu;
      report.rows.push_back(make_row(k, std::move(samples), rhs));
    }
  } else if (theorem == 2) {
    require(problem.reference.has_value(), "check_bound: reference required");
    std::map<long long, std::vector<const RunTrace*>> groups;
    for (const RunTrace& t : traces) groups[t.cfg.K].push_back(&t);
    for (const auto& [K, group] : groups) {
      std::vector<double> samples;
      double G2 = group.front()->cfg.G2;
      for (const RunTrace* t : group) {
        require(t->averaged_iterate.size() == problem.dim(),
                "check_bound: trace lacks the averaged iterate");
        samples.push_back(problem.objective->value(t->averaged_iterate) -
                          problem.reference->f_star);
      }
      const double B2 = squared_distance(group.front()->cfg.w0,
                                         problem.reference->w_star);
      const double rhs = 9.0 * B2 / (8.0 * eta * static_cast<double>(K)) +
                         2.0 * eta * problem.sigma2 +
                         eta * static_cast<double>(K) * G2;
      report.rows.push_back(make_row(K, std::move(samples), rhs));
    }
  } else {
    std::map<long long, std::vector<const RunTrace*>> groups;
    for (const RunTrace& t : traces) groups[t.cfg.K].push_back(&t);
    for (const auto& [K, group] : groups) {
      std::vector<double> samples;
      double rhs = 0.0;
      for (const RunTrace* t : group) {
        const NonconvexReport rep = nonconvex_report(*t, problem);
        samples.push_back(rep.avg_sq_grad);
        rhs = std::max(rhs, rep.bound);
      }
      report.rows.push_back(make_row(K, std::move(samples), rhs));
    }
  }

  for (const BoundRow& row : report.rows) report.all_pass &= row.pass;
  return report;
}

BoundReport check_bound_dir(const std::filesystem::path& traces_dir,
                            int theorem) {
  require(theorem >= 1 && theorem <= 3, "check_bound: theorem must be 1, 2, 3");
  BoundReport report;
  report.theorem = theorem;

  bool found = false;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(traces_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::ifstream in(file);
    json meta;
    in >> meta;
    if (!meta.contains("replicates")) continue;
    found = true;

    const double eta = meta.at("eta");
    const long long K = meta.at("K");
    const double sigma2 = meta.at("sigma2");
    const double G2 = meta.value("G2", 0.0);
    const double delta = meta.value("delta", 0.0);
    if (delta > 0.0 && eta > 1.0 / (4.0 * delta) * (1.0 + 1e-12))
      throw ConfigError("check_bound: eta violates eta <= 1/(4 delta) in " +
                        file.string());

    if (theorem == 1) {
      const double B2 = meta.at("B2");
      const double mu = meta.at("mu");
      const double q = 2.0 * eta * mu / 5.0;
      const auto& reps = meta.at("replicates");
      for (long long k = 1; k <= K; ++k) {
        std::vector<double> samples;
        for (const auto& r : reps)
          samples.push_back(
              r.at("subopt_report")[static_cast<std::size_t>(k - 1)]);
        const double rhs = 5.0 * B2 / (8.0 * eta) *
                               std::pow(1.0 + q, static_cast<double>(1 - k)) +
                           2.0 * eta * sigma2 + G2 / mu;
        report.rows.push_back(make_row(k, std::move(samples), rhs));
      }
    } else if (theorem == 2) {
      const double B2 = meta.at("B2");
      std::vector<double> samples;
      for (const auto& r : meta.at("replicates"))
        samples.push_back(r.at("subopt_report").back());
      const double rhs = 9.0 * B2 / (8.0 * eta * static_cast<double>(K)) +
                         2.0 * eta * sigma2 + eta * static_cast<double>(K) * G2;
      report.rows.push_back(make_row(K, std::move(samples), rhs));
    } else {
      const double f_w0 = meta.at("f_at_w0");
      const double f_low = meta.at("f_lower_bound");
      const double rhs =
          48.0 * (f_w0 - f_low) / (eta * static_cast<double>(K)) +
          8.0 * sigma2;
      std::vector<double> samples;
      for (const auto& r : meta.at("replicates")) {
        if (!r.contains("grad_sq_norms"))
          throw ContractViolation(
              "check_bound: theorem 3 needs certified gradient logs");
        double avg = 0.0;
        for (double v : r.at("grad_sq_norms")) avg += v;
        samples.push_back(avg / r.at("grad_sq_norms").size());
      }
      report.rows.push_back(make_row(K, std::move(samples), rhs));
    }
  }
  if (!found) throw Error("check_bound: no trace sidecars found in " +
                          traces_dir.string());
  for (const BoundRow& row : report.rows) report.all_pass &= row.pass;
  return report;
}

void print_bound_report(std::ostream& os, const BoundReport& report) {
  os << "theorem " << report.theorem << " bound check\n";
  for (const BoundRow& row : report.rows) {
    os << "  K=" << row.K << "  empirical=" << row.empirical
       << "  rhs=" << row.rhs << "  stderr=" << row.stderr_mean << "  "
       << (row.pass ? "PASS" : "FAIL") << '\n';
  }
  os << (report.all_pass ? "ALL PASS" : "BOUND VIOLATION") << '\n';
}

}  // namespace proxyprox
