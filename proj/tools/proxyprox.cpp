// Command-line harness: run experiments, compute reference solutions, check
// theoretical bounds against recorded traces, inspect datasets.
//
// Exit codes: 0 success, 1 error, 2 bound-check failure.

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>

#include "proxyprox/data_io.hpp"
#include "proxyprox/harness.hpp"
#include "proxyprox/problems.hpp"

using namespace proxyprox;

namespace {

int cmd_run(const std::string& spec_path) {
  const ExperimentSpec spec = ExperimentSpec::parse_file(spec_path);
  const ExperimentResult result = run_experiment(spec);
  long long failures = 0;
  for (const RunTrace& t : result.traces)
    for (char ok : t.criterion_ok)
      if (!ok) ++failures;
  std::cout << "experiment " << spec.experiment_id << ": "
            << result.traces.size() << " replicate(s), eta=" << result.eta_used
            << ", criterion failures=" << failures << "\n"
            << "  traces:    " << result.trace_csv.string() << "\n"
            << "  aggregate: " << result.aggregate_csv.string() << "\n"
            << "  metadata:  " << result.sidecar_json.string() << "\n";
  return 0;
}

int cmd_reference(const std::string& spec_path, const std::string& out_path,
                  double tol) {
  ExperimentSpec spec = ExperimentSpec::parse_file(spec_path);
  spec.compute_reference = false;
  const BuiltProblem built = build_problem(spec);
  const ReferenceSolution ref =
      solve_reference(*built.problem.objective, built.problem.mu, tol);
  std::cout << "reference: f* = " << ref.f_star
            << ", ||grad|| = " << ref.grad_norm_at_w_star << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out.precision(17);
    out << "{\n  \"f_star\": " << ref.f_star << ",\n  \"grad_norm\": "
        << ref.grad_norm_at_w_star << ",\n  \"w_star\": [";
    for (Index i = 0; i < ref.w_star.size(); ++i)
      out << (i ? "," : "") << ref.w_star[i];
    out << "]\n}\n";
    std::cout << "written to " << out_path << "\n";
  }
  return 0;
}

int cmd_check_bound(int theorem, const std::string& traces_dir) {
  const BoundReport report = check_bound_dir(traces_dir, theorem);
  print_bound_report(std::cout, report);
  return report.all_pass ? 0 : 2;
}

int cmd_parse(const std::string& input, bool stats, bool zero_based) {
  ParseOptions opts;
  opts.zero_based = zero_based;
  const std::string path = find_dataset(input);
  if (path.empty()) throw Error("dataset not found: " + input);
  const Dataset data = parse_sparse_classification(path, opts);
  std::cout << "n = " << data.n() << ", d = " << data.d() << "\n";
  if (stats) {
    long long nnz = 0;
    double pos = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
      pos += data.y[i];
      for (Index j = 0; j < data.d(); ++j)
        if (data.X(i, j) != 0.0) ++nnz;
    }
    std::cout << "nnz = " << nnz << " ("
              << static_cast<double>(nnz) /
                     static_cast<double>(data.n() * data.d()) * 100.0
              << "% dense)\n"
              << "positive labels = " << pos / static_cast<double>(data.n())
              << "\n"
              << "hash = " << std::hex << dataset_hash(data) << std::dec
              << "\n";
  }
  return 0;
}

int cmd_make_data(const std::string& out_path, std::uint64_t seed) {
  const Dataset data = make_mushrooms_like(seed);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write " + out_path);
  // Files carry {1,2} labels like the original distribution of the dataset,
  // which exercises the label mapping on reparse.
  Dataset filed = data;
  for (Index i = 0; i < filed.n(); ++i)
    filed.y[i] = filed.y[i] == 1.0 ? 1.0 : 2.0;
  out << serialize_sparse_classification(filed);
  std::cout << "wrote " << data.n() << " x " << data.d() << " to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proxyprox: proxy-based inexact stochastic proximal-point method"};
  app.require_subcommand(1);

  std::string spec_path, out_path, traces_dir, input_path;
  double tol = 1e-10;
  int theorem = 1;
  bool stats = false, zero_based = false;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "execute an experiment spec");
  run->add_option("--spec", spec_path, "spec file (JSON or key=value)")
      ->required();

  auto* reference =
      app.add_subcommand("reference", "certified reference solution");
  reference->add_option("--problem,--spec", spec_path,
                        "spec file describing the problem")
      ->required();
  reference->add_option("--out", out_path, "write the solution as JSON");
  reference->add_option("--tol", tol, "gradient-norm certificate");

  auto* check = app.add_subcommand("check-bound", "verify a theorem bound");
  check->add_option("--theorem", theorem, "1, 2 or 3")->required();
  check->add_option("--traces", traces_dir, "directory of run outputs")
      ->required();

  auto* parse = app.add_subcommand("parse", "inspect a sparse dataset file");
  parse->add_option("--input", input_path, "dataset path")->required();
  parse->add_flag("--stats", stats, "print summary statistics");
  parse->add_flag("--zero-based", zero_based, "indices start at 0");

  auto* make_data =
      app.add_subcommand("make-data", "write the synthetic stand-in dataset");
  make_data->add_option("--out", out_path, "output path")->required();
  make_data->add_option("--seed", seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path);
    if (reference->parsed()) return cmd_reference(spec_path, out_path, tol);
    if (check->parsed()) return cmd_check_bound(theorem, traces_dir);
    if (parse->parsed()) return cmd_parse(input_path, stats, zero_based);
    if (make_data->parsed()) return cmd_make_data(out_path, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
