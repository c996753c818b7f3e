#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qunac/app/bench.hpp"
#include "qunac/app/selftest.hpp"
#include "qunac/app/trace_io.hpp"
#include "qunac/errors.hpp"

namespace {

using namespace qunac;
using namespace qunac::app;

struct SolveArgs {
  std::string problem;
  std::string data;
  std::string reg = "l2";
  double lambda = 1.0;
  double mu = 0.1;
  std::string method = "inverse-qunac";
  double eps = 1e-8;
  std::optional<int> max_q;
  std::optional<int> memory;
  std::optional<double> max_time;
  std::optional<int> max_iter;
  bool reset = false;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

RunSpec to_spec(const SolveArgs& a) {
  RunSpec spec;
  spec.problem = a.problem;
  spec.data = a.data;
  if (a.reg == "l2") {
    spec.reg = Regularizer::l2();
  } else if (a.reg == "huber" || a.reg == "pseudo-huber") {
    spec.reg = Regularizer::pseudo_huber(a.mu);
  } else {
    throw std::invalid_argument("unknown regularizer '" + a.reg + "' (valid: l2, huber)");
  }
  spec.lambda = a.lambda;
  const auto method = parse_method(a.method);
  if (!method) {
    throw std::invalid_argument("unknown method '" + a.method + "' (valid: " + method_names() + ")");
  }
  spec.config.method = *method;
  spec.config.eps = a.eps;
  if (a.max_q) spec.config.max_q = *a.max_q;
  if (a.memory) spec.config.max_q = *a.memory;
  spec.config.max_time_seconds = a.max_time;
  spec.config.max_outer_iterations = a.max_iter;
  spec.config.reset_enabled = a.reset;
  spec.out = a.out;
  if (a.format == "csv") {
    spec.format = TraceFormat::Csv;
  } else if (a.format == "json") {
    spec.format = TraceFormat::Json;
  } else {
    throw std::invalid_argument("unknown format '" + a.format + "' (valid: csv, json)");
  }
  spec.seed = a.seed;
  spec.validate();
  return spec;
}

int exit_code(StopReason stop) {
  switch (stop) {
    case StopReason::Converged: return 0;
    case StopReason::SmallStep:
    case StopReason::Timeout:
    case StopReason::MaxIterations: return 2;
    case StopReason::NumericalBreakdown: return 1;
  }
  return 1;
}

int cmd_solve(const SolveArgs& args) {
  const RunSpec spec = to_spec(args);
  const ProblemPtr problem = make_problem(spec);
  const SolveReport report = minimize(*problem, spec.config);
  const RunSummary summary = summarize(spec.label(), spec.config.method, report);

  if (!spec.out.empty()) {
    const auto write = [&](std::ostream& os) {
      if (spec.format == TraceFormat::Csv) {
        write_trace_csv(os, report.trace, summary);
      } else {
        write_trace_json(os, report.trace, summary);
      }
    };
    if (spec.out == "-") {
      write(std::cout);
    } else {
      std::ofstream os(spec.out);
      if (!os) throw std::runtime_error("cannot write '" + spec.out + "'");
      write(os);
    }
  }
  std::cout << format_summary(summary) << '\n';
  if (!report.message.empty()) std::cerr << report.message << '\n';
  return exit_code(report.stop);
}

int cmd_bench(const std::string& suite_path, int jobs, const std::string& trace_dir,
              const std::string& out_path) {
  std::ifstream in(suite_path);
  if (!in) throw std::runtime_error("cannot open suite '" + suite_path + "'");
  const auto specs = parse_suite(in);
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);
  const auto results = run_suite(specs, jobs, trace_dir);
  const std::string table = format_bench_table(results);
  if (out_path.empty()) {
    std::cout << table;
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot write '" + out_path + "'");
    os << table;
  }
  for (const auto& r : results) {
    if (!r.error.empty()) {
      std::cerr << r.spec.label() << " / " << to_string(r.spec.config.method) << ": " << r.error
                << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton-PCG with quasi-Newton preconditioner updates"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Minimize one problem and write its trace");
  solve_cmd->add_option("--problem", solve.problem,
                        "Built-in problem: hilbert:N, tridiag:N, rosenbrock:N, powell:N");
  solve_cmd->add_option("--data", solve.data, "LIBSVM file for logistic regression");
  solve_cmd->add_option("--reg", solve.reg, "Regularizer: l2 or huber")->capture_default_str();
  solve_cmd->add_option("--lambda", solve.lambda, "Regularization weight")->capture_default_str();
  solve_cmd->add_option("--mu", solve.mu, "Pseudo-Huber smoothing")->capture_default_str();
  solve_cmd->add_option("--method", solve.method, "Method: " + method_names())
      ->capture_default_str();
  solve_cmd->add_option("--eps", solve.eps, "Relative gradient tolerance")->capture_default_str();
  solve_cmd->add_option("--max-q", solve.max_q, "PCG iterations per outer iteration");
  solve_cmd->add_option("--memory", solve.memory, "L-BFGS memory (same setting as --max-q)");
  solve_cmd->add_option("--max-time", solve.max_time, "Wall-clock limit in seconds");
  solve_cmd->add_option("--max-iter", solve.max_iter, "Outer iteration limit");
  solve_cmd->add_flag("--reset", solve.reset, "Reset the estimate on non-descent directions");
  solve_cmd->add_option("--out", solve.out, "Trace file ('-' for standard output)");
  solve_cmd->add_option("--format", solve.format, "Trace format: csv or json")
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "Seed recorded with the run")->capture_default_str();

  std::string suite_path;
  int jobs = 1;
  std::string trace_dir;
  std::string table_out;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a suite file and print a time table");
  bench_cmd->add_option("suite", suite_path, "Suite file of key=value run lines")->required();
  bench_cmd->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  bench_cmd->add_option("--trace-dir", trace_dir, "Directory for per-run CSV traces");
  bench_cmd->add_option("--out", table_out, "Write the table here instead of standard output");

  SelftestOptions selftest;
  CLI::App* selftest_cmd = app.add_subcommand("selftest", "Run the invariant suite");
  selftest_cmd->add_option("--seed", selftest.seed, "Random seed")->capture_default_str();
  selftest_cmd->add_option("--tolerance-scale", selftest.tolerance_scale,
                           "Factor applied to every tolerance (below 1 tightens)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve);
    if (*bench_cmd) return cmd_bench(suite_path, jobs, trace_dir, table_out);
    if (*selftest_cmd) {
      const auto outcomes = run_selftest(selftest, std::cout);
      const int code = selftest_exit_code(outcomes);
      for (const auto& o : outcomes) {
        if (!o.passed) std::cerr << "selftest: property failed: " << o.name << '\n';
      }
      return code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
