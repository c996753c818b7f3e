#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qunac/newton.hpp"
#include "qunac/problems.hpp"

namespace qunac::app {

enum class TraceFormat { Csv, Json };

/// One solve: a problem selector, a method and driver overrides.
struct RunSpec {
  /// Built-in selector such as "hilbert:8"; empty when `data` is used.
  std::string problem;
  /// LIBSVM file; empty when `problem` is used.
  std::string data;
  Regularizer reg = Regularizer::l2();
  double lambda = 1.0;
  NewtonConfig config;
  std::string out;
  TraceFormat format = TraceFormat::Csv;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless exactly one selector is set and the
  /// driver configuration is valid.
  void validate() const;
  /// Row label in tables and trace file names.
  std::string label() const;
};

/// Loads the dataset or builds the built-in problem.
ProblemPtr make_problem(const RunSpec& spec);

/// Parses whitespace separated key=value tokens: problem, data, reg (l2 |
/// huber), lambda, mu, method, eps, max_q, memory, max_time, max_iter,
/// reset (0 | 1). Throws ParseError naming `line`.
RunSpec parse_run_spec(std::string_view text, std::size_t line = 0);

/// One RunSpec per non-blank line; '#' starts a comment.
std::vector<RunSpec> parse_suite(std::istream& in);

struct BenchResult {
  RunSpec spec;
  std::optional<StopReason> stop;
  double seconds = 0.0;
  std::string error;

  /// Wall seconds when converged, else "ss", "TO", "MI", "NB"; "err" when
  /// the run threw.
  std::string cell() const;
};

/// Runs every spec on `jobs` worker threads. Failures are recorded in the
/// result, never rethrown. When `trace_dir` is non-empty each run writes
/// `<label>_<method>.csv` there.
std::vector<BenchResult> run_suite(const std::vector<RunSpec>& specs, int jobs,
                                   const std::filesystem::path& trace_dir = {});

/// Rows are problems and columns methods, both in first-seen order.
std::string format_bench_table(const std::vector<BenchResult>& results);

}  // namespace qunac::app
