#include "qunac/app/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qunac/app/trace_io.hpp"
#include "qunac/errors.hpp"
#include "qunac/libsvm.hpp"

namespace qunac::app {
namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::size_t line) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("suite: bad value for " + std::string(key) + ": '" + std::string(value) + "'",
                     line);
  }
  return out;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '.';
    if (!keep) c = '_';
  }
  return s;
}

}  // namespace

void RunSpec::validate() const {
  if (problem.empty() == data.empty()) {
    throw std::invalid_argument("exactly one of problem or data must be given");
  }
  config.validate();
}

std::string RunSpec::label() const {
  if (!problem.empty()) return problem;
  std::string l = std::filesystem::path(data).stem().string();
  if (reg.kind == Regularizer::Kind::L2) return l + ":l2";
  return l + ":huber";
}

ProblemPtr make_problem(const RunSpec& spec) {
  spec.validate();
  if (!spec.problem.empty()) return make_builtin_problem(spec.problem);
  auto data = std::make_shared<SvmDataset>(load_libsvm(spec.data));
  return std::make_shared<LogisticSvm>(std::move(data), spec.reg, spec.lambda);
}

RunSpec parse_run_spec(std::string_view text, std::size_t line) {
  RunSpec spec;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("suite: expected key=value, got '" + token + "'", line);
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "problem") {
      spec.problem = value;
    } else if (key == "data") {
      spec.data = value;
    } else if (key == "reg") {
      if (value == "l2") {
        spec.reg.kind = Regularizer::Kind::L2;
      } else if (value == "huber" || value == "pseudo-huber") {
        spec.reg.kind = Regularizer::Kind::PseudoHuber;
      } else {
        throw ParseError("suite: unknown regularizer '" + value + "'", line);
      }
    } else if (key == "lambda") {
      spec.lambda = parse_number<double>(key, value, line);
    } else if (key == "mu") {
      spec.reg.mu = parse_number<double>(key, value, line);
    } else if (key == "method") {
      const auto m = parse_method(value);
      if (!m) {
        throw ParseError("suite: unknown method '" + value + "' (valid: " + method_names() + ")",
                         line);
      }
      spec.config.method = *m;
    } else if (key == "eps") {
      spec.config.eps = parse_number<double>(key, value, line);
    } else if (key == "max_q" || key == "memory") {
      spec.config.max_q = parse_number<int>(key, value, line);
    } else if (key == "max_time") {
      spec.config.max_time_seconds = parse_number<double>(key, value, line);
    } else if (key == "max_iter") {
      spec.config.max_outer_iterations = parse_number<int>(key, value, line);
    } else if (key == "reset") {
      spec.config.reset_enabled = parse_number<int>(key, value, line) != 0;
    } else {
      throw ParseError("suite: unknown key '" + key + "'", line);
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("suite: ") + e.what(), line);
  }
  return spec;
}

std::vector<RunSpec> parse_suite(std::istream& in) {
  std::vector<RunSpec> specs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    specs.push_back(parse_run_spec(line, line_no));
  }
  return specs;
}

std::string BenchResult::cell() const {
  if (!error.empty() || !stop) return "err";
  switch (*stop) {
    case StopReason::Converged: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", seconds);
      return buf;
    }
    case StopReason::SmallStep: return "ss";
    case StopReason::Timeout: return "TO";
    case StopReason::MaxIterations: return "MI";
    case StopReason::NumericalBreakdown: return "NB";
  }
  return "err";
}

std::vector<BenchResult> run_suite(const std::vector<RunSpec>& specs, int jobs,
                                   const std::filesystem::path& trace_dir) {
  std::vector<BenchResult> results(specs.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      BenchResult& r = results[i];
      r.spec = specs[i];
      try {
        const ProblemPtr problem = make_problem(r.spec);
        const SolveReport report = minimize(*problem, r.spec.config);
        r.stop = report.stop;
        r.seconds = report.last().seconds;
        if (!trace_dir.empty()) {
          const std::string file = sanitize(r.spec.label()) + "_" +
                                   std::string(to_string(r.spec.config.method)) + ".csv";
          std::ofstream out(trace_dir / file);
          if (!out) throw std::runtime_error("cannot write " + (trace_dir / file).string());
          write_trace_csv(out, report.trace, summarize(r.spec.label(), r.spec.config.method, report));
        }
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };

  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::string format_bench_table(const std::vector<BenchResult>& results) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  const auto add = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& r : results) {
    add(rows, r.spec.label());
    add(cols, std::string(to_string(r.spec.config.method)));
  }

  std::vector<std::vector<std::string>> grid(rows.size() + 1,
                                             std::vector<std::string>(cols.size() + 1, "-"));
  grid[0][0] = "problem";
  for (std::size_t j = 0; j < cols.size(); ++j) grid[0][j + 1] = cols[j];
  for (std::size_t i = 0; i < rows.size(); ++i) grid[i + 1][0] = rows[i];
  for (const auto& r : results) {
    const auto i = static_cast<std::size_t>(
        std::find(rows.begin(), rows.end(), r.spec.label()) - rows.begin());
    const auto j = static_cast<std::size_t>(
        std::find(cols.begin(), cols.end(), std::string(to_string(r.spec.config.method))) -
        cols.begin());
    grid[i + 1][j + 1] = r.cell();
  }

  std::vector<std::size_t> width(cols.size() + 1, 0);
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream out;
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << "  ";
      out << row[j];
      if (j + 1 < row.size()) out << std::string(width[j] - row[j].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace qunac::app
