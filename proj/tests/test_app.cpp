#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qunac/app/bench.hpp"
#include "qunac/app/selftest.hpp"
#include "qunac/app/trace_io.hpp"

namespace qunac::app {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(text);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

std::string csv_row(const IterationRecord& r) {
  std::ostringstream out;
  out << r.k << ',' << format_double(r.f) << ',' << format_double(r.gnorm) << ','
      << format_double(r.rel_gnorm) << ',' << r.q << ',' << format_double(r.step) << ','
      << r.cum_hv << ',' << format_double(r.seconds) << ',';
  for (std::size_t i = 0; i < r.events.size(); ++i) out << (i ? ";" : "") << r.events[i];
  return out.str();
}

SolveReport sample_run(const std::string& selector, Method method) {
  NewtonConfig c;
  c.method = method;
  c.reset_enabled = true;
  return minimize(*make_builtin_problem(selector), c);
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qunac_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.0, 1.0, 0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(TraceCsv, HeaderRowsAndSummary) {
  const SolveReport r = sample_run("hilbert:6", Method::InverseQuNac);
  std::ostringstream out;
  write_trace_csv(out, r.trace, summarize("hilbert:6", Method::InverseQuNac, r));
  const auto lines = split(out.str(), '\n');
  ASSERT_EQ(lines.size(), r.trace.size() + 2);
  EXPECT_EQ(lines.front(), "k,f,gnorm,rel_gnorm,q,step,cum_hv,seconds,events");
  EXPECT_EQ(lines.back().rfind("# summary problem=hilbert:6 method=inverse-qunac stop=converged", 0),
            0u);
  for (std::size_t i = 0; i < r.trace.size(); ++i) EXPECT_EQ(lines[i + 1], csv_row(r.trace[i]));
}

TEST(TraceCsv, RoundTripIsExactAtFieldLevel) {
  for (const char* sel : {"rosenbrock:10", "powell:8"}) {
    const SolveReport r = sample_run(sel, Method::InverseLQuNac);
    std::stringstream io;
    write_trace_csv(io, r.trace, summarize(sel, Method::InverseLQuNac, r));
    const std::vector<IterationRecord> back = read_trace_csv(io);
    ASSERT_EQ(back.size(), r.trace.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(csv_row(back[i]), csv_row(r.trace[i]));
      EXPECT_EQ(back[i].f, r.trace[i].f);
      EXPECT_EQ(back[i].events, r.trace[i].events);
    }
  }
}

TEST(TraceCsv, EventsSurviveRoundTrip) {
  IterationRecord rec;
  rec.k = 3;
  rec.events = {"reset", "neg-curvature-first"};
  std::stringstream io;
  write_trace_csv(io, {rec}, RunSummary{});
  const auto back = read_trace_csv(io);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].events, rec.events);
}

TEST(TraceCsv, RejectsMalformedInput) {
  std::istringstream wrong_header("k,f\n0,1\n");
  EXPECT_THROW(read_trace_csv(wrong_header), ParseError);
  std::istringstream short_row(std::string(kTraceHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_trace_csv(short_row), ParseError);
  std::istringstream bad_number(std::string(kTraceHeader) + "\n0,x,1,1,0,0,0,0,\n");
  try {
    (void)read_trace_csv(bad_number);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(TraceJson, MirrorsCsvFields) {
  const SolveReport r = sample_run("hilbert:6", Method::InverseQuNac);
  std::ostringstream out;
  write_trace_json(out, r.trace, summarize("hilbert:6", Method::InverseQuNac, r));
  const auto doc = nlohmann::json::parse(out.str());
  ASSERT_TRUE(doc["trace"].is_array());
  ASSERT_EQ(doc["trace"].size(), r.trace.size());
  for (const char* key : {"k", "f", "gnorm", "rel_gnorm", "q", "step", "cum_hv", "seconds", "events"}) {
    EXPECT_TRUE(doc["trace"][0].contains(key)) << key;
  }
  EXPECT_EQ(doc["trace"].back()["f"].get<double>(), r.last().f);
  EXPECT_EQ(doc["summary"]["stop"], "converged");
  EXPECT_EQ(doc["summary"]["method"], "inverse-qunac");
}

TEST(Determinism, IdenticalSpecGivesIdenticalTrace) {
  for (Method m : {Method::InverseQuNac, Method::InverseLQuNac, Method::LBFGS}) {
    const SolveReport a = sample_run("rosenbrock:20", m);
    const SolveReport b = sample_run("rosenbrock:20", m);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      IterationRecord x = a.trace[i];
      IterationRecord y = b.trace[i];
      x.seconds = y.seconds = 0.0;
      EXPECT_EQ(csv_row(x), csv_row(y));
    }
    EXPECT_EQ(a.x, b.x);
  }
}

TEST(RunSpecTest, ParsesKeys) {
  const RunSpec s = parse_run_spec(
      "problem=rosenbrock:10 method=lbfgs eps=1e-6 memory=5 max_time=3 max_iter=7 reset=1");
  EXPECT_EQ(s.problem, "rosenbrock:10");
  EXPECT_EQ(s.config.method, Method::LBFGS);
  EXPECT_EQ(s.config.eps, 1e-6);
  EXPECT_EQ(s.config.max_q, 5);
  EXPECT_EQ(s.config.max_time_seconds, 3.0);
  EXPECT_EQ(s.config.max_outer_iterations, 7);
  EXPECT_TRUE(s.config.reset_enabled);
  EXPECT_EQ(s.label(), "rosenbrock:10");

  const RunSpec d = parse_run_spec("data=/x/heart.libsvm reg=huber mu=0.2 lambda=2");
  EXPECT_EQ(d.reg.kind, Regularizer::Kind::PseudoHuber);
  EXPECT_EQ(d.reg.mu, 0.2);
  EXPECT_EQ(d.lambda, 2.0);
  EXPECT_EQ(d.label(), "heart:huber");
}

TEST(RunSpecTest, Errors) {
  EXPECT_THROW(parse_run_spec("problem=hilbert:4 method=newton"), ParseError);
  EXPECT_THROW(parse_run_spec("problem=hilbert:4 colour=red"), ParseError);
  EXPECT_THROW(parse_run_spec("problem=hilbert:4 eps=abc"), ParseError);
  EXPECT_THROW(parse_run_spec("problem"), ParseError);
  EXPECT_THROW(parse_run_spec("method=bfgs"), ParseError);
  EXPECT_THROW(parse_run_spec("problem=hilbert:4 data=x.libsvm"), ParseError);
  try {
    (void)parse_run_spec("problem=hilbert:4 method=newton", 7);
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("lbfgs"), std::string::npos);
  }
}

TEST(Suite, CommentsAndLineNumbers) {
  std::istringstream in("# suite\n\nproblem=hilbert:4 method=bfgs  # trailing\nproblem=powell:4\n");
  const auto specs = parse_suite(in);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[1].problem, "powell:4");
  std::istringstream bad("problem=hilbert:4\n\nproblem=hilbert:4 method=zzz\n");
  try {
    (void)parse_suite(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Bench, TwoByTwoTableWithTraces) {
  std::istringstream in(
      "problem=hilbert:6 method=inverse-qunac\nproblem=hilbert:6 method=lbfgs\n"
      "problem=rosenbrock:10 method=inverse-qunac\nproblem=rosenbrock:10 method=lbfgs\n");
  const fs::path dir = temp_dir("bench");
  const auto results = run_suite(parse_suite(in), 2, dir);
  ASSERT_EQ(results.size(), 4u);
  for (const auto& r : results) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.stop, StopReason::Converged);
  }
  const auto lines = split(format_bench_table(results), '\n');
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].rfind("problem", 0), 0u);
  EXPECT_NE(lines[0].find("inverse-qunac"), std::string::npos);
  EXPECT_NE(lines[0].find("lbfgs"), std::string::npos);
  EXPECT_EQ(lines[1].rfind("hilbert:6", 0), 0u);
  EXPECT_EQ(lines[2].rfind("rosenbrock:10", 0), 0u);
  int traces = 0;
  for (const auto& entry : fs::directory_iterator(dir)) traces += entry.path().extension() == ".csv";
  EXPECT_EQ(traces, 4);
  fs::remove_all(dir);
}

TEST(Bench, StopMarkers) {
  std::istringstream in(
      "problem=rosenbrock:100 method=inverse-qunac max_time=0\n"
      "problem=hilbert:12 method=inverse-qunac eps=1e-300\n"
      "problem=rosenbrock:10 method=bfgs max_iter=1\n"
      "problem=hilbert:0 method=bfgs\n");
  const auto results = run_suite(parse_suite(in), 1);
  EXPECT_EQ(results[0].cell(), "TO");
  EXPECT_EQ(results[1].cell(), "ss");
  EXPECT_EQ(results[2].cell(), "MI");
  EXPECT_EQ(results[3].cell(), "err");
  EXPECT_FALSE(results[3].error.empty());
  const std::string table = format_bench_table(results);
  EXPECT_NE(table.find("TO"), std::string::npos);
  EXPECT_NE(table.find(" - "), std::string::npos);  // missing method cells
}

TEST(Selftest, DefaultRunPasses) {
  std::ostringstream out;
  const auto outcomes = run_selftest({}, out);
  EXPECT_EQ(selftest_exit_code(outcomes), 0) << out.str();
  EXPECT_NE(out.str().find("expected-failure-handled"), std::string::npos);
  for (const auto& line : split(out.str(), '\n')) EXPECT_EQ(line.rfind("PASS ", 0), 0u) << line;
}

TEST(Selftest, TightenedTolerancesFailAndNameTheProperty) {
  std::ostringstream out;
  SelftestOptions o;
  o.tolerance_scale = 1e-30;
  const auto outcomes = run_selftest(o, out);
  EXPECT_EQ(selftest_exit_code(outcomes), 1);
  EXPECT_NE(out.str().find("FAIL woodbury inverse"), std::string::npos);
}

// Runs the CLI binary and returns its exit status.
int run_cli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / "qunac_cli_output.txt";
  const std::string cmd = std::string(QUNAC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, SolveWritesTraceAndExitsZero) {
  const fs::path dir = temp_dir("cli");
  const fs::path trace = dir / "trace.csv";
  std::string out;
  EXPECT_EQ(run_cli("solve --problem hilbert:8 --method inverse-qunac --eps 1e-8 --out " +
                        trace.string(),
                    &out),
            0)
      << out;
  std::ifstream in(trace);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kTraceHeader);
  EXPECT_NE(out.find("stop=converged"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, SvmSolveReportsSummary) {
  std::string out;
  EXPECT_EQ(run_cli(std::string("solve --data ") + QUNAC_TEST_DATA_DIR +
                        "/heart_synthetic.libsvm --reg l2 --lambda 1 --method lbfgs --memory 20",
                    &out),
            0)
      << out;
  EXPECT_NE(out.find("stop="), std::string::npos);
}

TEST(Cli, ExitCodes) {
  std::string out;
  EXPECT_EQ(run_cli("solve --problem hilbert:4 --method newton", &out), 1);
  EXPECT_NE(out.find("inverse-qunac, inverse-lqunac, newton-cg, bfgs, lbfgs"), std::string::npos);
  EXPECT_EQ(run_cli("solve --problem rosenbrock:10 --max-iter 1"), 2);
  EXPECT_EQ(run_cli("solve --problem nope:3"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("selftest --tolerance-scale 1e-30", &out), 1);
  EXPECT_NE(out.find("FAIL "), std::string::npos);
}

TEST(Cli, BenchPrintsTable) {
  const fs::path dir = temp_dir("cli_bench");
  {
    std::ofstream suite(dir / "suite.txt");
    suite << "problem=hilbert:4 method=bfgs\nproblem=hilbert:4 method=newton-cg\n";
  }
  std::string out;
  EXPECT_EQ(run_cli("bench " + (dir / "suite.txt").string() + " --trace-dir " +
                        (dir / "traces").string(),
                    &out),
            0)
      << out;
  EXPECT_NE(out.find("newton-cg"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "traces"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace qunac::app
