#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qunac/newton.hpp"

namespace qunac::app {

/// One-line outcome of a solve.
struct RunSummary {
  std::string problem;
  std::string method;
  StopReason stop = StopReason::Converged;
  double f = 0.0;
  double rel_gnorm = 0.0;
  long long total_inner = 0;
  double seconds = 0.0;
};

RunSummary summarize(const std::string& problem, Method method, const SolveReport& report);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Column order of the CSV trace.
inline constexpr const char* kTraceHeader = "k,f,gnorm,rel_gnorm,q,step,cum_hv,seconds,events";

/// Header, one row per record (events joined by ';'), then a "# summary"
/// comment line.
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace,
                     const RunSummary& summary);

/// {"trace": [ {k, f, ...}, ... ], "summary": {...}}
void write_trace_json(std::ostream& out, const std::vector<IterationRecord>& trace,
                      const RunSummary& summary);

/// Parses a CSV trace written by write_trace_csv; '#' lines are skipped.
/// Throws ParseError on a wrong header or malformed row.
std::vector<IterationRecord> read_trace_csv(std::istream& in);

/// "stop=converged f=... rel_gnorm=... inner=... seconds=..."
std::string format_summary(const RunSummary& summary);

}  // namespace qunac::app
