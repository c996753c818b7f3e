#include "qunac/app/trace_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "qunac/errors.hpp"

namespace qunac::app {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_field(const std::string& field, const char* name, std::size_t line) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(std::string("trace: bad ") + name + " '" + field + "'", line);
  }
  return value;
}

std::string join_events(const std::vector<std::string>& events) {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ';';
    out += e;
  }
  return out;
}

}  // namespace

RunSummary summarize(const std::string& problem, Method method, const SolveReport& report) {
  RunSummary s;
  s.problem = problem;
  s.method = std::string(to_string(method));
  s.stop = report.stop;
  if (!report.trace.empty()) {
    s.f = report.last().f;
    s.rel_gnorm = report.last().rel_gnorm;
    s.seconds = report.last().seconds;
  }
  s.total_inner = report.total_inner();
  return s;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string format_summary(const RunSummary& s) {
  std::ostringstream os;
  os << "problem=" << s.problem << " method=" << s.method << " stop=" << to_string(s.stop)
     << " f=" << format_double(s.f) << " rel_gnorm=" << format_double(s.rel_gnorm)
     << " inner=" << s.total_inner << " seconds=" << format_double(s.seconds);
  return os.str();
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace,
                     const RunSummary& summary) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.k << ',' << format_double(r.f) << ',' << format_double(r.gnorm) << ','
        << format_double(r.rel_gnorm) << ',' << r.q << ',' << format_double(r.step) << ','
        << r.cum_hv << ',' << format_double(r.seconds) << ',' << join_events(r.events) << '\n';
  }
  out << "# summary " << format_summary(summary) << '\n';
}

void write_trace_json(std::ostream& out, const std::vector<IterationRecord>& trace,
                      const RunSummary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : trace) {
    rows.push_back({{"k", r.k},
                    {"f", r.f},
                    {"gnorm", r.gnorm},
                    {"rel_gnorm", r.rel_gnorm},
                    {"q", r.q},
                    {"step", r.step},
                    {"cum_hv", r.cum_hv},
                    {"seconds", r.seconds},
                    {"events", r.events}});
  }
  nlohmann::json doc;
  doc["trace"] = std::move(rows);
  doc["summary"] = {{"problem", summary.problem},
                    {"method", summary.method},
                    {"stop", std::string(to_string(summary.stop))},
                    {"f", summary.f},
                    {"rel_gnorm", summary.rel_gnorm},
                    {"total_inner", summary.total_inner},
                    {"seconds", summary.seconds}};
  out << doc.dump(2) << '\n';
}

std::vector<IterationRecord> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<IterationRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kTraceHeader) throw ParseError("trace: unexpected header '" + line + "'", line_no);
      header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 9) throw ParseError("trace: expected 9 fields", line_no);
    IterationRecord r;
    r.k = parse_field<int>(fields[0], "k", line_no);
    r.f = parse_field<double>(fields[1], "f", line_no);
    r.gnorm = parse_field<double>(fields[2], "gnorm", line_no);
    r.rel_gnorm = parse_field<double>(fields[3], "rel_gnorm", line_no);
    r.q = parse_field<int>(fields[4], "q", line_no);
    r.step = parse_field<double>(fields[5], "step", line_no);
    r.cum_hv = parse_field<long long>(fields[6], "cum_hv", line_no);
    r.seconds = parse_field<double>(fields[7], "seconds", line_no);
    if (!fields[8].empty()) r.events = split(fields[8], ';');
    records.push_back(std::move(r));
  }
  if (!header) throw ParseError("trace: missing header", 0);
  return records;
}

}  // namespace qunac::app
