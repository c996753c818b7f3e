#include "qunac/libsvm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

namespace qunac {
namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_index(std::string_view tok, long long& out) {
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::string_view next_token(std::string_view& rest) {
  const auto b = rest.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    rest = {};
    return {};
  }
  rest.remove_prefix(b);
  const auto e = rest.find_first_of(" \t\r");
  const std::string_view tok = rest.substr(0, e);
  rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
  return tok;
}

}  // namespace

SvmDataset parse_libsvm(std::istream& in, std::string source) {
  std::vector<std::vector<SparseRows::Entry>> rows;
  std::vector<double> raw_labels;
  std::vector<std::size_t> label_lines;
  Index max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    std::string_view tok = next_token(rest);
    if (tok.empty()) continue;

    double label = 0.0;
    if (!parse_double(tok, label)) throw ParseError("malformed label '" + std::string(tok) + "'", lineno);

    std::vector<SparseRows::Entry> row;
    long long prev = 0;
    while (!(tok = next_token(rest)).empty()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected <index>:<value>, got '" + std::string(tok) + "'", lineno);
      }
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1) {
        throw ParseError("bad feature index in '" + std::string(tok) + "'", lineno);
      }
      if (!parse_double(tok.substr(colon + 1), val)) {
        throw ParseError("bad feature value in '" + std::string(tok) + "'", lineno);
      }
      if (idx <= prev) throw ParseError("feature indices must be strictly increasing", lineno);
      prev = idx;
      row.push_back({static_cast<Index>(idx - 1), val});
      if (idx > max_index) max_index = static_cast<Index>(idx);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(label);
    label_lines.push_back(lineno);
  }
  if (rows.empty()) throw ParseError("no data rows in " + source, 0);

  bool has_zero = false;
  for (double l : raw_labels) has_zero = has_zero || l == 0.0;

  std::vector<double> y(raw_labels.size());
  if (!has_zero) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = raw_labels[i] > 0.0 ? 1.0 : -1.0;
  } else {
    const double first = raw_labels.front();
    double second = first;
    bool have_second = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double l = raw_labels[i];
      if (l == first) {
        y[i] = 1.0;
      } else if (!have_second || l == second) {
        have_second = true;
        second = l;
        y[i] = -1.0;
      } else {
        throw ParseError("more than two label classes", label_lines[i]);
      }
    }
  }

  SvmDataset out;
  out.x = SparseRows(max_index, rows);
  out.y = std::move(y);
  out.source = std::move(source);
  return out;
}

SvmDataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_libsvm(in, path.string());
}

}  // namespace qunac
