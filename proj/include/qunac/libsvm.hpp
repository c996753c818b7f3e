#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qunac/linalg.hpp"

namespace qunac {

struct SvmDataset {
  SparseRows x;
  /// One label per row, each -1 or +1.
  std::vector<double> y;
  std::string source;

  Index samples() const noexcept { return x.rows(); }
  Index features() const noexcept { return x.cols(); }
};

/// Reads "<label> <index>:<value> ..." lines with 1-based, strictly
/// increasing indices. Blank lines and trailing "# ..." comments are
/// skipped; the feature count is the largest index seen.
///
/// Labels: when no label is zero they are mapped by sign. Otherwise (e.g.
/// {0, 1} data) exactly two distinct values are allowed, and the first one
/// seen becomes +1 and the other -1.
///
/// Throws ParseError (with the line number) on malformed tokens, index 0,
/// non-increasing indices, a third label class, or an input with no rows.
SvmDataset parse_libsvm(std::istream& in, std::string source = "<stream>");

/// Throws ParseError when the file cannot be opened.
SvmDataset load_libsvm(const std::filesystem::path& path);

}  // namespace qunac
