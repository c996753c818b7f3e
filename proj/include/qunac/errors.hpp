#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace qunac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Gram matrix failed its Cholesky factorization. `pivot()` is the
/// zero-based index of the first pivot that was not numerically positive;
/// the leading `pivot()` x `pivot()` block is positive definite.
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot + 1) + ")"),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// No usable prefix of the sampling block survives factorization.
class RankDeficientSampling : public Error {
 public:
  RankDeficientSampling(std::string which, std::size_t pivot)
      : Error("rank deficient sampling in " + which + " Gram matrix (pivot " +
              std::to_string(pivot + 1) + ")"),
        which_(std::move(which)),
        pivot_(pivot) {}

  /// Which Gram matrix failed, e.g. "S^T Q S" or "S^T Q H Q S".
  const std::string& which() const noexcept { return which_; }
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::string which_;
  std::size_t pivot_;
};

/// A non-finite value appeared inside an iterative solve.
class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& where, std::size_t iteration)
      : Error(where + ": non-finite value at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Input violates a documented numerical contract (e.g. S^T S_bar != I).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Raw secant pair with non-positive curvature handed to the two-loop recursion.
class CurvatureError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  /// One-based line number, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qunac
