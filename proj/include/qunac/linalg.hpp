#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qunac/errors.hpp"

namespace qunac {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tall n x q block (q <= n): sampling matrices, recorded actions, W*S.
using TallBlock = Eigen::MatrixXd;

/// Dense symmetric n x n matrix stored in full. Every constructor and every
/// mutation goes through symmetrization, so entries(i,j) == entries(j,i)
/// holds exactly.
class DenseSymmetric {
 public:
  /// Symmetrizes `m` as (m + m^T)/2. Throws std::invalid_argument when `m`
  /// is empty or not square.
  explicit DenseSymmetric(Matrix m);

  static DenseSymmetric identity(Index n, double scale = 1.0);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  Vector apply(const Vector& v) const { return m_ * v; }

 private:
  Matrix m_;
};

/// (m + m^T)/2, in place.
void symmetrize(Matrix& m);

/// Matrix-free operator v -> A v. Linearity and symmetry of A are part of
/// the caller's contract.
struct LinearOperator {
  Index dim = 0;
  std::function<Vector(const Vector&)> apply;

  Vector operator()(const Vector& v) const { return apply(v); }

  static LinearOperator from_matrix(Matrix m);
  static LinearOperator scaled_identity(Index n, double scale);
};

/// Compressed sparse rows with 0-based column indices, strictly increasing
/// within each row.
class SparseRows {
 public:
  struct Entry {
    Index index;
    double value;
  };

  SparseRows() = default;
  /// Throws std::invalid_argument when an index is out of range or a row is
  /// not strictly increasing.
  SparseRows(Index cols, const std::vector<std::vector<Entry>>& rows);

  Index rows() const noexcept { return static_cast<Index>(offsets_.size()) - 1; }
  Index cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  std::span<const Entry> row(Index i) const;

  /// X v
  Vector multiply(const Vector& v) const;
  /// X^T u
  Vector multiply_transpose(const Vector& u) const;

 private:
  Index cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
};

/// Relative pivot threshold of GramFactor, scaled by the largest diagonal entry.
inline constexpr double kGramPivotTolerance = 1e-14;

/// Cholesky factor L L^T of a small symmetric Gram matrix.
class GramFactor {
 public:
  /// Throws NotPositiveDefinite carrying the first failing pivot.
  static GramFactor factor(const Matrix& m);

  /// Factor of the largest leading block of `m` that is numerically
  /// positive definite. The result has size() == 0 when the first pivot
  /// already fails.
  static GramFactor factor_prefix(const Matrix& m);

  Index size() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }

  Vector solve(const Vector& y) const;
  Matrix solve(const Matrix& y) const;
  /// L^{-1} y
  Matrix solve_lower(const Matrix& y) const;

 private:
  explicit GramFactor(Matrix lower) : lower_(std::move(lower)) {}
  Matrix lower_;
};

/// S^T B, symmetrized. B is W*S (or Q*S). Throws std::invalid_argument on
/// shape mismatch.
Matrix gram(const TallBlock& s, const TallBlock& b);

/// Oblique projection proj_{S,W} v = S (S^T W S)^{-1} S^T v, with `factor`
/// the factorization of gram(S, W S).
Vector proj_apply(const TallBlock& s, const GramFactor& factor, const Vector& v);

/// Frobenius norm of (a - b) divided by the Frobenius norm of b (or 1 when
/// b is zero).
double relative_difference(const Matrix& a, const Matrix& b);

}  // namespace qunac
